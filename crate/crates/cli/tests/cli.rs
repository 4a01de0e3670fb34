use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tilemeasure"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid json on stdout")
}

fn frac(v: &Value) -> (String, String) {
    (
        v["num"].as_str().unwrap().to_string(),
        v["den"].as_str().unwrap().to_string(),
    )
}

#[test]
fn gen_toeplitz_window() {
    let o = run(&["gen", "--model", "toeplitz", "--r", "2", "--from", "0", "--to", "9"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let letters: Vec<u64> = v["letters"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(letters, vec![1, 2, 1, 1, 1, 1, 1, 2, 1]);
    let o = run(&[
        "gen", "--model", "toeplitz", "--r", "2", "--from", "0", "--to", "9", "--format", "text",
    ]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "1,2,1,1,1,1,1,2,1");
}

#[test]
fn printed_matrix_values() {
    let o = run(&[
        "matrices",
        "--model",
        "substitution",
        "--scheme",
        "paper",
        "--level",
        "1",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let m = &v["schemes"][0]["matrix"];
    let s = |a: &str, b: &str| (a.to_string(), b.to_string());
    assert_eq!(frac(&m[0][0]), s("5", "4"));
    assert_eq!(frac(&m[0][1]), s("1", "1"));
    assert_eq!(frac(&m[1][0]), s("1", "16"));
    assert_eq!(frac(&m[1][1]), s("5", "16"));
    assert_eq!(frac(&v["schemes"][0]["mass_residual"][0]), s("81", "16"));
}

#[test]
fn both_schemes_and_disagreement() {
    let v = json(&run(&["matrices", "--model", "substitution", "--level", "1"]));
    assert_eq!(v["schemes"].as_array().unwrap().len(), 2);
    // printed - triangle at (0, 0) is 5/4 - 2
    assert_eq!(frac(&v["disagreement"][0][0]), ("-3".to_string(), "4".to_string()));
    // the printed scheme is undefined for the Toeplitz model and reported as such
    let v = json(&run(&["matrices", "--model", "toeplitz", "--r", "2", "--level", "1"]));
    assert!(v["schemes"][1]["error"].is_string());
    assert!(v["disagreement"].is_null());
}

#[test]
fn measures_count_toeplitz() {
    let o = run(&["measures", "--model", "toeplitz", "--r", "3", "--depth", "5"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["ergodic_count"], 3);
    assert_eq!(v["count_at_report_depth"], 3);
    assert_eq!(v["status"], "stabilized");
}

#[test]
fn frequencies_csv() {
    let o = run(&[
        "frequencies",
        "--model",
        "substitution",
        "--level",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("letter,count,frequency_num,frequency_den,frequency"));
    assert!(lines.next().unwrap().starts_with("1,5,5,9,"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["nonsense"])), 2);
    assert_eq!(
        code(&run(&["gen", "--model", "toeplitz", "--from", "0", "--to", "3"])),
        2
    );
    assert_eq!(
        code(&run(&[
            "gen", "--model", "toeplitz", "--r", "0", "--from", "0", "--to", "3"
        ])),
        3
    );
    assert_eq!(
        code(&run(&[
            "matrices", "--model", "toeplitz", "--r", "2", "--scheme", "printed"
        ])),
        3
    );
    let capped = [
        "gen",
        "--model",
        "toeplitz",
        "--r",
        "2",
        "--max-depth",
        "2",
        "--from",
        "0",
        "--to",
        "400",
    ];
    assert_eq!(code(&run(&capped)), 4);
    assert_eq!(code(&run(&["gen", "--from", "0", "--to", "100000000"])), 5);
    assert_eq!(code(&run(&["certify", "--model", "toeplitz", "--r", "2"])), 6);
    assert_eq!(code(&run(&["measures", "--depth", "1", "--search-depth", "3"])), 6);
    assert_eq!(code(&run(&["verify", "--model", "substitution", "--paths", "10"])), 7);
    assert_eq!(
        code(&run(&[
            "gen",
            "--from",
            "0",
            "--to",
            "3",
            "-o",
            "/nonexistent/dir/x.json"
        ])),
        1
    );
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn diagnostics_on_stderr() {
    let o = run(&["gen", "--from", "0", "--to", "100000000"]);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn config_defaults_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# shared\nmodel = toeplitz\nr = 2\nfrom = 0\nto = 9\nseed = 5\n").unwrap();
    let c = conf.to_str().unwrap();
    let v = json(&run(&["--config", c, "gen"]));
    assert_eq!(v["letters"].as_array().unwrap().len(), 9);
    let v = json(&run(&["gen", "--config", c, "--to", "3"]));
    assert_eq!(v["to"], 3);
    std::fs::write(&conf, "model = toeplitz\nwidth_of_tile = 2\n").unwrap();
    assert_eq!(code(&run(&["--config", c, "gen", "--from", "0", "--to", "1"])), 2);
    std::fs::write(&conf, "r 2\n").unwrap();
    assert_eq!(code(&run(&["--config", c, "gen", "--from", "0", "--to", "1"])), 2);
}

#[test]
fn output_file_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("traces.csv");
    let report = dir.path().join("report.json");
    let o = run(&[
        "diffuse",
        "--horizon",
        "2",
        "--paths",
        "2",
        "--seed",
        "9",
        "--traces",
        traces.to_str().unwrap(),
        "-o",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["steps"], 2000);
    assert!(std::fs::read_to_string(&traces).unwrap().starts_with("path,t,x,y"));

    let svg = dir.path().join("tiles.svg");
    let o = run(&[
        "render",
        "--row-min",
        "0",
        "--row-max",
        "2",
        "--overlay",
        "1",
        "--traces",
        traces.to_str().unwrap(),
        "-o",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains("<svg") && text.contains("class=\"trace\"") && text.contains("class=\"overlay\""));
}

#[test]
fn diffusion_is_deterministic() {
    let args = [
        "diffuse",
        "--horizon",
        "3",
        "--paths",
        "3",
        "--seed",
        "42",
        "--block-level",
        "1",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "diffuse",
        "--horizon",
        "3",
        "--paths",
        "3",
        "--seed",
        "43",
        "--block-level",
        "1",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn diffuse_law_and_compare() {
    let v = json(&run(&[
        "diffuse",
        "--mode",
        "law",
        "--horizon",
        "4",
        "--paths",
        "300",
        "--dt",
        "0.01",
        "--seed",
        "2",
    ]));
    assert_eq!(v["expected_mean"], -2.0);
    assert!(v["ks"]["pass"].as_bool().unwrap());
    let v = json(&run(&[
        "diffuse",
        "--mode",
        "compare",
        "--model",
        "toeplitz",
        "--r",
        "2",
        "--horizon",
        "1",
        "--paths",
        "2",
    ]));
    assert_eq!(v["uniquely_ergodic"], false);
    assert!(v["flag"].as_str().unwrap().starts_with("non-uniquely-ergodic"));
    assert!(v["letters"]["expected"].is_null());
}

#[test]
fn coarse_dt_needs_opt_in() {
    let base = ["diffuse", "--horizon", "1", "--paths", "1", "--dt", "0.05"];
    assert_eq!(code(&run(&base)), 3);
    let mut args = base.to_vec();
    args.push("--allow-coarse-dt");
    assert_eq!(code(&run(&args)), 0);
}

#[test]
fn atlas_and_blocks() {
    let v = json(&run(&[
        "atlas",
        "--model",
        "substitution",
        "--level",
        "2",
        "--from",
        "0",
        "--to",
        "18",
    ]));
    assert_eq!(v["length"], "9");
    assert_eq!(v["words"][0]["word"], "112112122");
    assert_eq!(v["blocks"]["blocks"].as_array().unwrap().len(), 2);
    let o = run(&["atlas", "--level", "1", "--from", "1", "--to", "4"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_passes() {
    let o = run(&["verify"]);
    let v = json(&o);
    assert_eq!(code(&o), 0, "{v}");
    assert_eq!(v["pass"], true);
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["check"].as_str().unwrap())
        .collect();
    for n in [
        "counting-equivalence",
        "mass-conservation",
        "nesting",
        "contraction",
        "u-law",
    ] {
        assert!(names.contains(&n), "{n} missing");
    }
}
