//! `key = value` defaults file.
//!
//! Keys are long flag names (`-` or `_` separated). A key unknown to every
//! subcommand is an error; keys the running subcommand does not take are
//! ignored, so one file can serve several subcommands. Flags given on the
//! command line win.

use std::collections::BTreeMap;
use std::path::Path;

use clap::CommandFactory;
use tilemeasure::Error;

use crate::{Cli, Failure};

/// Parses the file contents into normalized keys.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("config line {}: expected key = value", n + 1)))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim().to_string();
        if key.is_empty() {
            return Err(Failure::Usage(format!("config line {}: empty key", n + 1)));
        }
        if out.insert(key.clone(), value).is_some() {
            return Err(Failure::Usage(format!("config line {}: duplicate key {key:?}", n + 1)));
        }
    }
    Ok(out)
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Inserts the file's defaults after the subcommand name.
pub fn apply(argv: Vec<String>) -> Result<Vec<String>, Failure> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let entries = parse(&text)?;

    let cmd = Cli::command();
    let reserved = ["config", "help", "version"];
    let known: Vec<String> = cmd
        .get_subcommands()
        .flat_map(|s| s.get_arguments().filter_map(|a| a.get_long().map(str::to_string)))
        .filter(|k| !reserved.contains(&k.as_str()))
        .collect();
    if let Some(bad) = entries.keys().find(|k| !known.contains(k)) {
        return Err(Failure::Usage(format!("config: unknown key {bad:?}")));
    }

    // position of the subcommand name, skipping the --config value
    let mut idx = None;
    let mut i = 1;
    while i < argv.len() {
        if argv[i] == "--config" {
            i += 2;
            continue;
        }
        if cmd.find_subcommand(&argv[i]).is_some() {
            idx = Some(i);
            break;
        }
        i += 1;
    }
    let Some(idx) = idx else {
        return Ok(argv);
    };
    let sub = cmd.find_subcommand(&argv[idx]).expect("found above");
    let user = &argv[idx + 1..];

    let mut injected = Vec::new();
    for (key, value) in &entries {
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            continue;
        };
        let long = format!("--{key}");
        let short = arg.get_short().map(|c| format!("-{c}"));
        let given = user.iter().any(|t| {
            *t == long
                || t.starts_with(&format!("{long}="))
                || short.as_ref().is_some_and(|s| t.starts_with(s.as_str()))
        });
        if given {
            continue;
        }
        if arg.get_action().takes_values() {
            injected.push(format!("{long}={value}"));
        } else {
            match value.as_str() {
                "true" => injected.push(long),
                "false" => {}
                other => {
                    return Err(Failure::Usage(format!(
                        "config: {key} expects true or false, got {other:?}"
                    )));
                }
            }
        }
    }
    let mut out = argv[..=idx].to_vec();
    out.extend(injected);
    out.extend_from_slice(user);
    Ok(out)
}
