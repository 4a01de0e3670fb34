use approx::assert_relative_eq;
use proptest::prelude::*;

use tilemeasure::diffusion::{
    diffusion_report, ks_normal, log_height_stats, mean_variance, occupancy_compare, path_rng, simulate_path,
    simulate_paths, traces_csv, DiffusionConfig, LeafState,
};
use tilemeasure::geometry::tile_containing_point;
use tilemeasure::symbolic::{Model, ToeplitzSpec};
use tilemeasure::ErrorKind;

fn short(model: Model, seed: u64) -> DiffusionConfig {
    DiffusionConfig {
        horizon: 5.0,
        paths: 6,
        block_level: Some(1),
        trace_every: Some(100),
        ..DiffusionConfig::new(model, seed)
    }
}

#[test]
fn same_seed_same_paths() {
    let c = short(Model::substitution(), 17);
    let a = simulate_paths(&c).unwrap();
    let b = simulate_paths(&c).unwrap();
    assert_eq!(a, b);
    assert_eq!(traces_csv(&a).unwrap(), traces_csv(&b).unwrap());
    let other = simulate_paths(&DiffusionConfig { seed: 18, ..c.clone() }).unwrap();
    assert_ne!(a[0].u_end, other[0].u_end);
    // substreams depend on the path index only, not on the batch
    let start = LeafState::from_point(c.start.0, c.start.1).unwrap();
    assert_eq!(simulate_path(&c, 3, &start).unwrap(), a[3]);
    use rand::RngCore;
    assert_eq!(path_rng(5, 2).next_u64(), path_rng(5, 2).next_u64());
    assert_ne!(path_rng(5, 2).next_u64(), path_rng(5, 3).next_u64());
}

#[test]
fn occupancy_is_additive() {
    let c = short(Model::toeplitz(3), 4);
    for p in simulate_paths(&c).unwrap() {
        let steps: u64 = p.occupancy.steps_per_letter.values().sum();
        assert_eq!(steps, p.steps_taken);
        let blocks: u64 = p.occupancy.steps_per_block.as_ref().unwrap().values().sum();
        assert_eq!(blocks, p.steps_taken);
        assert_relative_eq!(p.occupancy.summed_time(), p.occupancy.total_time, max_relative = 1e-12);
        assert_relative_eq!(
            p.occupancy.total_time,
            p.steps_taken as f64 * c.dt,
            max_relative = 1e-12
        );
    }
}

#[test]
fn traces_are_decimated_and_on_the_leaf() {
    let c = short(Model::substitution(), 8);
    for p in simulate_paths(&c).unwrap() {
        assert_eq!(p.trace.len() as u64, c.steps() / 100 + 1);
        assert!(p.trace.windows(2).all(|w| w[1].0 > w[0].0));
        assert!(p.trace.iter().all(|&(_, x, y)| y > 0.0 && x.is_finite()));
        let (_, x, y) = *p.trace.last().unwrap();
        assert_relative_eq!(y.ln(), p.u_end, max_relative = 1e-12);
        assert!(tile_containing_point(x, y).is_ok());
    }
}

#[test]
fn toeplitz_cap_terminates_early() {
    let model = Model::Toeplitz(ToeplitzSpec::new(2, 2));
    let c = DiffusionConfig {
        horizon: 200.0,
        paths: 4,
        ..DiffusionConfig::new(model, 1)
    };
    let paths = simulate_paths(&c).unwrap();
    assert!(paths
        .iter()
        .all(|p| p.early_termination.as_ref().is_some_and(|e| e.kind() == ErrorKind::Cap)));
    assert!(paths.iter().all(|p| p.steps_taken < c.steps()));
    let rep = diffusion_report(&c, &paths);
    assert_eq!(rep.early_terminations.len(), 4);
}

#[test]
fn coarse_steps_need_opt_in() {
    let c = DiffusionConfig {
        dt: 0.05,
        ..short(Model::substitution(), 1)
    };
    assert_eq!(c.validate().unwrap_err().kind(), ErrorKind::Domain);
    assert!(DiffusionConfig {
        allow_coarse_dt: true,
        ..c
    }
    .validate()
    .is_ok());
}

#[test]
fn log_height_law_small_sample() {
    let c = DiffusionConfig {
        horizon: 8.0,
        paths: 2000,
        dt: 0.01,
        ..DiffusionConfig::new(Model::substitution(), 99)
    };
    let s = log_height_stats(&c).unwrap();
    let centered: Vec<f64> = s.samples.iter().map(|u| u + 4.0).collect();
    assert!(ks_normal(&centered, 0.0, 8f64.sqrt()).unwrap().pass);
    assert!((s.mean + 4.0).abs() < 3.0 * (8.0f64 / 2000.0).sqrt());
    assert_relative_eq!(s.variance, 8.0, max_relative = 0.1);
}

#[test]
fn non_uniquely_ergodic_models_assert_nothing() {
    let rep = occupancy_compare(&short(Model::toeplitz(2), 2), 1).unwrap();
    assert!(!rep.uniquely_ergodic);
    assert!(rep.letters.expected.is_none() && rep.blocks.expected.is_none());
    assert_eq!(rep.letters.observed.len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leaf_state_round_trips(x in -100.0f64..100.0, y in 0.001f64..1000.0) {
        let s = LeafState::from_point(x, y).unwrap();
        let (px, py) = s.point();
        prop_assert!((px - x).abs() <= 1e-9 * (1.0 + x.abs()));
        prop_assert!((py - y).abs() <= 1e-12 * y);
        prop_assert!((0.0..1.0).contains(&s.x_frac));
        let t = tile_containing_point(x, y).unwrap();
        prop_assert_eq!(s.tile(), t);
    }

    #[test]
    fn mean_variance_matches_two_pass(xs in prop::collection::vec(-1e3f64..1e3, 2..200)) {
        let (m, v) = mean_variance(&xs);
        let n = xs.len() as f64;
        let m2 = xs.iter().sum::<f64>() / n;
        let v2 = xs.iter().map(|x| (x - m2).powi(2)).sum::<f64>() / (n - 1.0);
        prop_assert!((m - m2).abs() < 1e-9 && (v - v2).abs() <= 1e-9 * (1.0 + v2));
    }
}
