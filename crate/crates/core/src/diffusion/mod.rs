//! Leafwise Brownian motion on the half-plane and its occupancy statistics.
//!
//! `ln y` is sampled from its exact Gaussian law each step; `x` uses an
//! Euler-Maruyama increment at the step's midpoint height. Paths draw from
//! ChaCha8 with one stream per path index, so parallel runs reproduce the
//! sequential ones bit for bit.

mod path;
mod stats;

pub use path::{
    path_rng, simulate_path, simulate_paths, traces_csv, DiffusionConfig, LeafState, OccupancyStats, PathResult,
    MAX_DEFAULT_DT,
};
pub use stats::{
    diffusion_report, ks_normal, log_height_stats, mean_variance, occupancy_compare, Comparison, DiffusionReport,
    EarlyTermination, KsResult, LogHeightStats, OccupancyComparison, NON_UNIQUELY_ERGODIC,
};
