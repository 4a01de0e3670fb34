use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::path::{log_height_increment, simulate_paths, DiffusionConfig, LeafState, PathResult};
use crate::error::{Error, Result};
use crate::measures::{
    block_frequencies, ergodic_measure_count, measure_frequencies, Scheme, DEFAULT_EPSILON, DEFAULT_MAX_DEPTH,
};

/// Sample of `u_T - u_0` across paths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogHeightStats {
    pub paths: usize,
    pub horizon: f64,
    pub mean: f64,
    pub variance: f64,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

pub fn log_height_stats(config: &DiffusionConfig) -> Result<LogHeightStats> {
    config.validate()?;
    if config.paths < 30 {
        return Err(Error::domain("log-height statistics need at least 30 paths"));
    }
    let start = LeafState::from_point(config.start.0, config.start.1)?;
    let samples: Vec<f64> = (0..config.paths)
        .into_par_iter()
        .map(|i| log_height_increment(config, i, &start))
        .collect();
    let (mean, variance) = mean_variance(&samples);
    Ok(LogHeightStats {
        paths: config.paths,
        horizon: config.steps() as f64 * config.dt,
        mean,
        variance,
        samples,
    })
}

/// Sample mean and unbiased variance (zero for fewer than two values).
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic 1% critical value `1.628 / sqrt(n)`.
    pub critical_1pct: f64,
    pub pass: bool,
}

/// One-sample Kolmogorov-Smirnov test against `Normal(mean, sd)`.
pub fn ks_normal(samples: &[f64], mean: f64, sd: f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::domain("empty sample"));
    }
    let dist = Normal::new(mean, sd).map_err(|e| Error::domain(e.to_string()))?;
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = dist.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let critical_1pct = 1.628 / n.sqrt();
    Ok(KsResult {
        statistic,
        critical_1pct,
        pass: statistic < critical_1pct,
    })
}

/// Observed versus expected occupancy fractions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub observed: Vec<f64>,
    pub expected: Option<Vec<f64>>,
    pub deviation: Option<Vec<f64>>,
    /// Three standard errors of the across-path mean.
    pub band: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyComparison {
    pub model: String,
    pub level: usize,
    pub uniquely_ergodic: bool,
    pub flag: Option<String>,
    pub letters: Comparison,
    pub blocks: Comparison,
    pub paths: usize,
    pub early_terminations: usize,
}

pub const NON_UNIQUELY_ERGODIC: &str = "non-uniquely-ergodic: no single expectation";

/// Depth below the compared level used for limit frequencies.
const LIMIT_DEPTH: usize = 24;

fn pooled(paths: &[PathResult], r: usize, pick: impl Fn(&PathResult) -> Vec<u64>) -> (Vec<f64>, Vec<f64>) {
    let per_path: Vec<Vec<f64>> = paths
        .iter()
        .map(|p| {
            let c = pick(p);
            let t: u64 = c.iter().sum();
            c.iter()
                .map(|&k| if t == 0 { 0.0 } else { k as f64 / t as f64 })
                .collect()
        })
        .collect();
    let mut total = vec![0u64; r];
    for p in paths {
        for (acc, k) in total.iter_mut().zip(pick(p)) {
            *acc += k;
        }
    }
    let all: u64 = total.iter().sum();
    let observed = total
        .iter()
        .map(|&k| if all == 0 { 0.0 } else { k as f64 / all as f64 })
        .collect();
    let band = (0..r)
        .map(|l| {
            let col: Vec<f64> = per_path.iter().map(|v| v[l]).collect();
            let (_, var) = mean_variance(&col);
            3.0 * (var / col.len() as f64).sqrt()
        })
        .collect();
    (observed, band)
}

fn compare(observed: Vec<f64>, band: Vec<f64>, expected: Option<Vec<f64>>) -> Comparison {
    let deviation = expected
        .as_ref()
        .map(|e| observed.iter().zip(e).map(|(o, x)| (o - x).abs()).collect());
    Comparison {
        observed,
        expected,
        deviation,
        band,
    }
}

/// Runs the configured paths and compares letter and level-`q` block-type
/// occupancy with the unique invariant measure, when there is one.
pub fn occupancy_compare(config: &DiffusionConfig, q: usize) -> Result<OccupancyComparison> {
    let config = DiffusionConfig {
        block_level: Some(q),
        ..config.clone()
    };
    let model = &config.model;
    let r = model.alphabet_size() as usize;
    let ergodic = ergodic_measure_count(model, Scheme::TriangleDerived, DEFAULT_EPSILON, 1, DEFAULT_MAX_DEPTH)?;
    let uniquely_ergodic = ergodic.ergodic_count == Some(1);
    let (expected_letters, expected_blocks) = if uniquely_ergodic {
        let f = measure_frequencies(model, Scheme::TriangleDerived, &ergodic, 1, q + LIMIT_DEPTH)?;
        let b = block_frequencies(model, q, q + LIMIT_DEPTH, 0)?;
        (Some(f.approx), Some(b.iter().map(|x| x.to_f64()).collect::<Vec<_>>()))
    } else {
        (None, None)
    };
    let paths = simulate_paths(&config)?;
    let (lo, lb) = pooled(&paths, r, |p| p.occupancy.steps_per_letter.values().copied().collect());
    let (bo, bb) = pooled(&paths, r, |p| {
        p.occupancy
            .steps_per_block
            .as_ref()
            .map(|m| m.values().copied().collect())
            .unwrap_or_else(|| vec![0; r])
    });
    Ok(OccupancyComparison {
        model: model.name(),
        level: q,
        uniquely_ergodic,
        flag: (!uniquely_ergodic).then(|| NON_UNIQUELY_ERGODIC.to_string()),
        letters: compare(lo, lb, expected_letters),
        blocks: compare(bo, bb, expected_blocks),
        paths: paths.len(),
        early_terminations: paths.iter().filter(|p| p.early_termination.is_some()).count(),
    })
}

/// Early termination of one path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EarlyTermination {
    pub path: usize,
    pub steps_taken: u64,
    pub reason: String,
}

/// JSON run report of a batch of paths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffusionReport {
    pub config: DiffusionConfig,
    pub steps: u64,
    pub letter_fractions: Vec<f64>,
    pub letter_bands: Vec<f64>,
    pub block_fractions: Option<Vec<f64>>,
    pub u_mean: f64,
    pub u_variance: f64,
    pub mean_row_crossings: f64,
    pub early_terminations: Vec<EarlyTermination>,
}

pub fn diffusion_report(config: &DiffusionConfig, paths: &[PathResult]) -> DiffusionReport {
    let r = config.model.alphabet_size() as usize;
    let (letter_fractions, letter_bands) =
        pooled(paths, r, |p| p.occupancy.steps_per_letter.values().copied().collect());
    let block_fractions = config.block_level.map(|_| {
        pooled(paths, r, |p| {
            p.occupancy
                .steps_per_block
                .as_ref()
                .map(|m| m.values().copied().collect())
                .unwrap_or_else(|| vec![0; r])
        })
        .0
    });
    let du: Vec<f64> = paths.iter().map(|p| p.u_end - p.u_start).collect();
    let (u_mean, u_variance) = mean_variance(&du);
    DiffusionReport {
        config: config.clone(),
        steps: config.steps(),
        letter_fractions,
        letter_bands,
        block_fractions,
        u_mean,
        u_variance,
        mean_row_crossings: paths.iter().map(|p| p.occupancy.row_crossings as f64).sum::<f64>()
            / paths.len().max(1) as f64,
        early_terminations: paths
            .iter()
            .filter_map(|p| {
                p.early_termination.as_ref().map(|e| EarlyTermination {
                    path: p.index,
                    steps_taken: p.steps_taken,
                    reason: e.to_string(),
                })
            })
            .collect(),
    }
}
