use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::TileAddress;
use crate::symbolic::{Letter, Model};

const LN_2: f64 = std::f64::consts::LN_2;

/// Largest step accepted without an explicit override.
pub const MAX_DEFAULT_DT: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffusionConfig {
    pub dt: f64,
    /// Horizon `T`; the path runs `ceil(T / dt)` steps.
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    #[serde(serialize_with = "model_name")]
    pub model: Model,
    /// Starting point `(x, y)` in the half-plane.
    pub start: (f64, f64),
    /// Level whose block types are tracked alongside letters.
    pub block_level: Option<usize>,
    /// Record `(t, x, y)` every this many steps.
    pub trace_every: Option<u64>,
    /// Accept `dt` above [`MAX_DEFAULT_DT`].
    pub allow_coarse_dt: bool,
}

fn model_name<S: Serializer>(m: &Model, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&m.name())
}

impl DiffusionConfig {
    /// `dt = 1e-3`, `T = 2000`, 50 paths, starting at `i`.
    pub fn new(model: Model, seed: u64) -> Self {
        DiffusionConfig {
            dt: 1e-3,
            horizon: 2000.0,
            paths: 50,
            seed,
            model,
            start: (0.5, 1.0),
            block_level: None,
            trace_every: None,
            allow_coarse_dt: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::domain("dt must be positive"));
        }
        if self.dt > MAX_DEFAULT_DT && !self.allow_coarse_dt {
            return Err(Error::domain(format!("dt = {} exceeds {MAX_DEFAULT_DT}", self.dt)));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::domain("horizon must be finite and nonnegative"));
        }
        if self.paths == 0 {
            return Err(Error::domain("at least one path is required"));
        }
        if !(self.start.1 > 0.0) || !self.start.0.is_finite() || !self.start.1.is_finite() {
            return Err(Error::domain("start must lie in the upper half-plane"));
        }
        if self.trace_every == Some(0) {
            return Err(Error::domain("trace interval must be positive"));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        (self.horizon / self.dt).ceil() as u64
    }
}

/// Position on the leaf: `y = e^u`, and `x = (col + x_frac) 2^row`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafState {
    pub u: f64,
    pub row: i64,
    pub col: BigInt,
    pub x_frac: f64,
}

impl LeafState {
    pub fn from_point(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::domain("point must lie in the upper half-plane"));
        }
        let u = y.ln();
        let row = (u / LN_2).floor() as i64;
        let scaled = x / crate::exact::ldexp(1.0, row);
        let c = scaled.floor();
        let col = BigInt::from_f64(c).ok_or_else(|| Error::domain("column overflow"))?;
        let x_frac = (scaled - c).clamp(0.0, 1.0 - f64::EPSILON / 2.0);
        Ok(LeafState { u, row, col, x_frac })
    }

    pub fn tile(&self) -> TileAddress {
        TileAddress::new(self.row, self.col.clone())
    }

    /// Approximate half-plane coordinates (lossy for far-away columns).
    pub fn point(&self) -> (f64, f64) {
        let w = crate::exact::ldexp(1.0, self.row);
        ((self.col.to_f64().unwrap_or(f64::NAN) + self.x_frac) * w, self.u.exp())
    }

    /// One step of the integrator; returns the number of row crossings.
    pub(crate) fn step(&mut self, rng: &mut ChaCha8Rng, sqrt_dt: f64, dt: f64) -> u32 {
        let xi_u: f64 = rng.sample(StandardNormal);
        let xi_x: f64 = rng.sample(StandardNormal);
        let u_next = self.u + sqrt_dt * xi_u - 0.5 * dt;
        // x increment in units of the current tile width 2^row
        let mid = 0.5 * (self.u + u_next) - self.row as f64 * LN_2;
        self.x_frac += mid.exp() * sqrt_dt * xi_x;
        let carry = self.x_frac.floor();
        if carry != 0.0 {
            self.col += BigInt::from_f64(carry).expect("finite carry");
            self.x_frac -= carry;
        }
        self.u = u_next;
        let target = (u_next / LN_2).floor() as i64;
        let mut crossings = 0;
        while self.row < target {
            // up: two tiles merge into one of twice the width
            let (q, m) = self.col.div_mod_floor(&BigInt::from(2));
            self.x_frac = (m.to_f64().unwrap_or(0.0) + self.x_frac) * 0.5;
            self.col = q;
            self.row += 1;
            crossings += 1;
        }
        while self.row > target {
            self.x_frac *= 2.0;
            let carry = if self.x_frac >= 1.0 { 1 } else { 0 };
            self.x_frac -= carry as f64;
            self.col = (&self.col << 1u32) + carry;
            self.row -= 1;
            crossings += 1;
        }
        if self.x_frac >= 1.0 {
            self.x_frac = 1.0 - f64::EPSILON / 2.0;
        }
        crossings
    }
}

/// Per-letter occupancy; times are step counts times `dt`, so the totals add up exactly.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OccupancyStats {
    pub steps_per_letter: BTreeMap<u32, u64>,
    pub time_per_letter: BTreeMap<u32, f64>,
    pub row_crossings: u64,
    pub total_time: f64,
    /// Step counts per level-`q` block type, when tracked.
    pub steps_per_block: Option<BTreeMap<u32, u64>>,
}

impl OccupancyStats {
    pub fn fraction(&self, letter: u32) -> f64 {
        let total: u64 = self.steps_per_letter.values().sum();
        if total == 0 {
            return 0.0;
        }
        self.steps_per_letter.get(&letter).copied().unwrap_or(0) as f64 / total as f64
    }

    /// Compensated sum of the per-letter times.
    pub fn summed_time(&self) -> f64 {
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for &t in self.time_per_letter.values() {
            let y = t - c;
            let n = s + y;
            c = (n - s) - y;
            s = n;
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathResult {
    pub index: usize,
    pub steps_taken: u64,
    pub u_start: f64,
    pub u_end: f64,
    pub occupancy: OccupancyStats,
    /// Set when the path reached a row whose letter is undefined.
    #[serde(serialize_with = "error_message")]
    pub early_termination: Option<Error>,
    /// `(t, x, y)` every `trace_every` steps from `t = 0`, plus the final state.
    pub trace: Vec<(f64, f64, f64)>,
}

fn error_message<S: Serializer>(e: &Option<Error>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.serialize_some(&e.to_string()),
        None => s.serialize_none(),
    }
}

/// Generator of path `index`: ChaCha8 keyed by `seed`, stream `index`.
pub fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

struct LetterCache<'a> {
    model: &'a Model,
    block_level: Option<(usize, i64)>,
    row: i64,
    letter: Letter,
    block: Option<Letter>,
}

impl<'a> LetterCache<'a> {
    fn new(model: &'a Model, block_level: Option<usize>, row: i64) -> Result<Self> {
        let block_level = match block_level {
            Some(q) => Some((q, model.level_len_u64(q)? as i64)),
            None => None,
        };
        let mut c = LetterCache {
            model,
            block_level,
            row,
            letter: Letter::from_index(0),
            block: None,
        };
        c.refresh(row)?;
        Ok(c)
    }

    fn refresh(&mut self, row: i64) -> Result<()> {
        self.letter = self.model.letter(row)?;
        self.block = match self.block_level {
            Some((q, len)) => Some(self.model.block_letter(q, row.div_euclid(len))?),
            None => None,
        };
        self.row = row;
        Ok(())
    }
}

/// Runs path `index` of `config` from `start`.
pub fn simulate_path(config: &DiffusionConfig, index: usize, start: &LeafState) -> Result<PathResult> {
    config.validate()?;
    let steps = config.steps();
    let dt = config.dt;
    let sqrt_dt = dt.sqrt();
    let mut rng = path_rng(config.seed, index);
    let mut state = start.clone();
    let mut cache = LetterCache::new(&config.model, config.block_level, state.row)?;
    let r = config.model.alphabet_size();
    let mut letter_steps = vec![0u64; r as usize];
    let mut block_steps = vec![0u64; r as usize];
    let mut crossings = 0u64;
    let mut early = None;
    let mut trace = Vec::new();
    let mut taken = 0u64;
    for n in 0..steps {
        if let Some(every) = config.trace_every {
            if n % every == 0 {
                let (x, y) = state.point();
                trace.push((n as f64 * dt, x, y));
            }
        }
        letter_steps[cache.letter.index()] += 1;
        if let Some(b) = cache.block {
            block_steps[b.index()] += 1;
        }
        taken += 1;
        let c = state.step(&mut rng, sqrt_dt, dt);
        if c > 0 {
            crossings += c as u64;
            if let Err(e) = cache.refresh(state.row) {
                early = Some(e);
                break;
            }
        }
    }
    if config.trace_every.is_some() {
        let (x, y) = state.point();
        trace.push((taken as f64 * dt, x, y));
    }
    let steps_per_letter: BTreeMap<u32, u64> = (0..r as usize).map(|i| (i as u32 + 1, letter_steps[i])).collect();
    let time_per_letter = steps_per_letter.iter().map(|(&l, &s)| (l, s as f64 * dt)).collect();
    let occupancy = OccupancyStats {
        time_per_letter,
        steps_per_letter,
        row_crossings: crossings,
        total_time: taken as f64 * dt,
        steps_per_block: config
            .block_level
            .map(|_| (0..r as usize).map(|i| (i as u32 + 1, block_steps[i])).collect()),
    };
    Ok(PathResult {
        index,
        steps_taken: taken,
        u_start: start.u,
        u_end: state.u,
        occupancy,
        early_termination: early,
        trace,
    })
}

/// Runs every path in parallel; the result equals the sequential run.
pub fn simulate_paths(config: &DiffusionConfig) -> Result<Vec<PathResult>> {
    use rayon::prelude::*;
    config.validate()?;
    let start = LeafState::from_point(config.start.0, config.start.1)?;
    (0..config.paths)
        .into_par_iter()
        .map(|i| simulate_path(config, i, &start))
        .collect()
}

/// `u_T - u_0` for path `index`, running the same integrator without occupancy bookkeeping.
pub(crate) fn log_height_increment(config: &DiffusionConfig, index: usize, start: &LeafState) -> f64 {
    let dt = config.dt;
    let sqrt_dt = dt.sqrt();
    let mut rng = path_rng(config.seed, index);
    let mut state = start.clone();
    for _ in 0..config.steps() {
        state.step(&mut rng, sqrt_dt, dt);
    }
    state.u - start.u
}

/// Decimated traces as CSV (`path,t,x,y`).
pub fn traces_csv(paths: &[PathResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["path", "t", "x", "y"]).map_err(io)?;
    for p in paths {
        for &(t, x, y) in &p.trace {
            w.write_record([p.index.to_string(), t.to_string(), x.to_string(), y.to_string()])
                .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}
