use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::word::Letter;
use crate::error::{Error, Result};

pub(crate) const DEFAULT_MAX_DEPTH: usize = 12;

/// Parameters of the Toeplitz sequence over `r` letters.
///
/// Periods follow `p_0 = 3`, `p_{i+1} = 3^i p_i`; step `i` colors with
/// `s_i = ((i - 1) mod r) + 1`. `max_depth` caps the number of inductive
/// steps (and the period index) any computation may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToeplitzSpec {
    pub r: u32,
    pub max_depth: usize,
}

impl ToeplitzSpec {
    pub fn new(r: u32, max_depth: usize) -> Self {
        assert!(r >= 1, "alphabet must be nonempty");
        assert!(max_depth >= 1, "max_depth must be at least 1");
        ToeplitzSpec { r, max_depth }
    }

    /// Color used by step `i >= 1`.
    pub fn step_color(&self, i: usize) -> Letter {
        Letter::raw(((i - 1) % self.r as usize) as u32 + 1)
    }

    /// `p_i`, exactly.
    pub fn period(&self, i: usize) -> Result<BigUint> {
        if i > self.max_depth {
            return Err(Error::Cap {
                index: i as i64,
                step: i,
                max_depth: self.max_depth,
            });
        }
        let three = BigUint::from(3u8);
        let mut p = three.clone();
        for k in 0..i {
            p *= three.pow(k as u32);
        }
        Ok(p)
    }

    /// Letter at position `q` together with the step that defined it.
    pub fn letter(&self, q: i64) -> Result<(Letter, usize)> {
        if q.rem_euclid(3) != 1 {
            return Ok((self.step_color(1), 1));
        }
        // p holds p_i; k is the index of the p_i-block containing q
        let mut p: i128 = 3;
        let mut i: u32 = 1;
        loop {
            let step = i as usize + 1;
            if step > self.max_depth {
                return Err(Error::Cap {
                    index: q,
                    step,
                    max_depth: self.max_depth,
                });
            }
            let m = 3i128.pow(i);
            let k = (q as i128).div_euclid(p).rem_euclid(m);
            if k == 0 || k == m - 1 {
                return Ok((self.step_color(step), step));
            }
            p *= m;
            i += 1;
        }
    }

    /// Level length: 1 at level 0, `p_q` above.
    pub fn level_len(&self, q: usize) -> Result<BigUint> {
        if q == 0 {
            Ok(BigUint::from(1u8))
        } else {
            self.period(q)
        }
    }

    /// Index of the level-`q` block `k`: the letter filling its holes, read
    /// at the block's center (always a hole for `q >= 1`).
    pub(crate) fn block_letter(&self, q: usize, k: i64) -> Result<Letter> {
        if q == 0 {
            return self.letter(k).map(|(l, _)| l);
        }
        let p = self.period(q)?;
        let p = i128::try_from(&p).map_err(|_| Error::domain("level too deep for i64 positions"))?;
        let center = (k as i128) * p + (p - 1) / 2;
        let center = i64::try_from(center).map_err(|_| Error::domain("block center outside i64"))?;
        let (l, step) = self.letter(center)?;
        debug_assert!(step > q, "center of a level-{q} block defined at step {step}");
        Ok(l)
    }

    /// Letter at offset `pos` of the level-`q` atlas word `i`.
    pub(crate) fn atlas_letter(&self, q: usize, i: Letter, pos: u128) -> Letter {
        let mut letter = i;
        let mut pos = pos;
        let mut level = q;
        while level >= 2 {
            let child_len = self
                .period(level - 1)
                .ok()
                .and_then(|p| u128::try_from(&p).ok())
                .expect("level within cap");
            let copies = 3u128.pow(level as u32 - 1);
            let b = pos / child_len;
            if b == 0 || b == copies - 1 {
                letter = self.step_color(level);
            }
            pos %= child_len;
            level -= 1;
        }
        if level == 1 && pos != 1 {
            letter = self.step_color(1);
        }
        letter
    }
}
