//! Decoration sequences and their atlas-of-words hierarchies.
//!
//! Two families are supported: the Toeplitz sequences over
//! `r` letters ([`ToeplitzSpec`]) and fixed points of constant-length
//! substitutions ([`SubstitutionRule`]). [`Model`] wraps either one behind a
//! common interface used by the geometry, measures and diffusion modules.

mod atlas;
mod substitution;
mod toeplitz;
mod word;

pub use atlas::{AtlasLevel, AtlasWord, BlockDecomposition, BlockRun};
pub use substitution::SubstitutionRule;
pub use toeplitz::ToeplitzSpec;
pub use word::{Letter, WindowJson, Word};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest word or window materialized as an explicit letter vector.
pub const MATERIALIZE_LIMIT: u64 = 1_000_000;

/// A decoration sequence together with its word hierarchy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Toeplitz(ToeplitzSpec),
    Substitution(SubstitutionRule),
}

impl Model {
    pub fn toeplitz(r: u32) -> Model {
        Model::Toeplitz(ToeplitzSpec::new(r, toeplitz::DEFAULT_MAX_DEPTH))
    }

    /// The `1 -> 112, 2 -> 122` substitution.
    pub fn substitution() -> Model {
        Model::Substitution(SubstitutionRule::standard())
    }

    pub fn alphabet_size(&self) -> u32 {
        match self {
            Model::Toeplitz(t) => t.r,
            Model::Substitution(s) => s.alphabet_size(),
        }
    }

    pub fn is_substitution(&self) -> bool {
        matches!(self, Model::Substitution(_))
    }

    /// Short human-readable name, e.g. `toeplitz(r=3)`.
    pub fn name(&self) -> String {
        match self {
            Model::Toeplitz(t) => format!("toeplitz(r={})", t.r),
            Model::Substitution(_) => "substitution".to_string(),
        }
    }

    /// Letter `w_q` of the bi-infinite sequence.
    pub fn letter(&self, q: i64) -> Result<Letter> {
        match self {
            Model::Toeplitz(t) => t.letter(q).map(|(l, _)| l),
            Model::Substitution(s) => s.fixed_letter(q),
        }
    }

    /// Letters `w_from .. w_{to-1}`.
    pub fn window(&self, from: i64, to: i64) -> Result<Word> {
        if to <= from {
            return Err(Error::domain(format!("empty window [{from}, {to})")));
        }
        let len = (to as i128 - from as i128) as u128;
        if len > MATERIALIZE_LIMIT as u128 {
            return Err(Error::Budget {
                what: "window",
                needed: len.to_string(),
                limit: MATERIALIZE_LIMIT,
            });
        }
        (from..to)
            .map(|q| self.letter(q))
            .collect::<Result<Vec<_>>>()
            .map(Word::new)
    }

    /// Length of the level-`q` atlas words.
    pub fn level_len(&self, q: usize) -> Result<BigUint> {
        match self {
            Model::Toeplitz(t) => t.level_len(q),
            Model::Substitution(s) => Ok(BigUint::from(s.image_len()).pow(q as u32)),
        }
    }

    /// Level length as `u64`, or a budget error when it does not fit.
    pub fn level_len_u64(&self, q: usize) -> Result<u64> {
        let len = self.level_len(q)?;
        u64::try_from(&len).map_err(|_| Error::Budget {
            what: "level length",
            needed: len.to_string(),
            limit: u64::MAX,
        })
    }

    /// Atlas word index of the level-`q` block `[k L_q, (k+1) L_q)` of the
    /// sequence, computed without materializing the block.
    pub fn block_letter(&self, q: usize, k: i64) -> Result<Letter> {
        match self {
            Model::Substitution(_) => self.letter(k),
            Model::Toeplitz(t) => t.block_letter(q, k),
        }
    }
}
