use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::tile::TileAddress;
use crate::error::{Error, Result};
use crate::symbolic::{Letter, Word};

/// Largest number of tiles a patch will list explicitly.
pub const TILE_LIST_LIMIT: u64 = 1 << 20;

/// Which tiles sit in row `j` below the apex of a patch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeModel {
    /// `2^j` tiles spanning the apex tile's horizontal extent.
    #[default]
    Triangle,
    /// The literal `k = 0..=j` reading (`j + 1` tiles in row `j`). Kept for
    /// comparison only: these patches do not tile a slab.
    Literal,
}

/// A decorated patch: row `j` below `apex` carries color `word[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub word: Word,
    pub shape: ShapeModel,
    pub apex: TileAddress,
}

impl Patch {
    pub fn new(word: Word, apex: TileAddress) -> Self {
        Patch {
            word,
            shape: ShapeModel::Triangle,
            apex,
        }
    }

    pub fn with_shape(mut self, shape: ShapeModel) -> Self {
        self.shape = shape;
        self
    }

    pub fn tile_count(&self) -> BigUint {
        let depth = self.word.len();
        match self.shape {
            ShapeModel::Triangle => (BigUint::one() << depth) - BigUint::one(),
            ShapeModel::Literal => BigUint::from(depth * (depth + 1) / 2),
        }
    }

    /// Every tile of the patch with its color.
    pub fn tiles(&self) -> Result<Vec<(TileAddress, Letter)>> {
        let count = self.tile_count();
        if count > BigUint::from(TILE_LIST_LIMIT) {
            return Err(Error::Budget {
                what: "patch tiles",
                needed: count.to_string(),
                limit: TILE_LIST_LIMIT,
            });
        }
        let mut out = Vec::with_capacity(count.to_usize().unwrap_or(0));
        for (j, &color) in self.word.letters().iter().enumerate() {
            let row = self.apex.row - j as i64;
            let (start, n): (BigInt, u64) = match self.shape {
                ShapeModel::Triangle => (&self.apex.col << j, 1u64 << j),
                ShapeModel::Literal => (&self.apex.col << j, j as u64 + 1),
            };
            for k in 0..n {
                out.push((TileAddress::new(row, &start + k), color));
            }
        }
        Ok(out)
    }
}

/// Coverage tally of a slab of rows by Triangle patches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub tiles: u64,
    pub uncovered: u64,
    pub multiply_covered: u64,
    pub outside: u64,
}

impl PartitionReport {
    pub fn is_partition(&self) -> bool {
        self.uncovered == 0 && self.multiply_covered == 0 && self.outside == 0
    }
}

/// Checks that patches of depth `depth` with apexes at every tile of row
/// `bottom + depth - 1`, columns `cols`, cover the slab of rows
/// `[bottom, bottom + depth)` beneath those apexes exactly once.
///
/// The slab's tile set is enumerated independently from the patch tiles:
/// row `k` holds every tile whose cell lies inside the apex row's x-range.
pub fn slab_partition(
    bottom: i64,
    depth: usize,
    cols: std::ops::Range<i64>,
    shape: ShapeModel,
) -> Result<PartitionReport> {
    if depth == 0 {
        return Err(Error::domain("slab depth must be positive"));
    }
    let top = bottom + depth as i64 - 1;
    let mut cover: HashMap<(i64, i64), u32> = HashMap::new();
    // x-range [cols.start 2^top, cols.end 2^top) in units of 2^k per row
    for k in bottom..=top {
        let scale = 1i64 << (top - k);
        for c in cols.start * scale..cols.end * scale {
            cover.insert((k, c), 0);
        }
    }
    let word = Word::new(vec![Letter::from_index(0); depth]);
    let mut outside = 0u64;
    for apex_col in cols {
        let patch = Patch::new(word.clone(), TileAddress::new(top, apex_col)).with_shape(shape);
        for (t, _) in patch.tiles()? {
            let key = (t.row, t.col.to_i64().expect("bounded window"));
            match cover.get_mut(&key) {
                Some(n) => *n += 1,
                None => outside += 1,
            }
        }
    }
    Ok(PartitionReport {
        tiles: cover.len() as u64,
        uncovered: cover.values().filter(|&&n| n == 0).count() as u64,
        multiply_covered: cover.values().filter(|&&n| n > 1).count() as u64,
        outside,
    })
}
