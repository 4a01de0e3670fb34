//! Placements of level-`q` patches inside level-`(q+1)` patches.
//!
//! With the Triangle shape, the level-`(q+1)` patch of word `j` is the
//! concatenation (top to bottom) of its level-`q` blocks. Block `b` starts
//! `d = b * L_q` rows below the apex and holds `2^d` copies of a child patch,
//! the `h`-th placed by `g = R^-d ∘ S^h`, so `alpha(g) = 2^-d`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use super::affine::AffineMap;
use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::symbolic::{Letter, Model};

/// Above this many explicit placements a table is kept in compressed form.
pub const OCCURRENCE_LIMIT: u64 = 1 << 20;

/// One placement of a child patch inside a parent patch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Occurrence {
    pub parent_level: usize,
    pub parent: Letter,
    pub child: Letter,
    pub depth: u64,
    pub horizontal: u64,
}

impl Occurrence {
    /// `z -> 2^-d (z + h)`.
    pub fn placement(&self) -> AffineMap<Exact> {
        AffineMap::new(
            Exact::pow2(-(self.depth as i64)),
            Exact::dyadic(self.horizontal, -(self.depth as i64)),
        )
        .expect("positive dilation")
    }
}

/// All placements sharing a depth: `count` copies of child patch `child`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccurrenceClass {
    pub depth: u64,
    pub count: BigUint,
    pub child: Letter,
}

impl OccurrenceClass {
    /// Placement of the leftmost member (`h = 0`); every member has the same alpha.
    pub fn placement(&self) -> AffineMap<Exact> {
        AffineMap::new(Exact::pow2(-(self.depth as i64)), Exact::zero()).expect("positive dilation")
    }

    /// `count * alpha(g)`: this class's contribution to a transition matrix entry.
    pub fn weight(&self) -> Exact {
        Exact::from(self.count.clone()) * self.placement().alpha()
    }
}

impl Serialize for OccurrenceClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("OccurrenceClass", 3)?;
        st.serialize_field("d", &self.depth)?;
        st.serialize_field("count", &self.count.to_string())?;
        st.serialize_field("child", &self.child)?;
        st.end()
    }
}

/// Occurrences of level-`q` patches in the level-`(q+1)` patch `parent`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OccurrenceTable {
    pub q: usize,
    pub parent: Letter,
    pub classes: Vec<OccurrenceClass>,
    #[serde(skip)]
    pub explicit: Option<Vec<Occurrence>>,
}

impl OccurrenceTable {
    pub fn total_count(&self) -> BigUint {
        self.classes.iter().map(|c| c.count.clone()).sum()
    }

    pub fn is_compressed(&self) -> bool {
        self.explicit.is_none()
    }
}

/// Occurrence table of every level-`(q+1)` parent word.
///
/// Returns compressed classes for any parent whose explicit list would
/// exceed [`OCCURRENCE_LIMIT`]; fails with a budget error only when even the
/// class list (one class per block) is larger than that limit.
pub fn enumerate_occurrences(model: &Model, q: usize) -> Result<Vec<OccurrenceTable>> {
    let child_len = model.level_len_u64(q)?;
    (1..=model.alphabet_size())
        .map(|j| {
            let parent = Letter::new(j, model.alphabet_size())?;
            let runs = model.block_runs(q, parent)?;
            let blocks: u64 = runs.iter().map(|r| r.blocks).sum();
            if blocks > OCCURRENCE_LIMIT {
                return Err(Error::Budget {
                    what: "occurrence classes",
                    needed: blocks.to_string(),
                    limit: OCCURRENCE_LIMIT,
                });
            }
            let mut classes = Vec::with_capacity(blocks as usize);
            for run in &runs {
                for b in run.first_block..run.first_block + run.blocks {
                    let depth = b * child_len;
                    classes.push(OccurrenceClass {
                        depth,
                        count: BigUint::one() << depth,
                        child: run.child,
                    });
                }
            }
            let total: BigUint = classes.iter().map(|c| c.count.clone()).sum();
            let explicit = if total <= BigUint::from(OCCURRENCE_LIMIT) {
                let mut items = Vec::with_capacity(total.to_usize().unwrap_or(0));
                for c in &classes {
                    for h in 0..c.count.to_u64().expect("bounded by limit") {
                        items.push(Occurrence {
                            parent_level: q + 1,
                            parent,
                            child: c.child,
                            depth: c.depth,
                            horizontal: h,
                        });
                    }
                }
                Some(items)
            } else {
                None
            };
            Ok(OccurrenceTable {
                q,
                parent,
                classes,
                explicit,
            })
        })
        .collect()
}

/// Tile count bookkeeping: `sum over classes of count * tiles(child patch)`
/// versus the parent patch's own tile count (`2^L - 1` with `L` its word length).
pub fn reconcile_tile_counts(model: &Model, table: &OccurrenceTable) -> Result<(BigUint, BigUint)> {
    let child_len = model.level_len_u64(table.q)?;
    let parent_len = model.level_len_u64(table.q + 1)?;
    let child_tiles = (BigUint::one() << child_len) - BigUint::one();
    let summed = table
        .classes
        .iter()
        .fold(BigUint::zero(), |acc, c| acc + &c.count * &child_tiles);
    let parent_tiles = (BigUint::one() << parent_len) - BigUint::one();
    Ok((summed, parent_tiles))
}
