use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::word::{Letter, Word};
use super::{Model, MATERIALIZE_LIMIT};
use crate::error::{Error, Result};

/// Level-`q` atlas word, either materialized or evaluated on demand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtlasWord {
    Materialized(Word),
    Lazy {
        model: Model,
        q: usize,
        index: Letter,
        len: BigUint,
    },
}

impl AtlasWord {
    pub fn len(&self) -> BigUint {
        match self {
            AtlasWord::Materialized(w) => BigUint::from(w.len()),
            AtlasWord::Lazy { len, .. } => len.clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len().is_zero()
    }

    pub fn letter_at(&self, pos: u128) -> Result<Letter> {
        match self {
            AtlasWord::Materialized(w) => w
                .letters()
                .get(pos as usize)
                .copied()
                .ok_or_else(|| Error::domain(format!("offset {pos} outside word of length {}", w.len()))),
            AtlasWord::Lazy { model, q, index, len } => {
                if BigUint::from(pos) >= *len {
                    return Err(Error::domain(format!("offset {pos} outside word of length {len}")));
                }
                Ok(model.atlas_letter(*q, *index, pos))
            }
        }
    }

    pub fn as_word(&self) -> Option<&Word> {
        match self {
            AtlasWord::Materialized(w) => Some(w),
            AtlasWord::Lazy { .. } => None,
        }
    }
}

/// The `r` words of level `q`, indexed by letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtlasLevel {
    pub q: usize,
    pub words: Vec<AtlasWord>,
    pub length: BigUint,
}

impl AtlasLevel {
    pub fn word(&self, i: Letter) -> &AtlasWord {
        &self.words[i.index()]
    }

    /// Explicit words; a budget error when the level is above the threshold.
    pub fn materialized(&self) -> Result<Vec<&Word>> {
        self.words
            .iter()
            .map(|w| {
                w.as_word().ok_or_else(|| Error::Budget {
                    what: "atlas word",
                    needed: self.length.to_string(),
                    limit: MATERIALIZE_LIMIT,
                })
            })
            .collect()
    }
}

/// Consecutive level-`q` blocks of one parent word sharing a child letter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRun {
    pub child: Letter,
    pub first_block: u64,
    pub blocks: u64,
}

/// A window cut into level-`q` blocks, each named by its atlas word index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub level: usize,
    pub blocks: Vec<(i64, Letter)>,
}

impl Model {
    pub(crate) fn atlas_letter(&self, q: usize, i: Letter, pos: u128) -> Letter {
        match self {
            Model::Toeplitz(t) => t.atlas_letter(q, i, pos),
            Model::Substitution(s) => s.power_letter(q, i, pos),
        }
    }

    /// Block structure of the level-`(q+1)` word `parent` in terms of
    /// level-`q` words, in reading order.
    pub fn block_runs(&self, q: usize, parent: Letter) -> Result<Vec<BlockRun>> {
        self.check_letter(parent)?;
        let runs = match self {
            Model::Substitution(s) => s
                .image(parent)
                .letters()
                .iter()
                .enumerate()
                .map(|(b, &child)| BlockRun {
                    child,
                    first_block: b as u64,
                    blocks: 1,
                })
                .collect(),
            Model::Toeplitz(t) => {
                // level q+1 word j = p_{q,s} (p_{q,j})^{m} p_{q,s} with s = s_{q+1}
                let edge = t.step_color(q + 1);
                let middle = if q == 0 {
                    1
                } else {
                    3u64.checked_pow(q as u32).ok_or_else(|| Error::Budget {
                        what: "blocks per parent",
                        needed: format!("3^{q}"),
                        limit: u64::MAX,
                    })? - 2
                };
                vec![
                    BlockRun {
                        child: edge,
                        first_block: 0,
                        blocks: 1,
                    },
                    BlockRun {
                        child: parent,
                        first_block: 1,
                        blocks: middle,
                    },
                    BlockRun {
                        child: edge,
                        first_block: middle + 1,
                        blocks: 1,
                    },
                ]
            }
        };
        Ok(runs)
    }

    fn check_letter(&self, l: Letter) -> Result<()> {
        Letter::new(l.value(), self.alphabet_size()).map(|_| ())
    }

    /// The `r` words of level `q`; words longer than the materialization
    /// threshold come back as lazy handles.
    pub fn atlas_words(&self, q: usize) -> Result<AtlasLevel> {
        let length = self.level_len(q)?;
        let r = self.alphabet_size();
        let letters: Vec<Letter> = (1..=r).map(Letter::raw).collect();
        if length > BigUint::from(MATERIALIZE_LIMIT) {
            let words = letters
                .into_iter()
                .map(|index| AtlasWord::Lazy {
                    model: self.clone(),
                    q,
                    index,
                    len: length.clone(),
                })
                .collect();
            return Ok(AtlasLevel { q, words, length });
        }
        // build bottom-up from the letters
        let mut level: Vec<Word> = letters.iter().map(|&l| Word::new(vec![l])).collect();
        for k in 0..q {
            let next = letters
                .iter()
                .map(|&j| {
                    let runs = self.block_runs(k, j)?;
                    let mut out = Vec::new();
                    for run in runs {
                        for _ in 0..run.blocks {
                            out.extend_from_slice(level[run.child.index()].letters());
                        }
                    }
                    Ok(Word::new(out))
                })
                .collect::<Result<Vec<_>>>()?;
            level = next;
        }
        Ok(AtlasLevel {
            q,
            words: level.into_iter().map(AtlasWord::Materialized).collect(),
            length,
        })
    }

    /// Cuts the aligned window `[from, to)` into level-`q` blocks.
    pub fn block_decompose(&self, from: i64, to: i64, q: usize) -> Result<BlockDecomposition> {
        let len = self.level_len(q)?;
        let block_len = len
            .to_i64()
            .filter(|&l| l <= MATERIALIZE_LIMIT as i64)
            .ok_or_else(|| Error::Budget {
                what: "block length",
                needed: len.to_string(),
                limit: MATERIALIZE_LIMIT,
            })?;
        if to <= from || from.rem_euclid(block_len) != 0 || to.rem_euclid(block_len) != 0 {
            return Err(Error::Alignment {
                from,
                to,
                block_len: block_len as u64,
            });
        }
        let window = self.window(from, to)?;
        let atlas = self.atlas_words(q)?;
        let words = atlas.materialized()?;
        let blocks = window
            .letters()
            .chunks(block_len as usize)
            .enumerate()
            .map(|(b, chunk)| {
                let offset = from + b as i64 * block_len;
                words
                    .iter()
                    .position(|w| w.letters() == chunk)
                    .map(|i| (offset, Letter::from_index(i)))
                    .ok_or_else(|| {
                        Error::model(format!(
                            "invariant violation: block at {offset} matches no level-{q} atlas word"
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockDecomposition { level: q, blocks })
    }

    /// Letter multiplicities of the level-`q` word `i`, by the level
    /// recursion (no word is materialized).
    pub fn letter_counts(&self, q: usize, i: Letter) -> Result<Vec<BigUint>> {
        self.check_letter(i)?;
        Ok(self.letter_count_table(q)?.swap_remove(i.index()))
    }

    /// `table[j][l]` = occurrences of letter `l` in the level-`q` word `j`.
    pub fn letter_count_table(&self, q: usize) -> Result<Vec<Vec<BigUint>>> {
        let r = self.alphabet_size() as usize;
        let mut table: Vec<Vec<BigUint>> = (0..r)
            .map(|j| {
                (0..r)
                    .map(|l| if l == j { BigUint::one() } else { BigUint::zero() })
                    .collect()
            })
            .collect();
        for k in 0..q {
            let mut next = vec![vec![BigUint::zero(); r]; r];
            for (j, row) in next.iter_mut().enumerate() {
                for run in self.block_runs(k, Letter::from_index(j))? {
                    let n = BigUint::from(run.blocks);
                    for (acc, c) in row.iter_mut().zip(&table[run.child.index()]) {
                        *acc += &n * c;
                    }
                }
            }
            table = next;
        }
        Ok(table)
    }
}
