use serde::{Deserialize, Serialize};

use super::word::{Letter, Word};
use super::MATERIALIZE_LIMIT;
use crate::error::{Error, Result};

/// Constant-length substitution over `{1, ..., r}`; `images[i]` is the image
/// of letter `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstitutionRule {
    images: Vec<Word>,
}

impl SubstitutionRule {
    pub fn new(images: Vec<Word>) -> Result<Self> {
        let r = images.len() as u32;
        if r == 0 {
            return Err(Error::model("substitution needs at least one letter"));
        }
        let len = images[0].len();
        if len == 0 {
            return Err(Error::model("substitution images must be nonempty"));
        }
        for (i, w) in images.iter().enumerate() {
            if w.len() != len {
                return Err(Error::model(format!(
                    "image of {} has length {}, expected constant length {len}",
                    i + 1,
                    w.len()
                )));
            }
            if let Some(bad) = w.letters().iter().find(|l| l.value() > r) {
                return Err(Error::model(format!(
                    "image of {} uses letter {bad} outside 1..={r}",
                    i + 1
                )));
            }
        }
        Ok(SubstitutionRule { images })
    }

    /// `1 -> 112`, `2 -> 122`.
    pub fn standard() -> Self {
        let w = |v: &[u32]| Word::new(v.iter().map(|&x| Letter::raw(x)).collect());
        SubstitutionRule {
            images: vec![w(&[1, 1, 2]), w(&[1, 2, 2])],
        }
    }

    pub fn alphabet_size(&self) -> u32 {
        self.images.len() as u32
    }

    pub fn image_len(&self) -> usize {
        self.images[0].len()
    }

    pub fn image(&self, l: Letter) -> &Word {
        &self.images[l.index()]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    /// `rule^n(word)` with letterwise concatenation.
    pub fn apply(&self, word: &Word, n: u32) -> Result<Word> {
        let growth = (self.image_len() as u128).checked_pow(n);
        let needed = growth.and_then(|g| g.checked_mul(word.len() as u128));
        match needed {
            Some(size) if size <= MATERIALIZE_LIMIT as u128 => {}
            other => {
                return Err(Error::Budget {
                    what: "substitution image",
                    needed: other.map_or_else(|| "overflow".to_string(), |s| s.to_string()),
                    limit: MATERIALIZE_LIMIT,
                })
            }
        }
        let mut cur = word.clone();
        for _ in 0..n {
            let letters = cur
                .letters()
                .iter()
                .flat_map(|&l| self.image(l).letters().iter().copied())
                .collect();
            cur = Word::new(letters);
        }
        Ok(cur)
    }

    /// Seeds of the two half-infinite limits: the right half grows from
    /// letter 1, the left half from letter 2 (letter 1 on a one-letter
    /// alphabet).
    fn seeds(&self) -> (Letter, Letter) {
        let left = if self.alphabet_size() >= 2 { 2 } else { 1 };
        (Letter::raw(left), Letter::raw(1))
    }

    fn check_fixed_point(&self) -> Result<(Letter, Letter)> {
        let (left, right) = self.seeds();
        if self.image(right).letters()[0] != right {
            return Err(Error::model(format!("image of {right} does not start with {right}")));
        }
        if *self.image(left).letters().last().expect("nonempty") != left {
            return Err(Error::model(format!("image of {left} does not end with {left}")));
        }
        Ok((left, right))
    }

    /// Letter at position `q` of the bi-infinite fixed point
    /// `lim rule^n(2) . lim rule^n(1)`, the dot sitting between `-1` and `0`.
    pub fn fixed_letter(&self, q: i64) -> Result<Letter> {
        let (left, right) = self.check_fixed_point()?;
        let l = self.image_len() as u128;
        let (mut letter, mut pos, target) = if q >= 0 {
            (right, q as u128, q as u128 + 1)
        } else {
            (left, 0, q.unsigned_abs() as u128)
        };
        // smallest n with l^n >= target (and l^n > q for the right half)
        let mut n = 0u32;
        let mut span: u128 = 1;
        while span < target {
            if l == 1 {
                break;
            }
            span *= l;
            n += 1;
        }
        if q < 0 {
            pos = span - target;
        }
        if l == 1 {
            return Ok(letter);
        }
        while n > 0 {
            span /= l;
            let idx = (pos / span) as usize;
            letter = self.image(letter).letters()[idx];
            pos %= span;
            n -= 1;
        }
        Ok(letter)
    }

    /// Letter at offset `pos` of `rule^q(i)`.
    pub(crate) fn power_letter(&self, q: usize, i: Letter, pos: u128) -> Letter {
        let l = self.image_len() as u128;
        let mut span = l.pow(q as u32);
        let mut letter = i;
        let mut pos = pos;
        for _ in 0..q {
            span /= l;
            letter = self.image(letter).letters()[(pos / span) as usize];
            pos %= span;
        }
        letter
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn iterated_images() {
        let s = SubstitutionRule::standard();
        assert_eq!(s.apply(&w("1"), 1).unwrap(), w("112"));
        assert_eq!(s.apply(&w("1"), 2).unwrap(), w("112112122"));
        assert_eq!(s.apply(&w("2"), 0).unwrap(), w("2"));
        assert_eq!(s.apply(&w("2"), 2).unwrap(), w("112122122"));
    }

    #[test]
    fn budget_is_enforced() {
        let s = SubstitutionRule::standard();
        assert!(matches!(s.apply(&w("1"), 13), Err(Error::Budget { .. })));
        assert!(s.apply(&w("1"), 12).is_ok());
    }

    #[test]
    fn fixed_point_window() {
        let s = SubstitutionRule::standard();
        let got: Vec<u32> = (-3..3).map(|q| s.fixed_letter(q).unwrap().value()).collect();
        assert_eq!(got, vec![1, 2, 2, 1, 1, 2]);
        assert_eq!(s.fixed_letter(0).unwrap().value(), 1);
        assert_eq!(s.fixed_letter(-1).unwrap().value(), 2);
    }

    #[test]
    fn fixed_point_matches_materialized_limits() {
        let s = SubstitutionRule::standard();
        let right = s.apply(&w("1"), 6).unwrap();
        let left = s.apply(&w("2"), 6).unwrap();
        for (q, l) in right.letters().iter().enumerate() {
            assert_eq!(s.fixed_letter(q as i64).unwrap(), *l);
        }
        let n = left.len();
        for (k, l) in left.letters().iter().enumerate() {
            assert_eq!(s.fixed_letter(k as i64 - n as i64).unwrap(), *l);
        }
    }

    #[test]
    fn rejects_rules_without_fixed_point() {
        let s = SubstitutionRule::new(vec![w("212"), w("122")]).unwrap();
        assert!(matches!(s.fixed_letter(0), Err(Error::Model(_))));
        let s = SubstitutionRule::new(vec![w("112"), w("121")]).unwrap();
        assert!(matches!(s.fixed_letter(-1), Err(Error::Model(_))));
    }

    #[test]
    fn rejects_non_constant_length() {
        assert!(SubstitutionRule::new(vec![w("11"), w("122")]).is_err());
        assert!(SubstitutionRule::new(vec![Word::parse("113", 3).unwrap(), w("122")]).is_err());
    }

    #[test]
    fn power_letter_agrees_with_apply() {
        let s = SubstitutionRule::standard();
        for q in 0..5 {
            for i in [Letter::raw(1), Letter::raw(2)] {
                let word = s.apply(&Word::new(vec![i]), q as u32).unwrap();
                for (pos, l) in word.letters().iter().enumerate() {
                    assert_eq!(s.power_letter(q, i, pos as u128), *l);
                }
            }
        }
    }
}
