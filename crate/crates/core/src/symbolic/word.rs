use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A letter of the alphabet `{1, ..., r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(u32);

impl Letter {
    pub fn new(value: u32, r: u32) -> Result<Letter> {
        if value == 0 || value > r {
            return Err(Error::domain(format!("letter {value} outside alphabet 1..={r}")));
        }
        Ok(Letter(value))
    }

    /// Unchecked constructor for values already known to lie in the alphabet.
    pub(crate) const fn raw(value: u32) -> Letter {
        Letter(value)
    }

    pub fn value(self) -> u32 {
        self.0
    }

    /// Zero-based index, convenient for vectors indexed by letter.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Letter {
        Letter(i as u32 + 1)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Word {
        Word(letters)
    }

    /// Parses `"112"` (digits) or `"1,12,3"` (comma separated).
    pub fn parse(s: &str, r: u32) -> Result<Word> {
        let s = s.trim();
        let values: Vec<u32> = if s.contains(',') {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|e| Error::domain(format!("bad letter {t:?}: {e}")))
                })
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).ok_or_else(|| Error::domain(format!("bad letter {c:?}"))))
                .collect::<Result<_>>()?
        };
        if values.is_empty() {
            return Err(Error::domain("empty word"));
        }
        values
            .into_iter()
            .map(|v| Letter::new(v, r))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> Vec<u32> {
        self.0.iter().map(|l| l.0).collect()
    }

    pub fn concat(parts: &[&Word]) -> Word {
        Word(parts.iter().flat_map(|w| w.0.iter().copied()).collect())
    }

    /// Brute-force count of each letter `1..=r`.
    pub fn count_letters(&self, r: u32) -> Vec<u64> {
        let mut counts = vec![0u64; r as usize];
        for l in &self.0 {
            counts[l.index()] += 1;
        }
        counts
    }

    /// Digits when every letter is `<= 9`, comma separated otherwise.
    pub fn to_string_for_alphabet(&self, r: u32) -> String {
        if r <= 9 {
            self.0.iter().map(|l| char::from(b'0' + l.0 as u8)).collect()
        } else {
            self.0.iter().map(|l| l.0.to_string()).collect::<Vec<_>>().join(",")
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0.iter().map(|l| l.0).max().unwrap_or(1);
        f.write_str(&self.to_string_for_alphabet(r))
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

/// JSON shape of a window: `{"from":int,"to":int,"letters":[int]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowJson {
    pub from: i64,
    pub to: i64,
    pub letters: Vec<u32>,
}

impl WindowJson {
    pub fn new(from: i64, to: i64, word: &Word) -> Self {
        WindowJson {
            from,
            to,
            letters: word.values(),
        }
    }
}
