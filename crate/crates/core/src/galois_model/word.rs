//! Words in a free group on named generators.

use super::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub inv: bool,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }
}

/// A word, left to right. Not freely reduced unless [`Word::reduced`] is used.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Word {
        Word(Vec::new())
    }

    pub fn gen(i: usize) -> Word {
        Word(vec![Letter { gen: i, inv: false }])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn power(&self, k: usize) -> Word {
        Word(self.0.iter().copied().cycle().take(self.0.len() * k).collect())
    }

    /// Free reduction.
    pub fn reduced(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Parses tokens `name` or `name^k` (`k` a nonzero integer) separated by
    /// `*` or whitespace. The empty string and `1` are the identity.
    pub fn parse(s: &str, gens: &[String]) -> Result<Word, ModelError> {
        let mut out = Vec::new();
        for tok in s.split(|c: char| c == '*' || c.is_whitespace()) {
            if tok.is_empty() || tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.trim_start_matches('(')
                        .trim_end_matches(')')
                        .parse::<i64>()
                        .map_err(|_| ModelError::Parse(s.to_string()))?,
                ),
                None => (tok, 1),
            };
            let gen = gens
                .iter()
                .position(|g| g == name)
                .ok_or_else(|| ModelError::UnknownGenerator(name.to_string()))?;
            let l = Letter { gen, inv: exp < 0 };
            out.extend(std::iter::repeat_n(l, exp.unsigned_abs() as usize));
        }
        Ok(Word(out))
    }

    /// Text form with runs collapsed to powers; the identity prints as `1`.
    pub fn format(&self, gens: &[String]) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let l = self.0[i];
            let mut j = i;
            while j < self.0.len() && self.0[j] == l {
                j += 1;
            }
            let k = (j - i) as i64 * if l.inv { -1 } else { 1 };
            let name = &gens[l.gen];
            parts.push(if k == 1 {
                name.clone()
            } else {
                format!("{name}^{k}")
            });
            i = j;
        }
        parts.join("*")
    }
}
