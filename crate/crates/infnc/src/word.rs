//! Letters, words and formal linear combinations of words.
//!
//! A letter is a generator `x_i` or its transpose `x_i^t`; a word is a
//! monomial in those generators (the empty word is the unit). Transposition
//! reverses a word and flips every letter.

use crate::error::{Error, Result};
use num::{BigRational, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Rat = BigRational;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub index: usize,
    pub transposed: bool,
}

impl Letter {
    pub fn new(index: usize) -> Self {
        assert!(index >= 1);
        Letter {
            index,
            transposed: false,
        }
    }

    pub fn transposed(index: usize) -> Self {
        assert!(index >= 1);
        Letter {
            index,
            transposed: true,
        }
    }

    pub fn transpose(self) -> Self {
        Letter {
            index: self.index,
            transposed: !self.transposed,
        }
    }

    /// `"3"` or `"3t"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (digits, t) = match s.strip_suffix('t') {
            Some(d) => (d, true),
            None => (s, false),
        };
        let index: usize = digits
            .parse()
            .map_err(|_| Error::Parse(format!("bad letter {s:?}")))?;
        if index == 0 {
            return Err(Error::Parse("letter indices start at 1".into()));
        }
        Ok(Letter { index, transposed: t })
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.index, if self.transposed { "t" } else { "" })
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        Word(letters.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// The involution: reverse the word and flip every letter.
    pub fn transpose(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.transpose()).collect())
    }

    pub fn rotate_left(&self, k: usize) -> Word {
        let mut v = self.0.clone();
        let len = v.len().max(1);
        v.rotate_left(k % len);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Subword at the given 1-based positions, in the order given.
    pub fn subword(&self, positions: &[usize]) -> Word {
        Word(positions.iter().map(|&p| self.0[p - 1]).collect())
    }

    /// Space-separated letters: `"1 2t 1"`. Empty string is the unit.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        Ok(Word(
            s.split_whitespace()
                .map(Letter::parse)
                .collect::<Result<_>>()?,
        ))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word[{self}]")
    }
}

/// A formal linear combination of words with rational coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct WordPoly(BTreeMap<Word, Rat>);

impl WordPoly {
    pub fn zero() -> Self {
        WordPoly(BTreeMap::new())
    }

    pub fn unit() -> Self {
        WordPoly::from_word(Word::empty())
    }

    pub fn from_word(w: Word) -> Self {
        let mut m = BTreeMap::new();
        m.insert(w, Rat::from_integer(1.into()));
        WordPoly(m)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rat)> {
        self.0.iter()
    }

    pub fn add_term(&mut self, w: Word, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.0.entry(w.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&w);
        }
    }

    pub fn add(&self, other: &WordPoly) -> WordPoly {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> WordPoly {
        if c.is_zero() {
            return WordPoly::zero();
        }
        WordPoly(self.0.iter().map(|(w, v)| (w.clone(), v * c)).collect())
    }

    pub fn sub_scalar(&self, c: &Rat) -> WordPoly {
        let mut out = self.clone();
        out.add_term(Word::empty(), -c);
        out
    }

    pub fn mul(&self, other: &WordPoly) -> WordPoly {
        let mut out = WordPoly::zero();
        for (w1, c1) in self.terms() {
            for (w2, c2) in other.terms() {
                out.add_term(w1.concat(w2), c1 * c2);
            }
        }
        out
    }

    pub fn transpose(&self) -> WordPoly {
        WordPoly(
            self.0
                .iter()
                .map(|(w, c)| (w.transpose(), c.clone()))
                .collect(),
        )
    }

    /// Evaluate a word functional by linearity.
    pub fn eval<F>(&self, mut f: F) -> Result<Rat>
    where
        F: FnMut(&Word) -> Result<Rat>,
    {
        let mut total = Rat::zero();
        for (w, c) in self.terms() {
            total += f(w)? * c;
        }
        Ok(total)
    }
}

impl fmt::Debug for WordPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·[{w}]")?;
        }
        Ok(())
    }
}
