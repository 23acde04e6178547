//! Distributions `(τ, τ′)` as exact-valued functionals on words up to a
//! degree bound, with canonical word keys.
//!
//! Canonicalization folds in the declared symmetries: tracial lookups take
//! the minimal cyclic rotation, transpose-symmetric lookups also minimize
//! over the transposed word, and letters declared symmetric (`x_i^t = x_i`)
//! drop their transpose flag. Stored keys must already be canonical; lookups
//! canonicalize first.
//!
//! JSON schema:
//! `{"degree": 6, "tracial": true, "transpose_symmetric": true,
//!   "symmetric_letters": [1], "tau": {"1 1": "1"}, "tau_prime": {"1 1": "1"}}`.
//! Word keys are space-separated letters (`<index>` or `<index>t`); values
//! are `"p/q"` or integer strings. `symmetric_letters` is optional.

use crate::error::{Error, Result};
use crate::word::{Letter, Rat, Word};
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::str::FromStr;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymmetryFlags {
    pub tracial: bool,
    pub transpose_symmetric: bool,
    pub symmetric_letters: BTreeSet<usize>,
}

impl SymmetryFlags {
    pub fn tracial_symmetric() -> Self {
        SymmetryFlags {
            tracial: true,
            transpose_symmetric: true,
            symmetric_letters: BTreeSet::new(),
        }
    }

    pub fn with_symmetric_letters(letters: impl IntoIterator<Item = usize>) -> Self {
        SymmetryFlags {
            tracial: true,
            transpose_symmetric: true,
            symmetric_letters: letters.into_iter().collect(),
        }
    }

    fn normalize_letters(&self, w: &Word) -> Word {
        Word(
            w.letters()
                .iter()
                .map(|l| {
                    if self.symmetric_letters.contains(&l.index) {
                        Letter::new(l.index)
                    } else {
                        *l
                    }
                })
                .collect(),
        )
    }
}

/// Minimal representative of the word under the declared symmetries.
pub fn canonicalize(word: &Word, flags: &SymmetryFlags) -> Word {
    let w = flags.normalize_letters(word);
    if w.is_empty() {
        return w;
    }
    let mut best = w.clone();
    let mut consider = |cand: Word| {
        if cand < best {
            best = cand;
        }
    };
    if flags.tracial {
        for k in 1..w.len() {
            consider(w.rotate_left(k));
        }
    }
    if flags.transpose_symmetric {
        let t = flags.normalize_letters(&w.transpose());
        if flags.tracial {
            for k in 0..t.len() {
                consider(t.rotate_left(k));
            }
        } else {
            consider(t);
        }
    }
    best
}

/// The pair `(τ, τ′)` on words of length at most `degree`.
#[derive(Clone, Debug)]
pub struct Distribution {
    degree: usize,
    flags: SymmetryFlags,
    tau: HashMap<Word, Rat>,
    tau_prime: HashMap<Word, Rat>,
    /// Missing canonical keys read as 0 instead of erroring.
    sparse: bool,
}

impl Distribution {
    pub fn new(degree: usize, flags: SymmetryFlags, sparse: bool) -> Self {
        Distribution {
            degree,
            flags,
            tau: HashMap::new(),
            tau_prime: HashMap::new(),
            sparse,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn flags(&self) -> &SymmetryFlags {
        &self.flags
    }

    pub fn is_sparse(&self) -> bool {
        self.sparse
    }

    pub fn set_sparse(&mut self, sparse: bool) {
        self.sparse = sparse;
    }

    pub fn canonicalize(&self, w: &Word) -> Word {
        canonicalize(w, &self.flags)
    }

    fn check_key(&self, w: &Word) -> Result<()> {
        if w.is_empty() {
            return Err(Error::Invalid(
                "the empty word is fixed: tau(1) = 1, tau'(1) = 0".into(),
            ));
        }
        if w.len() > self.degree {
            return Err(Error::DegreeExceeded {
                degree: w.len(),
                bound: self.degree,
            });
        }
        let canon = self.canonicalize(w);
        if &canon != w {
            return Err(Error::NonCanonicalKey(w.to_string(), canon.to_string()));
        }
        Ok(())
    }

    pub fn insert_tau(&mut self, w: Word, v: Rat) -> Result<()> {
        self.check_key(&w)?;
        self.tau.insert(w, v);
        Ok(())
    }

    pub fn insert_tau_prime(&mut self, w: Word, v: Rat) -> Result<()> {
        self.check_key(&w)?;
        self.tau_prime.insert(w, v);
        Ok(())
    }

    fn lookup(&self, table: &HashMap<Word, Rat>, w: &Word, empty: Rat) -> Result<Rat> {
        if w.is_empty() {
            return Ok(empty);
        }
        if w.len() > self.degree {
            return Err(Error::DegreeExceeded {
                degree: w.len(),
                bound: self.degree,
            });
        }
        let canon = self.canonicalize(w);
        match table.get(&canon) {
            Some(v) => Ok(v.clone()),
            None if self.sparse => Ok(Rat::zero()),
            None => Err(Error::MissingMoment(canon.to_string())),
        }
    }

    pub fn tau(&self, w: &Word) -> Result<Rat> {
        self.lookup(&self.tau, w, Rat::one())
    }

    pub fn tau_prime(&self, w: &Word) -> Result<Rat> {
        self.lookup(&self.tau_prime, w, Rat::zero())
    }

    /// Letter indices mentioned anywhere in the tables.
    pub fn letter_indices(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for w in self.tau.keys().chain(self.tau_prime.keys()) {
            out.extend(w.letters().iter().map(|l| l.index));
        }
        out.extend(self.flags.symmetric_letters.iter().copied());
        out
    }

    /// All distinct canonical words of length 1..=degree over the given
    /// letters (transposed variants included for non-symmetric letters).
    pub fn canonical_words(&self, letters: &BTreeSet<usize>) -> Vec<Word> {
        let mut alphabet: Vec<Letter> = Vec::new();
        for &i in letters {
            alphabet.push(Letter::new(i));
            if !self.flags.symmetric_letters.contains(&i) {
                alphabet.push(Letter::transposed(i));
            }
        }
        let mut seen = BTreeSet::new();
        let mut current: Vec<Letter> = Vec::new();
        fn rec(
            alphabet: &[Letter],
            degree: usize,
            flags: &SymmetryFlags,
            current: &mut Vec<Letter>,
            seen: &mut BTreeSet<Word>,
        ) {
            if !current.is_empty() {
                seen.insert(canonicalize(&Word(current.clone()), flags));
            }
            if current.len() == degree {
                return;
            }
            for &l in alphabet {
                current.push(l);
                rec(alphabet, degree, flags, current, seen);
                current.pop();
            }
        }
        rec(&alphabet, self.degree, &self.flags, &mut current, &mut seen);
        seen.into_iter().collect()
    }

    pub fn to_json(&self) -> DistributionJson {
        let to_map = |m: &HashMap<Word, Rat>| -> BTreeMap<String, String> {
            m.iter()
                .map(|(w, v)| (w.to_string(), v.to_string()))
                .collect()
        };
        DistributionJson {
            degree: self.degree,
            tracial: self.flags.tracial,
            transpose_symmetric: self.flags.transpose_symmetric,
            symmetric_letters: self.flags.symmetric_letters.iter().copied().collect(),
            tau: to_map(&self.tau),
            tau_prime: to_map(&self.tau_prime),
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    pub fn load(path: &std::path::Path, sparse: bool) -> Result<Self> {
        let raw: DistributionJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        raw.into_distribution(sparse)
    }
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DistributionJson {
    pub degree: usize,
    pub tracial: bool,
    pub transpose_symmetric: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symmetric_letters: Vec<usize>,
    pub tau: BTreeMap<String, String>,
    pub tau_prime: BTreeMap<String, String>,
}

pub fn parse_rational(s: &str) -> Result<Rat> {
    Rat::from_str(s.trim()).map_err(|_| Error::Parse(format!("bad rational {s:?}")))
}

impl DistributionJson {
    pub fn into_distribution(self, sparse: bool) -> Result<Distribution> {
        let flags = SymmetryFlags {
            tracial: self.tracial,
            transpose_symmetric: self.transpose_symmetric,
            symmetric_letters: self.symmetric_letters.into_iter().collect(),
        };
        let mut dist = Distribution::new(self.degree, flags, sparse);
        for (k, v) in &self.tau {
            dist.insert_tau(Word::parse(k)?, parse_rational(v)?)?;
        }
        for (k, v) in &self.tau_prime {
            dist.insert_tau_prime(Word::parse(k)?, parse_rational(v)?)?;
        }
        Ok(dist)
    }
}

/// GOE limit: a single symmetric semicircular letter with the annular-pairing
/// infinitesimal law `τ′(s²)=1, τ′(s⁴)=5, τ′(s⁶)=22`.
pub fn goe_distribution(degree: usize) -> Result<Distribution> {
    if degree > 6 {
        return Err(Error::Invalid(
            "GOE moment data is tabulated to degree 6".into(),
        ));
    }
    let mut d = Distribution::new(degree, SymmetryFlags::with_symmetric_letters([1]), false);
    let s = Letter::new(1);
    let moments = [1, 0, 1, 0, 2, 0, 5]; // Catalan on even degrees
    let inf = [0, 0, 1, 0, 5, 0, 22]; // annular pairing counts
    for len in 1..=degree {
        let w = Word(vec![s; len]);
        d.insert_tau(w.clone(), Rat::from_integer(moments[len].into()))?;
        d.insert_tau_prime(w, Rat::from_integer(inf[len].into()))?;
    }
    Ok(d)
}

/// Square of the GOE semicircular: free Poisson moments (Catalan) with
/// `τ′(x^k)` equal to the annular pairing count at `2k`.
pub fn goe_square_distribution(degree: usize) -> Result<Distribution> {
    if degree > 4 {
        return Err(Error::Invalid(
            "GOE-square moment data is tabulated to degree 4".into(),
        ));
    }
    let mut d = Distribution::new(degree, SymmetryFlags::with_symmetric_letters([1]), false);
    let x = Letter::new(1);
    let moments = [1, 1, 2, 5, 14]; // Catalan numbers
    let inf = [0, 1, 5, 22, 93]; // pairings of S_NC^delta(2k, -2k)
    for len in 1..=degree {
        let w = Word(vec![x; len]);
        d.insert_tau(w.clone(), Rat::from_integer(moments[len].into()))?;
        d.insert_tau_prime(w, Rat::from_integer(inf[len].into()))?;
    }
    Ok(d)
}

/// Real Wishart limit with aspect ratio `c = 1` and `c′ = 0`, to degree 2:
/// `τ(y)=1, τ(y²)=2, τ′(y)=0, τ′(y²)=1` (from `E[tr W] = 1` and
/// `E[tr W²] = 2 + 1/N` exactly).
pub fn wishart_c1_distribution() -> Result<Distribution> {
    let mut d = Distribution::new(2, SymmetryFlags::with_symmetric_letters([1]), false);
    let y = Letter::new(1);
    d.insert_tau(Word(vec![y]), Rat::one())?;
    d.insert_tau(Word(vec![y; 2]), Rat::from_integer(2.into()))?;
    d.insert_tau_prime(Word(vec![y]), Rat::zero())?;
    d.insert_tau_prime(Word(vec![y; 2]), Rat::one())?;
    Ok(d)
}
