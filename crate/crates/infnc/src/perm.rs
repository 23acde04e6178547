//! Permutations of `[n] = {1,..,n}` and of `[±n] = {±1,..,±n}`.
//!
//! The signed domain carries the sign structure directly: points are nonzero
//! integers `k` with `|k| <= n`. A permutation of `[n]` embeds into `[±n]` by
//! acting trivially on the negative points; the embedding is always explicit
//! ([`Permutation::embed`]).
//!
//! Cycle output is canonical: each cycle is rotated so that the point with
//! the smallest absolute value (positive preferred on ties) comes first, and
//! cycles are sorted by that leader. This keeps golden output stable.

use crate::error::{Error, Result};
use std::fmt;

/// Ordering key for cycle leaders: by absolute value, positive before negative.
fn leader_key(x: i64) -> (i64, bool) {
    (x.abs(), x < 0)
}

fn canonical_cycles(mut cycles: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    for cyc in cycles.iter_mut() {
        let lead = (0..cyc.len())
            .min_by_key(|&i| leader_key(cyc[i]))
            .unwrap();
        cyc.rotate_left(lead);
    }
    cycles.sort_by_key(|c| leader_key(c[0]));
    cycles
}

fn format_cycles(cycles: &[Vec<i64>]) -> String {
    let mut s = String::new();
    for cyc in cycles {
        s.push('(');
        for (i, x) in cyc.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&x.to_string());
        }
        s.push(')');
    }
    s
}

fn parse_cycle_str(s: &str) -> Result<Vec<Vec<i64>>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if !s.starts_with('(') || !s.ends_with(')') {
        return Err(Error::Parse(format!("expected cycle notation, got {s:?}")));
    }
    let mut cycles = Vec::new();
    for part in s[1..s.len() - 1].split(")(") {
        let cyc: Vec<i64> = part
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad cycle entry {t:?}")))
            })
            .collect::<Result<_>>()?;
        if cyc.is_empty() {
            return Err(Error::Parse("empty cycle".into()));
        }
        cycles.push(cyc);
    }
    Ok(cycles)
}

/// A permutation of `[n] = {1,..,n}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>, // images[i] = image of i+1, 1-based values
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n).collect(),
        }
    }

    /// Long cycle `(1,2,..,n)`.
    pub fn gamma(n: usize) -> Self {
        assert!(n >= 1);
        Permutation {
            images: (1..=n).map(|k| k % n + 1).collect(),
        }
    }

    /// Interval permutation `(1,..,m1)(m1+1,..,m1+m2)..` for parts `m1,..,mr`.
    pub fn gamma_vec(parts: &[usize]) -> Self {
        assert!(!parts.is_empty() && parts.iter().all(|&m| m >= 1));
        let n: usize = parts.iter().sum();
        let mut images = vec![0usize; n];
        let mut start = 1usize;
        for &m in parts {
            for k in start..start + m {
                images[k - 1] = if k + 1 < start + m { k + 1 } else { start };
            }
            start += m;
        }
        Permutation { images }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v < 1 || v > n || seen[v - 1] {
                return Err(Error::InvalidPermutation(format!(
                    "images {:?} are not a bijection of [{}]",
                    images, n
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Permutation { images })
    }

    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (1..=n).collect();
        let mut seen = vec![false; n];
        for cyc in cycles {
            for (i, &x) in cyc.iter().enumerate() {
                if x < 1 || x > n {
                    return Err(Error::InvalidPermutation(format!(
                        "cycle entry {x} outside [{n}]"
                    )));
                }
                if seen[x - 1] {
                    return Err(Error::InvalidPermutation(format!("repeated entry {x}")));
                }
                seen[x - 1] = true;
                images[x - 1] = cyc[(i + 1) % cyc.len()];
            }
        }
        Ok(Permutation { images })
    }

    pub fn parse(s: &str, n: usize) -> Result<Self> {
        let cycles = parse_cycle_str(s)?;
        let cycles: Vec<Vec<usize>> = cycles
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .map(|x| {
                        if x >= 1 {
                            Ok(x as usize)
                        } else {
                            Err(Error::Parse(format!("negative entry {x} in disc cycle")))
                        }
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Permutation::from_cycles(n, &cycles)
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.images[k - 1]
    }

    /// `(self ∘ other)(k) = self(other(k))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch(format!(
                "compose on [{}] vs [{}]",
                self.n(),
                other.n()
            )));
        }
        Ok(Permutation {
            images: (1..=self.n()).map(|k| self.apply(other.apply(k))).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0usize; self.n()];
        for k in 1..=self.n() {
            images[self.apply(k) - 1] = k;
        }
        Permutation { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn cycles(&self) -> Vec<Vec<i64>> {
        let mut seen = vec![false; self.n()];
        let mut cycles = Vec::new();
        for start in 1..=self.n() {
            if seen[start - 1] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = start;
            while !seen[x - 1] {
                seen[x - 1] = true;
                cyc.push(x as i64);
                x = self.apply(x);
            }
            cycles.push(cyc);
        }
        canonical_cycles(cycles)
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// Cayley length `|p| = n − #cycles(p)`.
    pub fn length(&self) -> usize {
        self.n() - self.cycle_count()
    }

    /// Embed into `[±n]`, acting trivially on the negative points.
    pub fn embed(&self) -> SignedPermutation {
        let n = self.n();
        let mut sp = SignedPermutation::identity(n);
        for k in 1..=n {
            sp.set(k as i64, self.apply(k) as i64);
        }
        sp
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_cycles(&self.cycles()))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{}]{}", self.n(), self)
    }
}

/// A permutation of `[±n] = {±1,..,±n}` (index 0 is not a point).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    n: usize,
    images: Vec<i64>, // slot k-1 for point k>0, slot n+|k|-1 for point k<0
}

impl SignedPermutation {
    fn slot(&self, k: i64) -> usize {
        debug_assert!(k != 0 && k.unsigned_abs() as usize <= self.n);
        if k > 0 {
            (k - 1) as usize
        } else {
            self.n + (-k - 1) as usize
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1);
        let mut images = Vec::with_capacity(2 * n);
        images.extend((1..=n as i64).chain((1..=n as i64).map(|k| -k)));
        SignedPermutation { n, images }
    }

    /// The involution `δ(k) = −k`.
    pub fn delta(n: usize) -> Self {
        let mut p = SignedPermutation::identity(n);
        for k in 1..=n as i64 {
            p.set(k, -k);
            p.set(-k, k);
        }
        p
    }

    /// `γ_n = (1,..,n)` embedded, acting trivially on the negative points.
    pub fn gamma(n: usize) -> Self {
        Permutation::gamma(n).embed()
    }

    /// `γ_n δ γ_n⁻¹ δ = (1,..,n)(−n,..,−1)`.
    pub fn gamma_tilde(n: usize) -> Self {
        let gamma = Self::gamma(n);
        let delta = Self::delta(n);
        gamma
            .compose(&delta)
            .and_then(|p| p.compose(&gamma.inverse()))
            .and_then(|p| p.compose(&delta))
            .expect("equal sizes")
    }

    fn set(&mut self, k: i64, v: i64) {
        let s = self.slot(k);
        self.images[s] = v;
    }

    pub fn from_images(n: usize, map: impl Fn(i64) -> i64) -> Result<Self> {
        let mut p = SignedPermutation::identity(n);
        for k in p.domain() {
            let v = map(k);
            if v == 0 || v.unsigned_abs() as usize > n {
                return Err(Error::InvalidPermutation(format!(
                    "image {v} of {k} outside [±{n}]"
                )));
            }
            p.set(k, v);
        }
        // bijectivity
        let mut seen = vec![false; 2 * n];
        for k in p.domain() {
            let s = p.slot(p.apply(k));
            if seen[s] {
                return Err(Error::InvalidPermutation(
                    "images are not a bijection".into(),
                ));
            }
            seen[s] = true;
        }
        Ok(p)
    }

    pub fn from_cycles(n: usize, cycles: &[Vec<i64>]) -> Result<Self> {
        let mut p = SignedPermutation::identity(n);
        let mut seen = vec![false; 2 * n];
        for cyc in cycles {
            for (i, &x) in cyc.iter().enumerate() {
                if x == 0 || x.unsigned_abs() as usize > n {
                    return Err(Error::InvalidPermutation(format!(
                        "cycle entry {x} outside [±{n}]"
                    )));
                }
                let s = p.slot(x);
                if seen[s] {
                    return Err(Error::InvalidPermutation(format!("repeated entry {x}")));
                }
                seen[s] = true;
                p.set(x, cyc[(i + 1) % cyc.len()]);
            }
        }
        Ok(p)
    }

    /// Parse cycle notation like `"(1,-4)(2,3)"`; fixed points may be omitted.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        SignedPermutation::from_cycles(n, &parse_cycle_str(s)?)
    }

    /// Parse with `n` inferred from the largest absolute entry.
    pub fn parse_infer(s: &str) -> Result<Self> {
        let cycles = parse_cycle_str(s)?;
        let n = cycles
            .iter()
            .flatten()
            .map(|x| x.unsigned_abs() as usize)
            .max()
            .ok_or_else(|| Error::Parse("empty permutation".into()))?;
        SignedPermutation::from_cycles(n, &cycles)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// All `2n` points, positives first.
    pub fn domain(&self) -> impl Iterator<Item = i64> {
        let n = self.n as i64;
        (1..=n).chain((1..=n).map(|k| -k))
    }

    pub fn apply(&self, k: i64) -> i64 {
        self.images[self.slot(k)]
    }

    pub fn compose(&self, other: &SignedPermutation) -> Result<SignedPermutation> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(format!(
                "compose on [±{}] vs [±{}]",
                self.n, other.n
            )));
        }
        let mut p = SignedPermutation::identity(self.n);
        for k in self.domain() {
            p.set(k, self.apply(other.apply(k)));
        }
        Ok(p)
    }

    pub fn inverse(&self) -> SignedPermutation {
        let mut p = SignedPermutation::identity(self.n);
        for k in self.domain() {
            p.set(self.apply(k), k);
        }
        p
    }

    pub fn is_identity(&self) -> bool {
        self.domain().all(|k| self.apply(k) == k)
    }

    /// `δ p δ`.
    pub fn conjugate_by_delta(&self) -> SignedPermutation {
        let delta = SignedPermutation::delta(self.n);
        delta
            .compose(self)
            .and_then(|q| q.compose(&delta))
            .expect("equal sizes")
    }

    pub fn cycles(&self) -> Vec<Vec<i64>> {
        let mut seen = vec![false; 2 * self.n];
        let mut cycles = Vec::new();
        for start in self.domain() {
            if seen[self.slot(start)] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = start;
            while !seen[self.slot(x)] {
                seen[self.slot(x)] = true;
                cyc.push(x);
                x = self.apply(x);
            }
            cycles.push(cyc);
        }
        canonical_cycles(cycles)
    }

    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; 2 * self.n];
        let mut count = 0;
        for start in self.domain() {
            if seen[self.slot(start)] {
                continue;
            }
            count += 1;
            let mut x = start;
            while !seen[self.slot(x)] {
                seen[self.slot(x)] = true;
                x = self.apply(x);
            }
        }
        count
    }

    /// Cayley length `|p| = 2n − #cycles(p)`.
    pub fn length(&self) -> usize {
        2 * self.n - self.cycle_count()
    }

    /// All cycles have length 2 and no fixed points.
    pub fn is_pairing(&self) -> bool {
        self.domain()
            .all(|k| self.apply(k) != k && self.apply(self.apply(k)) == k)
    }

    /// `(δ, γ_n, γ_n δ γ_n⁻¹ δ)`.
    pub fn standard_elements(n: usize) -> (SignedPermutation, SignedPermutation, SignedPermutation) {
        (Self::delta(n), Self::gamma(n), Self::gamma_tilde(n))
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_cycles(&self.cycles()))
    }
}

impl fmt::Debug for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignedPermutation[±{}]{}", self.n, self)
    }
}

/// Point-level view shared by the two permutation types, used by the
/// first-return and separation predicates.
pub trait PermPoints {
    fn apply_pt(&self, x: i64) -> i64;
    fn points(&self) -> Vec<i64>;
}

impl PermPoints for Permutation {
    fn apply_pt(&self, x: i64) -> i64 {
        self.apply(x as usize) as i64
    }
    fn points(&self) -> Vec<i64> {
        (1..=self.n() as i64).collect()
    }
}

impl PermPoints for SignedPermutation {
    fn apply_pt(&self, x: i64) -> i64 {
        self.apply(x)
    }
    fn points(&self) -> Vec<i64> {
        self.domain().collect()
    }
}
