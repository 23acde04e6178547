//! Small symbolic helpers: polynomials in abstract free cumulants
//! `κ_2, κ_3, ..` of a single symmetric variable, polynomials in its moments
//! `m_1, m_2, ..`, and truncated rational power series.

use crate::nc::enumerate_nc;
use crate::word::Rat;
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Integer polynomial in cumulant monomials; a key is the sorted multiset of
/// cumulant orders, e.g. `[2,3,3]` for `κ₂κ₃²`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct KappaPoly(BTreeMap<Vec<usize>, u64>);

impl KappaPoly {
    pub fn zero() -> Self {
        KappaPoly(BTreeMap::new())
    }

    pub fn add_monomial(&mut self, mut orders: Vec<usize>, count: u64) {
        orders.sort_unstable();
        *self.0.entry(orders).or_insert(0) += count;
    }

    pub fn coefficient(&self, orders: &[usize]) -> u64 {
        let mut key = orders.to_vec();
        key.sort_unstable();
        self.0.get(&key).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, u64)> {
        self.0.iter().map(|(k, &v)| (k, v))
    }

    pub fn total_count(&self) -> u64 {
        self.0.values().sum()
    }

    /// Evaluate with `κ_j` given by `kappa(j)`.
    pub fn eval(&self, mut kappa: impl FnMut(usize) -> Rat) -> Rat {
        let mut total = Rat::zero();
        for (orders, count) in self.terms() {
            let mut term = Rat::from_integer(count.into());
            for &j in orders {
                term *= kappa(j);
            }
            total += term;
        }
        total
    }

    /// Substitute the single-variable free-cumulant expansions to get a
    /// polynomial in moments.
    pub fn to_moment_poly(&self) -> MomentPoly {
        let mut out = MomentPoly::zero();
        for (orders, count) in self.terms() {
            let mut term = MomentPoly::constant(Rat::from_integer(count.into()));
            for &j in orders {
                term = term.mul(&free_cumulant_in_moments(j));
            }
            out = out.add(&term);
        }
        out
    }
}

impl fmt::Display for KappaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Vec<usize>> = self.0.keys().collect();
        keys.sort_by_key(|k| (k.len(), (*k).clone()));
        for (i, key) in keys.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let c = self.0[*key];
            if c != 1 {
                write!(f, "{c} ")?;
            }
            let mut j = 0;
            while j < key.len() {
                let order = key[j];
                let mut power = 1;
                while j + power < key.len() && key[j + power] == order {
                    power += 1;
                }
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "k{order}")?;
                if power > 1 {
                    write!(f, "^{power}")?;
                }
                j += power;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for KappaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KappaPoly[{self}]")
    }
}

/// Rational polynomial in the moments `m_1, m_2, ..` of one variable; a key
/// is the exponent vector `(e_1, e_2, ..)` with trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct MomentPoly(BTreeMap<Vec<u32>, Rat>);

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

impl MomentPoly {
    pub fn zero() -> Self {
        MomentPoly(BTreeMap::new())
    }

    pub fn constant(c: Rat) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(Vec::new(), c);
        }
        MomentPoly(m)
    }

    /// The single moment `m_k`.
    pub fn moment(k: usize) -> Self {
        let mut exps = vec![0u32; k];
        exps[k - 1] = 1;
        let mut m = BTreeMap::new();
        m.insert(exps, Rat::one());
        MomentPoly(m)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        let key = trim(exps);
        let entry = self.0.entry(key.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&key);
        }
    }

    pub fn add(&self, other: &MomentPoly) -> MomentPoly {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn mul(&self, other: &MomentPoly) -> MomentPoly {
        let mut out = MomentPoly::zero();
        for (k1, v1) in &self.0 {
            for (k2, v2) in &other.0 {
                let mut exps = vec![0u32; k1.len().max(k2.len())];
                for (i, e) in k1.iter().enumerate() {
                    exps[i] += e;
                }
                for (i, e) in k2.iter().enumerate() {
                    exps[i] += e;
                }
                out.add_term(exps, v1 * v2);
            }
        }
        out
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rat {
        self.0
            .get(&trim(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.0.iter()
    }

    pub fn eval(&self, mut moment: impl FnMut(usize) -> Rat) -> Rat {
        let mut total = Rat::zero();
        for (exps, c) in &self.0 {
            let mut term = c.clone();
            for (i, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    term *= moment(i + 1);
                }
            }
            total += term;
        }
        total
    }
}

impl fmt::Display for MomentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Vec<u32>> = self.0.keys().collect();
        keys.sort_by_key(|k| {
            let degree: u32 = k
                .iter()
                .enumerate()
                .map(|(i, &e)| (i as u32 + 1) * e)
                .sum();
            let spread: Vec<i64> = k.iter().rev().map(|&e| -(e as i64)).collect();
            (std::cmp::Reverse(degree), spread)
        });
        for (i, key) in keys.iter().enumerate() {
            let c = &self.0[*key];
            if i > 0 {
                write!(f, " ")?;
            }
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, "- ")?;
            } else {
                write!(f, "+ ")?;
            }
            let mag = if c.is_negative() { -c.clone() } else { c.clone() };
            if !mag.is_one() || key.is_empty() {
                write!(f, "{mag}")?;
                if !key.is_empty() {
                    write!(f, " ")?;
                }
            }
            let mut first = true;
            for (v, &e) in key.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, " ")?;
                }
                first = false;
                write!(f, "m{}", v + 1)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MomentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MomentPoly[{self}]")
    }
}

/// Free cumulant `κ_k` of one variable as a polynomial in its moments,
/// via Möbius inversion over `NC(k)`.
pub fn free_cumulant_in_moments(k: usize) -> MomentPoly {
    let mut out = MomentPoly::zero();
    for pi in enumerate_nc(k).expect("k within cap") {
        let mu = Rat::from_integer(pi.mobius_to_top());
        let mut exps = vec![0u32; k];
        for block in pi.blocks() {
            exps[block.len() - 1] += 1;
        }
        out.add_term(exps, mu);
    }
    out
}

/// Truncated power series over the rationals; index = power of `x`.
#[derive(Clone, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<Rat>,
}

impl PowerSeries {
    pub fn new(cap: usize, f: impl FnMut(usize) -> Rat) -> Self {
        PowerSeries {
            coeffs: (0..=cap).map(f).collect(),
        }
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> Rat {
        self.coeffs.get(n).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, other: &PowerSeries) -> PowerSeries {
        PowerSeries::new(self.cap().min(other.cap()), |n| {
            self.coeff(n) + other.coeff(n)
        })
    }

    pub fn sub(&self, other: &PowerSeries) -> PowerSeries {
        PowerSeries::new(self.cap().min(other.cap()), |n| {
            self.coeff(n) - other.coeff(n)
        })
    }

    pub fn mul(&self, other: &PowerSeries) -> PowerSeries {
        let cap = self.cap().min(other.cap());
        PowerSeries::new(cap, |n| {
            (0..=n).map(|k| self.coeff(k) * other.coeff(n - k)).sum()
        })
    }

    /// Requires an invertible constant term.
    pub fn div(&self, other: &PowerSeries) -> PowerSeries {
        assert!(!other.coeff(0).is_zero(), "division by series with zero constant term");
        let cap = self.cap().min(other.cap());
        let mut out: Vec<Rat> = Vec::with_capacity(cap + 1);
        for n in 0..=cap {
            let mut acc = self.coeff(n);
            for (k, done) in out.iter().enumerate() {
                acc -= done.clone() * other.coeff(n - k);
            }
            out.push(acc / other.coeff(0));
        }
        PowerSeries { coeffs: out }
    }

    pub fn derivative(&self) -> PowerSeries {
        let cap = self.cap().saturating_sub(1);
        PowerSeries::new(cap, |n| self.coeff(n + 1) * Rat::from_integer((n as i64 + 1).into()))
    }

    /// Multiply by `x^k`; the result is exact to `cap + k`.
    pub fn shift(&self, k: usize) -> PowerSeries {
        PowerSeries::new(self.cap() + k, |n| {
            if n >= k {
                self.coeff(n - k)
            } else {
                Rat::zero()
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    #[test]
    fn free_cumulants_in_moments() {
        // kappa_1 = m1, kappa_2 = m2 - m1^2,
        // kappa_3 = m3 - 3 m1 m2 + 2 m1^3,
        // kappa_4 = m4 - 4 m1 m3 - 2 m2^2 + 10 m1^2 m2 - 5 m1^4
        let k1 = free_cumulant_in_moments(1);
        assert_eq!(k1.coefficient(&[1]), rat(1));
        let k2 = free_cumulant_in_moments(2);
        assert_eq!(k2.coefficient(&[0, 1]), rat(1));
        assert_eq!(k2.coefficient(&[2]), rat(-1));
        let k4 = free_cumulant_in_moments(4);
        assert_eq!(k4.coefficient(&[0, 0, 0, 1]), rat(1));
        assert_eq!(k4.coefficient(&[1, 0, 1]), rat(-4));
        assert_eq!(k4.coefficient(&[0, 2]), rat(-2));
        assert_eq!(k4.coefficient(&[2, 1]), rat(10));
        assert_eq!(k4.coefficient(&[4]), rat(-5));
    }

    #[test]
    fn kappa_poly_display() {
        let mut p = KappaPoly::zero();
        p.add_monomial(vec![6], 15);
        p.add_monomial(vec![4, 2], 9);
        p.add_monomial(vec![3, 3], 6);
        p.add_monomial(vec![2, 2, 2], 1);
        assert_eq!(p.to_string(), "15 k6 + 9 k2 k4 + 6 k3^2 + k2^3");
    }

    #[test]
    fn series_arithmetic() {
        // 1/(1-x) = 1 + x + x^2 + ..
        let one_minus_x = PowerSeries::new(8, |n| match n {
            0 => rat(1),
            1 => rat(-1),
            _ => rat(0),
        });
        let one = PowerSeries::new(8, |n| if n == 0 { rat(1) } else { rat(0) });
        let geo = one.div(&one_minus_x);
        for n in 0..=8 {
            assert_eq!(geo.coeff(n), rat(1));
        }
        assert_eq!(geo.mul(&one_minus_x).coeff(5), rat(0));
        assert_eq!(geo.derivative().coeff(3), rat(4));
        assert_eq!(geo.shift(2).coeff(1), rat(0));
        assert_eq!(geo.shift(2).coeff(4), rat(1));
    }
}
