//! The moment–cumulant engine.
//!
//! Classical free cumulants come from Möbius inversion over `NC(n)`. The
//! infinitesimal side works in two modes: the complex mode inverts
//! `τ′ = Σ_π ∂κ_π` alone, while the real mode carries the annular correction
//! `Σ_σ κ_{σ/2}` over the symmetric non-crossing annular permutations and
//! its all-through part, the spatial derivative `κ̇_n`. Everything is exact.

use crate::annular::{self, AnnularSymPermutation};
use crate::dist::{canonicalize, Distribution, SymmetryFlags};
use crate::error::{Error, Result};
use crate::nc::{enumerate_nc_cached, NcPartition};
use crate::poly::{KappaPoly, MomentPoly};
use crate::word::{Letter, Rat, Word};
use num::{BigInt, One, Zero};
use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Real,
    Complex,
}

/// `κ_n` and `κ′_n` as tables on canonical letter tuples.
#[derive(Clone, Debug)]
pub struct CumulantTable {
    degree: usize,
    flags: SymmetryFlags,
    kappa: HashMap<Word, Rat>,
    kappa_prime: HashMap<Word, Rat>,
    /// Missing canonical keys read as 0 (used by the closed-form tables).
    sparse: bool,
}

impl CumulantTable {
    pub fn new(degree: usize, flags: SymmetryFlags, sparse: bool) -> Self {
        CumulantTable {
            degree,
            flags,
            kappa: HashMap::new(),
            kappa_prime: HashMap::new(),
            sparse,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn flags(&self) -> &SymmetryFlags {
        &self.flags
    }

    fn check_key(&self, w: &Word) -> Result<Word> {
        if w.is_empty() || w.len() > self.degree {
            return Err(Error::DegreeExceeded {
                degree: w.len(),
                bound: self.degree,
            });
        }
        Ok(canonicalize(w, &self.flags))
    }

    pub fn insert_kappa(&mut self, w: &Word, v: Rat) -> Result<()> {
        let key = self.check_key(w)?;
        self.kappa.insert(key, v);
        Ok(())
    }

    pub fn insert_kappa_prime(&mut self, w: &Word, v: Rat) -> Result<()> {
        let key = self.check_key(w)?;
        self.kappa_prime.insert(key, v);
        Ok(())
    }

    fn lookup(&self, table: &HashMap<Word, Rat>, w: &Word) -> Result<Rat> {
        if w.is_empty() {
            return Err(Error::Invalid("cumulants have no 0-ary value".into()));
        }
        if w.len() > self.degree {
            return Err(Error::DegreeExceeded {
                degree: w.len(),
                bound: self.degree,
            });
        }
        match table.get(&canonicalize(w, &self.flags)) {
            Some(v) => Ok(v.clone()),
            None if self.sparse => Ok(Rat::zero()),
            None => Err(Error::MissingMoment(w.to_string())),
        }
    }

    pub fn kappa(&self, w: &Word) -> Result<Rat> {
        self.lookup(&self.kappa, w)
    }

    pub fn kappa_prime(&self, w: &Word) -> Result<Rat> {
        self.lookup(&self.kappa_prime, w)
    }

    /// Letter indices mentioned in the table keys.
    pub fn letter_indices(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for w in self.kappa.keys().chain(self.kappa_prime.keys()) {
            out.extend(w.letters().iter().map(|l| l.index));
        }
        out.extend(self.flags.symmetric_letters.iter().copied());
        out
    }

    /// Sorted `(word, κ, κ′)` rows for display.
    pub fn rows(&self) -> Vec<(Word, Option<Rat>, Option<Rat>)> {
        let mut keys: BTreeSet<Word> = self.kappa.keys().cloned().collect();
        keys.extend(self.kappa_prime.keys().cloned());
        keys.into_iter()
            .map(|w| {
                let k = self.kappa.get(&w).cloned();
                let kp = self.kappa_prime.get(&w).cloned();
                (w, k, kp)
            })
            .collect()
    }

    /// Semicircular element of variance 1 (a single symmetric letter):
    /// `κ₂ = 1`, all other cumulants and all infinitesimal cumulants vanish.
    pub fn semicircular(degree: usize) -> Self {
        let mut t = CumulantTable::new(
            degree,
            SymmetryFlags::with_symmetric_letters([1]),
            true,
        );
        let w = Word(vec![Letter::new(1); 2]);
        t.insert_kappa(&w, Rat::one()).unwrap();
        t
    }

    /// Free Poisson element with rate parameter `c` (a single symmetric
    /// letter): `κ_n = c^(n−1)`; centring removes `κ₁`. All infinitesimal
    /// cumulants vanish, matching a real Wishart limit with `c′ = 0`.
    pub fn free_poisson(c: &Rat, degree: usize, centered: bool) -> Self {
        let mut t = CumulantTable::new(
            degree,
            SymmetryFlags::with_symmetric_letters([1]),
            true,
        );
        for n in 1..=degree {
            if n == 1 && centered {
                continue;
            }
            let w = Word(vec![Letter::new(1); n]);
            let mut v = Rat::one();
            for _ in 1..n {
                v *= c.clone();
            }
            t.insert_kappa(&w, v).unwrap();
        }
        t
    }
}

type MobiusRows = Arc<Vec<(NcPartition, BigInt)>>;

fn nc_with_mobius(n: usize) -> Result<MobiusRows> {
    static CACHE: OnceLock<Mutex<HashMap<usize, MobiusRows>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&n) {
        return Ok(v.clone());
    }
    let v: MobiusRows = Arc::new(
        enumerate_nc_cached(n)?
            .iter()
            .map(|p| (p.clone(), p.mobius_to_top()))
            .collect(),
    );
    cache.lock().unwrap().insert(n, v.clone());
    Ok(v)
}

/// Letter tuples read off the conjugate-pair representatives of σ, one per
/// pair; self-conjugate cycles contribute a single reading.
type Reading = Vec<(usize, bool)>;

type SigmaReadings = Arc<Vec<Vec<Reading>>>;

fn sigma_readings(n: usize, all_through: bool) -> Result<SigmaReadings> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), SigmaReadings>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(n, all_through)) {
        return Ok(v.clone());
    }
    let sigmas = if all_through {
        annular::all_through_cached(n)?
    } else {
        annular::sncd_cached(n)?
    };
    let mut readings = Vec::with_capacity(sigmas.len());
    for sigma in sigmas.iter() {
        let r: Vec<Reading> = sigma
            .conjugate_pairs()
            .iter()
            .map(|p| annular::cycle_reading(&p.rep))
            .collect::<Result<_>>()?;
        readings.push(r);
    }
    let v = Arc::new(readings);
    cache.lock().unwrap().insert((n, all_through), v.clone());
    Ok(v)
}

fn apply_reading(reading: &Reading, letters: &[Letter]) -> Word {
    Word(
        reading
            .iter()
            .map(|&(pos, t)| {
                let l = letters[pos - 1];
                if t {
                    l.transpose()
                } else {
                    l
                }
            })
            .collect(),
    )
}

fn require_symmetry(flags: &SymmetryFlags, what: &'static str) -> Result<()> {
    if !flags.tracial || !flags.transpose_symmetric {
        return Err(Error::NeedsSymmetry(what));
    }
    Ok(())
}

/// `τ_π = Π_{V∈π} τ(word|V)`.
pub fn tau_pi(pi: &NcPartition, word: &Word, dist: &Distribution) -> Result<Rat> {
    let mut total = Rat::one();
    for block in pi.blocks() {
        total *= dist.tau(&word.subword(block))?;
    }
    Ok(total)
}

/// `∂τ_π = Σ_{V∈π} τ′(word|V) Π_{W≠V} τ(word|W)`.
pub fn dtau_pi(pi: &NcPartition, word: &Word, dist: &Distribution) -> Result<Rat> {
    let mut total = Rat::zero();
    for v in 0..pi.num_blocks() {
        let mut term = dist.tau_prime(&word.subword(&pi.blocks()[v]))?;
        if term.is_zero() {
            continue;
        }
        for (w, block) in pi.blocks().iter().enumerate() {
            if w != v {
                term *= dist.tau(&word.subword(block))?;
            }
        }
        total += term;
    }
    Ok(total)
}

/// `κ_n(word) = Σ_{π∈NC(n)} μ(π,1_n) τ_π(word)`.
pub fn kappa_of_word(dist: &Distribution, word: &Word) -> Result<Rat> {
    let mut total = Rat::zero();
    for (pi, mu) in nc_with_mobius(word.len())?.iter() {
        total += tau_pi(pi, word, dist)? * Rat::from_integer(mu.clone());
    }
    Ok(total)
}

/// Classical free cumulants of the distribution, complete to its degree.
pub fn kappa_from_moments(dist: &Distribution) -> Result<CumulantTable> {
    let mut table = CumulantTable::new(dist.degree(), dist.flags().clone(), false);
    for w in dist.canonical_words(&dist.letter_indices()) {
        let v = kappa_of_word(dist, &w)?;
        table.insert_kappa(&w, v)?;
    }
    Ok(table)
}

/// `κ_{σ/2}`: one classical cumulant factor per conjugate pair of σ.
pub fn kappa_sigma_half(
    sigma: &AnnularSymPermutation,
    letters: &[Letter],
    table: &CumulantTable,
) -> Result<Rat> {
    require_symmetry(table.flags(), "kappa_{sigma/2}")?;
    let mut total = Rat::one();
    for pair in sigma.conjugate_pairs() {
        let reading = annular::cycle_reading(&pair.rep)?;
        total *= table.kappa(&apply_reading(&reading, letters))?;
        if total.is_zero() {
            return Ok(total);
        }
    }
    Ok(total)
}

/// The spatial derivative `κ̇_n = Σ_{σ∈S_NC^{δ,a}(n,−n)} κ_{σ/2}`.
pub fn kappa_dot(n: usize, letters: &[Letter], table: &CumulantTable) -> Result<Rat> {
    if n < 2 {
        return Err(Error::Invalid(format!(
            "kappa_dot is defined for n >= 2, got {n}"
        )));
    }
    require_symmetry(table.flags(), "kappa_dot")?;
    let mut total = Rat::zero();
    for readings in sigma_readings(n, true)?.iter() {
        let mut term = Rat::one();
        for reading in readings {
            term *= table.kappa(&apply_reading(reading, letters))?;
            if term.is_zero() {
                break;
            }
        }
        total += term;
    }
    Ok(total)
}

fn block_letters(letters: &[Letter], block: &[usize]) -> Vec<Letter> {
    block.iter().map(|&p| letters[p - 1]).collect()
}

/// `∂κ_π`: one block's cumulant replaced by `κ′`, summed over blocks.
pub fn dkappa_pi(pi: &NcPartition, letters: &[Letter], table: &CumulantTable) -> Result<Rat> {
    let mut total = Rat::zero();
    for v in 0..pi.num_blocks() {
        let mut term = table.kappa_prime(&Word(block_letters(letters, &pi.blocks()[v])))?;
        if term.is_zero() {
            continue;
        }
        for (w, block) in pi.blocks().iter().enumerate() {
            if w != v {
                term *= table.kappa(&Word(block_letters(letters, block)))?;
            }
        }
        total += term;
    }
    Ok(total)
}

/// `δκ_π`: one block's cumulant replaced by `κ̇` (blocks of size 1
/// contribute `κ̇₁ = 0`).
pub fn delta_kappa_pi(pi: &NcPartition, letters: &[Letter], table: &CumulantTable) -> Result<Rat> {
    let mut total = Rat::zero();
    for v in 0..pi.num_blocks() {
        let block = &pi.blocks()[v];
        if block.len() < 2 {
            continue;
        }
        let mut term = kappa_dot(block.len(), &block_letters(letters, block), table)?;
        if term.is_zero() {
            continue;
        }
        for (w, other) in pi.blocks().iter().enumerate() {
            if w != v {
                term *= table.kappa(&Word(block_letters(letters, other)))?;
            }
        }
        total += term;
    }
    Ok(total)
}

/// `∇κ_π = ∂κ_π + δκ_π`.
pub fn nabla_kappa_pi(pi: &NcPartition, letters: &[Letter], table: &CumulantTable) -> Result<Rat> {
    Ok(dkappa_pi(pi, letters, table)? + delta_kappa_pi(pi, letters, table)?)
}

/// `τ(word) = Σ_{π∈NC(n)} κ_π(word)`.
pub fn tau_from_cumulants(word: &Word, table: &CumulantTable) -> Result<Rat> {
    if word.is_empty() {
        return Ok(Rat::one());
    }
    let mut total = Rat::zero();
    for pi in enumerate_nc_cached(word.len())?.iter() {
        let mut term = Rat::one();
        for block in pi.blocks() {
            term *= table.kappa(&word.subword(block))?;
            if term.is_zero() {
                break;
            }
        }
        total += term;
    }
    Ok(total)
}

/// The moment-cumulant reconstruction of `τ′(word)`: the `∂κ` sum over
/// `NC(n)`, plus in real mode the `κ_{σ/2}` sum over `S_NC^δ(n,−n)`.
pub fn tau_prime_from_cumulants(word: &Word, table: &CumulantTable, mode: Mode) -> Result<Rat> {
    if word.is_empty() {
        return Ok(Rat::zero());
    }
    let n = word.len();
    let mut total = Rat::zero();
    for pi in enumerate_nc_cached(n)?.iter() {
        total += dkappa_pi(pi, word.letters(), table)?;
    }
    if mode == Mode::Real && n >= 2 {
        require_symmetry(table.flags(), "the annular term of tau'")?;
        for readings in sigma_readings(n, false)?.iter() {
            let mut term = Rat::one();
            for reading in readings {
                term *= table.kappa(&apply_reading(reading, word.letters()))?;
                if term.is_zero() {
                    break;
                }
            }
            total += term;
        }
    }
    Ok(total)
}

/// Complex-mode comparison: `τ′(word) = Σ_π ∂κ_π` with no annular term.
pub fn complex_tau_prime_from_cumulants(word: &Word, table: &CumulantTable) -> Result<Rat> {
    tau_prime_from_cumulants(word, table, Mode::Complex)
}

/// Infinitesimal cumulants from the distribution: in real mode
/// `κ′_n = Σ_π μ(π,1_n) ∂τ_π − κ̇_n`, in complex mode the κ̇ term is absent.
/// The returned table also carries the classical cumulants.
pub fn infinitesimal_cumulants_from_distribution(
    dist: &Distribution,
    mode: Mode,
) -> Result<CumulantTable> {
    if mode == Mode::Real {
        require_symmetry(dist.flags(), "real infinitesimal cumulants")?;
    }
    let mut table = kappa_from_moments(dist)?;
    let words = dist.canonical_words(&dist.letter_indices());
    for w in &words {
        let mut v = Rat::zero();
        for (pi, mu) in nc_with_mobius(w.len())?.iter() {
            let d = dtau_pi(pi, w, dist)?;
            if !d.is_zero() {
                v += d * Rat::from_integer(mu.clone());
            }
        }
        if mode == Mode::Real && w.len() >= 2 {
            v -= kappa_dot(w.len(), w.letters(), &table)?;
        }
        table.insert_kappa_prime(w, v)?;
    }
    Ok(table)
}

/// `κ̇_n` for a single symmetric variable as a polynomial in `κ_2..κ_n`:
/// the coefficient of a monomial counts the all-through annular permutations
/// with that conjugate-pair cycle type.
pub fn kappa_dot_polynomial(n: usize) -> Result<KappaPoly> {
    if n < 2 {
        return Err(Error::Invalid(format!(
            "kappa_dot_polynomial is defined for n >= 2, got {n}"
        )));
    }
    let mut poly = KappaPoly::zero();
    for sigma in annular::all_through_cached(n)?.iter() {
        let orders: Vec<usize> = sigma.conjugate_pairs().iter().map(|p| p.rep.len()).collect();
        poly.add_monomial(orders, 1);
    }
    Ok(poly)
}

/// The moment expansion of [`kappa_dot_polynomial`] for a single symmetric
/// variable.
pub fn kappa_dot_moment_form(n: usize) -> Result<MomentPoly> {
    Ok(kappa_dot_polynomial(n)?.to_moment_poly())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{goe_distribution, goe_square_distribution, wishart_c1_distribution};
    use crate::nc::catalan;

    fn rat(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn letters(n: usize) -> Vec<Letter> {
        vec![Letter::new(1); n]
    }

    fn single_letter_dist(taus: &[i64], tau_primes: &[i64]) -> Distribution {
        let mut d = Distribution::new(
            taus.len(),
            SymmetryFlags::with_symmetric_letters([1]),
            false,
        );
        for (i, &v) in taus.iter().enumerate() {
            d.insert_tau(Word(letters(i + 1)), rat(v)).unwrap();
        }
        for (i, &v) in tau_primes.iter().enumerate() {
            d.insert_tau_prime(Word(letters(i + 1)), rat(v)).unwrap();
        }
        d
    }

    #[test]
    fn semicircle_cumulants() {
        let goe = goe_distribution(6).unwrap();
        let t = kappa_from_moments(&goe).unwrap();
        for n in 1..=6 {
            let expected = if n == 2 { rat(1) } else { rat(0) };
            assert_eq!(t.kappa(&Word(letters(n))).unwrap(), expected, "n = {n}");
        }
        // moment recovery
        for n in 1..=6 {
            assert_eq!(
                tau_from_cumulants(&Word(letters(n)), &t).unwrap(),
                goe.tau(&Word(letters(n))).unwrap()
            );
        }
    }

    #[test]
    fn free_poisson_and_constant_cumulants() {
        // Marchenko-Pastur with c = 1: Catalan moments, all kappa_n = 1
        let mp = single_letter_dist(&[1, 2, 5, 14, 42, 132], &[0, 0, 0, 0, 0, 0]);
        let t = kappa_from_moments(&mp).unwrap();
        for n in 1..=6 {
            assert_eq!(t.kappa(&Word(letters(n))).unwrap(), rat(1), "n = {n}");
        }
        // the constant 1: kappa_1 = 1, all higher cumulants vanish
        let one = single_letter_dist(&[1, 1, 1, 1, 1, 1], &[0; 6]);
        let t = kappa_from_moments(&one).unwrap();
        assert_eq!(t.kappa(&Word(letters(1))).unwrap(), rat(1));
        for n in 2..=6 {
            assert_eq!(t.kappa(&Word(letters(n))).unwrap(), rat(0), "n = {n}");
        }
    }

    #[test]
    fn tau_pi_and_dtau_pi_on_goe() {
        let goe = goe_distribution(6).unwrap();
        let w = Word(letters(4));
        let discrete = NcPartition::discrete(4);
        assert_eq!(tau_pi(&discrete, &w, &goe).unwrap(), rat(0));
        assert_eq!(dtau_pi(&discrete, &w, &goe).unwrap(), rat(0));
        assert_eq!(tau_pi(&NcPartition::full(4), &w, &goe).unwrap(), rat(2));
        let pairs = NcPartition::new(
            crate::nc::Partition::from_blocks(4, vec![vec![1, 2], vec![3, 4]]).unwrap(),
        )
        .unwrap();
        assert_eq!(tau_pi(&pairs, &w, &goe).unwrap(), rat(1));
        // one block gets tau': tau'(s^2) tau(s^2) + tau(s^2) tau'(s^2) = 2
        assert_eq!(dtau_pi(&pairs, &w, &goe).unwrap(), rat(2));
    }

    #[test]
    fn goe_infinitesimal_cumulants_vanish() {
        let goe = goe_distribution(6).unwrap();
        let t = infinitesimal_cumulants_from_distribution(&goe, Mode::Real).unwrap();
        for n in 1..=6 {
            assert_eq!(t.kappa_prime(&Word(letters(n))).unwrap(), rat(0), "n = {n}");
        }
        // complex mode differs: kappa'_2(s,s) = tau'(s^2) = 1
        let c = infinitesimal_cumulants_from_distribution(&goe, Mode::Complex).unwrap();
        assert_eq!(c.kappa_prime(&Word(letters(2))).unwrap(), rat(1));
        assert_eq!(c.kappa_prime(&Word(letters(1))).unwrap(), rat(0));
    }

    #[test]
    fn wishart_real_vs_complex() {
        // real Wishart, c = 1, c' = 0: real infinitesimal cumulants vanish,
        // the complex infinitesimal cumulant kappa'_2(y,y) is 1
        let y = wishart_c1_distribution().unwrap();
        let real = infinitesimal_cumulants_from_distribution(&y, Mode::Real).unwrap();
        assert_eq!(real.kappa_prime(&Word(letters(1))).unwrap(), rat(0));
        assert_eq!(real.kappa_prime(&Word(letters(2))).unwrap(), rat(0));
        let complex = infinitesimal_cumulants_from_distribution(&y, Mode::Complex).unwrap();
        assert_eq!(complex.kappa_prime(&Word(letters(2))).unwrap(), rat(1));
    }

    #[test]
    fn goe_square_prime_cumulants() {
        // x = s^2 with the GOE infinitesimal law: kappa'_2 = 2, kappa'_3 = 4
        let x = goe_square_distribution(3).unwrap();
        let t = infinitesimal_cumulants_from_distribution(&x, Mode::Real).unwrap();
        assert_eq!(t.kappa_prime(&Word(letters(1))).unwrap(), rat(1));
        assert_eq!(t.kappa_prime(&Word(letters(2))).unwrap(), rat(2));
        assert_eq!(t.kappa_prime(&Word(letters(3))).unwrap(), rat(4));
    }

    #[test]
    fn kappa_sigma_half_examples() {
        let semi = CumulantTable::semicircular(8);
        // spoke(2k) with one symmetric letter: kappa_2(s, s^t)^k = 1
        for k in 1..=3usize {
            let spoke = annular::spoke(2 * k).unwrap();
            assert_eq!(
                kappa_sigma_half(&spoke, &letters(2 * k), &semi).unwrap(),
                rat(1)
            );
        }
        // free Poisson: kappa_{sigma/2}(x,x,x) = 1 for every sigma at n = 3
        let fp = CumulantTable::free_poisson(&rat(1), 6, false);
        for sigma in annular::enumerate_sncd(3).unwrap() {
            assert_eq!(kappa_sigma_half(&sigma, &letters(3), &fp).unwrap(), rat(1));
        }
        // sigma_1 with a semicircular letter: a pairing, both factors 1
        let s1 = AnnularSymPermutation::new(
            crate::perm::SignedPermutation::parse("(1,-4)(-1,4)(2,3)(-2,-3)", 4).unwrap(),
        )
        .unwrap();
        assert_eq!(kappa_sigma_half(&s1, &letters(4), &semi).unwrap(), rat(1));
    }

    #[test]
    fn kappa_sigma_half_rejects_asymmetric_tables() {
        let flags = SymmetryFlags {
            tracial: true,
            transpose_symmetric: false,
            symmetric_letters: Default::default(),
        };
        let t = CumulantTable::new(4, flags, true);
        let spoke = annular::spoke(2).unwrap();
        assert!(matches!(
            kappa_sigma_half(&spoke, &letters(2), &t),
            Err(Error::NeedsSymmetry(_))
        ));
    }

    #[test]
    fn kappa_sigma_half_representative_invariance() {
        // evaluating with the partner cycle of each conjugate pair gives the
        // same value on tracial transpose-symmetric tables
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut table = CumulantTable::new(4, SymmetryFlags::tracial_symmetric(), true);
        let d = Distribution::new(4, SymmetryFlags::tracial_symmetric(), true);
        for w in d.canonical_words(&[1].into_iter().collect()) {
            table
                .insert_kappa(&w, rat(rng.gen_range(-6..=6)))
                .unwrap();
        }
        let a = [Letter::new(1), Letter::transposed(1), Letter::new(1), Letter::new(1)];
        for n in 2..=4usize {
            for sigma in annular::enumerate_sncd(n).unwrap() {
                let direct = kappa_sigma_half(&sigma, &a[..n], &table).unwrap();
                let mut swapped = Rat::one();
                for pair in sigma.conjugate_pairs() {
                    let reading = annular::cycle_reading(&pair.partner)
                        .or_else(|_| annular::cycle_reading(&pair.rep))
                        .unwrap();
                    swapped *= table.kappa(&apply_reading(&reading, &a[..n])).unwrap();
                }
                assert_eq!(direct, swapped, "sigma = {sigma}");
            }
        }
    }

    #[test]
    fn kappa_dot_small_identities() {
        let semi = CumulantTable::semicircular(8);
        // kappa_dot_2(a1, a2) = kappa_2(a1, a2^t)
        assert_eq!(kappa_dot(2, &letters(2), &semi).unwrap(), rat(1));
        assert!(kappa_dot(1, &letters(1), &semi).is_err());
        // single symmetric letter: kappa_dot_4 = 6 kappa_4 + kappa_2^2 = 1
        assert_eq!(kappa_dot(4, &letters(4), &semi).unwrap(), rat(1));
        // kappa_dot_6 = 15 k6 + 9 k2 k4 + 6 k3^2 + k2^3 = 1 for semicircle
        assert_eq!(kappa_dot(6, &letters(6), &semi).unwrap(), rat(1));
        let fp = CumulantTable::free_poisson(&rat(1), 8, false);
        // all kappa = 1: kappa_dot_n = 2^(n-1) - 1
        for n in 2..=6usize {
            assert_eq!(
                kappa_dot(n, &letters(n), &fp).unwrap(),
                rat((1 << (n - 1)) - 1)
            );
        }
    }

    #[test]
    fn kappa_dot_polynomial_table() {
        let rows: [(usize, &str); 6] = [
            (2, "k2"),
            (3, "3 k3"),
            (4, "6 k4 + k2^2"),
            (5, "10 k5 + 5 k2 k3"),
            (6, "15 k6 + 9 k2 k4 + 6 k3^2 + k2^3"),
            (7, "21 k7 + 14 k2 k5 + 21 k3 k4 + 7 k2^2 k3"),
        ];
        for (n, expected) in rows {
            assert_eq!(kappa_dot_polynomial(n).unwrap().to_string(), expected);
        }
    }

    #[test]
    fn kappa_dot_moment_form_row_four() {
        // 6 m4 - 24 m1 m3 - 11 m2^2 + 58 m1^2 m2 - 29 m1^4
        let p = kappa_dot_moment_form(4).unwrap();
        assert_eq!(p.coefficient(&[0, 0, 0, 1]), rat(6));
        assert_eq!(p.coefficient(&[1, 0, 1]), rat(-24));
        assert_eq!(p.coefficient(&[0, 2]), rat(-11));
        assert_eq!(p.coefficient(&[2, 1]), rat(58));
        assert_eq!(p.coefficient(&[4]), rat(-29));
        assert_eq!(p.terms().count(), 5);
    }

    #[test]
    fn dkappa_delta_nabla() {
        let x = goe_square_distribution(3).unwrap();
        let t = infinitesimal_cumulants_from_distribution(&x, Mode::Real).unwrap();
        // d kappa_{0_1}(a) = kappa'_1(a) = tau'(a)
        assert_eq!(
            dkappa_pi(&NcPartition::discrete(1), &letters(1), &t).unwrap(),
            rat(1)
        );
        // d kappa_{0_2} = kappa'_1 kappa_1 + kappa_1 kappa'_1 = 2
        assert_eq!(
            dkappa_pi(&NcPartition::discrete(2), &letters(2), &t).unwrap(),
            rat(2)
        );
        // delta kappa_{1_2} = kappa_dot_2 = kappa_2(x, x^t) = 1
        assert_eq!(
            delta_kappa_pi(&NcPartition::full(2), &letters(2), &t).unwrap(),
            rat(1)
        );
        // delta on singletons vanishes
        assert_eq!(
            delta_kappa_pi(&NcPartition::discrete(2), &letters(2), &t).unwrap(),
            rat(0)
        );
        assert_eq!(
            nabla_kappa_pi(&NcPartition::full(2), &letters(2), &t).unwrap(),
            t.kappa_prime(&Word(letters(2))).unwrap() + rat(1)
        );
    }

    #[test]
    fn tau_prime_reconstruction_small() {
        let x = goe_square_distribution(3).unwrap();
        let t = infinitesimal_cumulants_from_distribution(&x, Mode::Real).unwrap();
        for n in 1..=3 {
            assert_eq!(
                tau_prime_from_cumulants(&Word(letters(n)), &t, Mode::Real).unwrap(),
                x.tau_prime(&Word(letters(n))).unwrap(),
                "n = {n}"
            );
        }
        // complex mode drops the annular term: on the GOE it keeps
        // tau'(s^2) = kappa'^c_2 + 0 = 1
        let goe = goe_distribution(6).unwrap();
        let c = infinitesimal_cumulants_from_distribution(&goe, Mode::Complex).unwrap();
        for n in 1..=6 {
            assert_eq!(
                complex_tau_prime_from_cumulants(&Word(letters(n)), &c).unwrap(),
                goe.tau_prime(&Word(letters(n))).unwrap(),
                "n = {n}"
            );
        }
    }

    #[test]
    fn roundtrip_random_distributions() {
        use rand::{Rng, SeedableRng};
        for seed in 0..3u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let flags = SymmetryFlags::tracial_symmetric();
            let mut d = Distribution::new(4, flags, false);
            let probe = Distribution::new(4, SymmetryFlags::tracial_symmetric(), true);
            for w in probe.canonical_words(&[1].into_iter().collect()) {
                let num = rng.gen_range(-8i64..=8);
                let den = rng.gen_range(1i64..=4);
                d.insert_tau(w.clone(), Rat::new(num.into(), den.into()))
                    .unwrap();
                let num = rng.gen_range(-8i64..=8);
                d.insert_tau_prime(w, Rat::new(num.into(), den.into()))
                    .unwrap();
            }
            for mode in [Mode::Real, Mode::Complex] {
                let t = infinitesimal_cumulants_from_distribution(&d, mode).unwrap();
                for w in probe.canonical_words(&[1].into_iter().collect()) {
                    assert_eq!(
                        tau_from_cumulants(&w, &t).unwrap(),
                        d.tau(&w).unwrap(),
                        "tau at {w}"
                    );
                    assert_eq!(
                        tau_prime_from_cumulants(&w, &t, mode).unwrap(),
                        d.tau_prime(&w).unwrap(),
                        "tau' at {w} ({mode:?})"
                    );
                }
            }
        }
    }

    #[test]
    fn generating_function_check() {
        use crate::poly::PowerSeries;
        use rand::{Rng, SeedableRng};
        let cap = 8usize;
        for seed in 0..5u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(100 + seed);
            let kappas: Vec<Rat> = (0..=cap)
                .map(|_| Rat::new(rng.gen_range(-5i64..=5).into(), rng.gen_range(1i64..=3).into()))
                .collect();
            // C(x) = 1 + sum kappa_n x^n
            let c = PowerSeries::new(cap, |n| if n == 0 { Rat::one() } else { kappas[n].clone() });
            let half = Rat::new(1.into(), 2.into());
            let numer = c.derivative().derivative().shift(2);
            let denom = c.sub(&c.derivative().shift(1));
            let mdot = numer.div(&denom);
            for n in 2..=cap {
                let expected = kappa_dot_polynomial(n)
                    .unwrap()
                    .eval(|j| kappas[j].clone());
                assert_eq!(mdot.coeff(n) * half.clone(), expected, "n = {n}");
            }
        }
    }

    #[test]
    fn degenerate_inputs() {
        let semi = CumulantTable::semicircular(4);
        assert!(semi.kappa(&Word::empty()).is_err());
        assert!(semi.kappa(&Word(letters(5))).is_err());
        assert_eq!(
            tau_from_cumulants(&Word::empty(), &semi).unwrap(),
            Rat::one()
        );
        assert_eq!(
            tau_prime_from_cumulants(&Word::empty(), &semi, Mode::Real).unwrap(),
            Rat::zero()
        );
    }

    #[test]
    fn catalan_sanity() {
        assert_eq!(catalan(6), BigInt::from(132));
    }
}
