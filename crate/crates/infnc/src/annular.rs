//! Symmetric non-crossing annular permutations of the `(n, −n)` annulus.
//!
//! A member σ of `S_NC^δ(n,−n)` satisfies three conditions: σ joined with
//! `γ_n δ γ_n⁻¹ δ` is transitive, `#(σ) + #(σ⁻¹ γ_n δ γ_n⁻¹ δ) = 2n` (genus
//! zero), and `σδ` is a pairing. Cycles then come in conjugate pairs
//! `{c, δc⁻¹δ}`, and the reading of a through cycle (its positive arc in
//! cyclic order followed by its negative arc) drives the `κ_{σ/2}` factors.

use crate::error::{Error, Result};
use crate::nc::{NcPartition, Partition, UnionFind};
use crate::perm::{Permutation, SignedPermutation};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// `K^δ(σ) = δ γ_n⁻¹ δ σ⁻¹ γ_n`.
pub fn kdelta(sigma: &SignedPermutation) -> SignedPermutation {
    let n = sigma.n();
    let delta = SignedPermutation::delta(n);
    let gamma = SignedPermutation::gamma(n);
    delta
        .compose(&gamma.inverse())
        .and_then(|p| p.compose(&delta))
        .and_then(|p| p.compose(&sigma.inverse()))
        .and_then(|p| p.compose(&gamma))
        .expect("equal sizes")
}

/// Relative Kreweras complement `K^δ_ρ(τ) = δ ρ⁻¹ δ τ⁻¹ ρ`, with `ρ` a
/// permutation of `[n]` embedded to act trivially on the negative points.
pub fn relative_kreweras(tau: &SignedPermutation, rho: &Permutation) -> Result<SignedPermutation> {
    if rho.n() != tau.n() {
        return Err(Error::SizeMismatch(format!(
            "relative Kreweras on [±{}] vs rho on [{}]",
            tau.n(),
            rho.n()
        )));
    }
    let rho = rho.embed();
    let delta = SignedPermutation::delta(tau.n());
    delta
        .compose(&rho.inverse())?
        .compose(&delta)?
        .compose(&tau.inverse())?
        .compose(&rho)
}

/// The cycle meets both the positive and the negative half.
pub fn is_through_cycle(cycle: &[i64]) -> bool {
    cycle.iter().any(|&x| x > 0) && cycle.iter().any(|&x| x < 0)
}

fn annular_conditions(sigma: &SignedPermutation) -> Result<()> {
    let n = sigma.n();
    let delta = SignedPermutation::delta(n);
    if !sigma.compose(&delta)?.is_pairing() {
        return Err(Error::NotPairing);
    }
    let gt = SignedPermutation::gamma_tilde(n);
    let genus_cycles = sigma.cycle_count() + sigma.inverse().compose(&gt)?.cycle_count();
    if genus_cycles != 2 * n {
        return Err(Error::NotAnnular(format!(
            "#(sigma) + #(sigma^-1 gamma delta gamma^-1 delta) = {} != {}",
            genus_cycles,
            2 * n
        )));
    }
    // transitivity of sigma joined with the two gamma-tilde cycles
    let mut uf = UnionFind::new(2 * n);
    let slot = |x: i64| -> usize {
        if x > 0 {
            (x - 1) as usize
        } else {
            n + (-x - 1) as usize
        }
    };
    for k in 1..n {
        uf.union(k - 1, k); // [n] is one block of gamma-tilde
        uf.union(n + k - 1, n + k); // [-n] is the other
    }
    for c in sigma.cycles() {
        for w in c.windows(2) {
            uf.union(slot(w[0]), slot(w[1]));
        }
    }
    if uf.component_count() != 1 {
        return Err(Error::NotAnnular(
            "sigma does not join the two circles".into(),
        ));
    }
    Ok(())
}

/// A validated element of `S_NC^δ(n,−n)`.
#[derive(Clone, PartialEq, Eq)]
pub struct AnnularSymPermutation {
    sigma: SignedPermutation,
}

/// A conjugate pair `{c, c' = δc⁻¹δ}` of cycles. `rep` is the cycle whose
/// minimal positive element is smallest; self-conjugate cycles (which cannot
/// occur when `σδ` is a fixed-point-free pairing) would be flagged and
/// counted once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugatePair {
    pub rep: Vec<i64>,
    pub partner: Vec<i64>,
    pub self_conjugate: bool,
}

impl AnnularSymPermutation {
    pub fn new(sigma: SignedPermutation) -> Result<Self> {
        annular_conditions(&sigma)?;
        Ok(AnnularSymPermutation { sigma })
    }

    pub fn n(&self) -> usize {
        self.sigma.n()
    }

    pub fn sigma(&self) -> &SignedPermutation {
        &self.sigma
    }

    pub fn cycles(&self) -> Vec<Vec<i64>> {
        self.sigma.cycles()
    }

    pub fn kdelta(&self) -> SignedPermutation {
        kdelta(&self.sigma)
    }

    /// σ itself consists of 2-cycles only.
    pub fn is_pairing(&self) -> bool {
        self.sigma.is_pairing()
    }

    pub fn is_all_through(&self) -> bool {
        self.cycles().iter().all(|c| is_through_cycle(c))
    }

    /// Group the cycles into conjugate pairs `{c, δc⁻¹δ}`.
    pub fn conjugate_pairs(&self) -> Vec<ConjugatePair> {
        let cycles = self.cycles();
        let mut used = vec![false; cycles.len()];
        let support_key = |c: &[i64]| {
            let mut s: Vec<i64> = c.to_vec();
            s.sort_unstable();
            s
        };
        let mut pairs = Vec::new();
        for i in 0..cycles.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            let mirrored: Vec<i64> = cycles[i].iter().map(|&x| -x).collect();
            let target = support_key(&mirrored);
            let j = (0..cycles.len())
                .find(|&j| !used[j] && support_key(&cycles[j]) == target)
                .or_else(|| {
                    // conjugate support equals own support: self-conjugate
                    (support_key(&cycles[i]) == target).then_some(i)
                })
                .expect("cycles of sigma pair up under c -> delta c^-1 delta");
            let self_conjugate = j == i;
            if !self_conjugate {
                used[j] = true;
            }
            let min_pos = |c: &[i64]| c.iter().filter(|&&x| x > 0).min().copied();
            let (rep, partner) = match (min_pos(&cycles[i]), min_pos(&cycles[j])) {
                (Some(a), Some(b)) if b < a => (cycles[j].clone(), cycles[i].clone()),
                (None, Some(_)) => (cycles[j].clone(), cycles[i].clone()),
                _ => (cycles[i].clone(), cycles[j].clone()),
            };
            pairs.push(ConjugatePair {
                rep,
                partner,
                self_conjugate,
            });
        }
        pairs.sort_by_key(|p| (p.rep[0].abs(), p.rep[0] < 0));
        pairs
    }

    /// Decompose σ as (π, V): `V ∪ δ(V)` carries the through cycles, and the
    /// non-through cycles inside `[n]` are the remaining blocks of π.
    pub fn classify(&self) -> (NcPartition, Vec<usize>) {
        let mut v: Vec<usize> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for c in self.cycles() {
            if is_through_cycle(&c) {
                v.extend(c.iter().filter(|&&x| x > 0).map(|&x| x as usize));
            } else if c[0] > 0 {
                blocks.push(c.iter().map(|&x| x as usize).collect());
            }
        }
        v.sort_unstable();
        blocks.push(v.clone());
        let pi = Partition::from_blocks(self.n(), blocks).expect("cycles partition [n]");
        let pi = NcPartition::new(pi).expect("annular reduction yields a non-crossing partition");
        (pi, v)
    }
}

impl std::fmt::Display for AnnularSymPermutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.sigma.fmt(f)
    }
}

impl std::fmt::Debug for AnnularSymPermutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Annular{:?}", self.sigma)
    }
}

/// The spoke diagram `(k, −(n/2 + k))` for even `n`.
pub fn spoke(n: usize) -> Result<AnnularSymPermutation> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Invalid(format!("spoke diagram needs even n, got {n}")));
    }
    let cycles: Vec<Vec<i64>> = (1..=n)
        .map(|k| {
            let partner = (n / 2 + k - 1) % n + 1;
            vec![k as i64, -(partner as i64)]
        })
        .collect();
    AnnularSymPermutation::new(SignedPermutation::from_cycles(n, &cycles)?)
}

/// Spoke-diagram lemma predicate: σ has a single-element cycle, or some cycle
/// contains two neighbouring points of the same circle.
pub fn has_singleton_or_adjacent_pair(sigma: &AnnularSymPermutation) -> bool {
    let n = sigma.n() as i64;
    for c in sigma.cycles() {
        if c.len() == 1 {
            return true;
        }
        for k in 1..=n {
            let next = k % n + 1;
            if (c.contains(&k) && c.contains(&next)) || (c.contains(&-k) && c.contains(&-next)) {
                return true;
            }
        }
    }
    false
}

fn cap_check(n: usize, default_cap: usize) -> Result<()> {
    let cap = crate::effective_cap(default_cap);
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    Ok(())
}

/// Brute-force enumeration of `S_NC^δ(n,−n)`: run over all pairings `q` of
/// `[±n]`, set `σ = qδ`, and keep those passing the genus and transitivity
/// conditions. Output sorted by cycle-notation string.
pub fn enumerate_sncd(n: usize) -> Result<Vec<AnnularSymPermutation>> {
    cap_check(n, crate::ANNULAR_CAP)?;
    if n < 2 {
        return Ok(Vec::new()); // S_NC^delta(1,-1) is empty
    }
    let points = 2 * n;
    // index convention: k-1 for k > 0, n + |k| - 1 for k < 0
    let val = |i: usize| -> i64 {
        if i < n {
            (i + 1) as i64
        } else {
            -((i - n + 1) as i64)
        }
    };
    let mut q = vec![usize::MAX; points];
    let mut out = Vec::new();

    // gamma-tilde at index level
    let gt: Vec<usize> = (0..points)
        .map(|i| match i {
            _ if i < n => (i + 1) % n,
            _ if i == n => 2 * n - 1,
            _ => i - 1,
        })
        .collect();

    fn cycle_count_idx(p: &[usize]) -> usize {
        let mut seen = vec![false; p.len()];
        let mut count = 0;
        for mut x in 0..p.len() {
            if seen[x] {
                continue;
            }
            count += 1;
            while !seen[x] {
                seen[x] = true;
                x = p[x];
            }
        }
        count
    }

    fn rec(
        q: &mut Vec<usize>,
        n: usize,
        gt: &[usize],
        val: &dyn Fn(usize) -> i64,
        out: &mut Vec<AnnularSymPermutation>,
    ) {
        let points = 2 * n;
        let Some(first) = (0..points).find(|&i| q[i] == usize::MAX) else {
            // sigma = q ∘ delta at index level: delta swaps i <-> i + n (mod 2n)
            let sigma_idx: Vec<usize> = (0..points).map(|i| q[(i + n) % points]).collect();
            let c_sigma = cycle_count_idx(&sigma_idx);
            let mut sigma_inv = vec![0usize; points];
            for (i, &v) in sigma_idx.iter().enumerate() {
                sigma_inv[v] = i;
            }
            let prod: Vec<usize> = (0..points).map(|i| sigma_inv[gt[i]]).collect();
            if c_sigma + cycle_count_idx(&prod) != points {
                return;
            }
            let mut uf = UnionFind::new(points);
            for k in 0..n - 1 {
                uf.union(k, k + 1);
                uf.union(n + k, n + k + 1);
            }
            for (i, &v) in sigma_idx.iter().enumerate() {
                uf.union(i, v);
            }
            if uf.component_count() != 1 {
                return;
            }
            let sigma =
                SignedPermutation::from_images(n, |k| {
                    let i = if k > 0 {
                        (k - 1) as usize
                    } else {
                        n + (-k - 1) as usize
                    };
                    val(sigma_idx[i])
                })
                .expect("pairing composed with delta is a bijection");
            out.push(AnnularSymPermutation::new(sigma).expect("conditions already checked"));
            return;
        };
        for j in first + 1..points {
            if q[j] == usize::MAX {
                q[first] = j;
                q[j] = first;
                rec(q, n, gt, val, out);
                q[first] = usize::MAX;
                q[j] = usize::MAX;
            }
        }
    }

    rec(&mut q, n, &gt, &val, &mut out);
    out.sort_by_key(|a| a.to_string());
    Ok(out)
}

/// Enumeration of the all-through subset `S_NC^{δ,a}(n,−n)`.
///
/// Every all-through element is an arc system: the positive supports of its
/// `2t` cycles cut `[n]` into cyclic arcs `A_0,..,A_{2t−1}`, and cycle `i`
/// reads `A_i` in cyclic order followed by the reversed negation of
/// `A_{i+t}`. Each candidate is validated against the defining conditions;
/// completeness is checked against the brute-force filter in the tests.
pub fn enumerate_sncd_all_through(n: usize) -> Result<Vec<AnnularSymPermutation>> {
    cap_check(n, crate::ALL_THROUGH_CAP)?;
    if n < 2 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for t in 1..=n / 2 {
        let arcs = 2 * t;
        // choose the arc start positions: subsets of [n] of size 2t
        let mut starts: Vec<usize> = (1..=arcs).collect();
        loop {
            let mut arc_list: Vec<Vec<i64>> = Vec::with_capacity(arcs);
            for i in 0..arcs {
                let from = starts[i];
                let to = if i + 1 < arcs { starts[i + 1] } else { starts[0] + n };
                arc_list.push((from..to).map(|x| ((x - 1) % n + 1) as i64).collect());
            }
            let cycles: Vec<Vec<i64>> = (0..arcs)
                .map(|i| {
                    let mut c = arc_list[i].clone();
                    c.extend(arc_list[(i + t) % arcs].iter().rev().map(|&x| -x));
                    c
                })
                .collect();
            let sigma = SignedPermutation::from_cycles(n, &cycles)
                .expect("arcs partition both circles");
            if let Ok(a) = AnnularSymPermutation::new(sigma) {
                debug_assert!(a.is_all_through());
                out.push(a);
            }

            // next size-2t combination of start positions from [n]
            let mut i = arcs;
            while i > 0 && starts[i - 1] == n - (arcs - i) {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            starts[i - 1] += 1;
            for j in i..arcs {
                starts[j] = starts[j - 1] + 1;
            }
        }
    }
    out.sort_by_key(|a| a.to_string());
    Ok(out)
}

type SetCache = Mutex<HashMap<(usize, bool), Arc<Vec<AnnularSymPermutation>>>>;

fn set_cache() -> &'static SetCache {
    static CACHE: OnceLock<SetCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Memoized [`enumerate_sncd`]; the enumerations are pure and reused heavily
/// by the moment-cumulant sums.
pub fn sncd_cached(n: usize) -> Result<Arc<Vec<AnnularSymPermutation>>> {
    cap_check(n, crate::ANNULAR_CAP)?;
    if let Some(v) = set_cache().lock().unwrap().get(&(n, false)) {
        return Ok(v.clone());
    }
    let v = Arc::new(enumerate_sncd(n)?);
    set_cache().lock().unwrap().insert((n, false), v.clone());
    Ok(v)
}

/// Memoized [`enumerate_sncd_all_through`].
pub fn all_through_cached(n: usize) -> Result<Arc<Vec<AnnularSymPermutation>>> {
    cap_check(n, crate::ALL_THROUGH_CAP)?;
    if let Some(v) = set_cache().lock().unwrap().get(&(n, true)) {
        return Ok(v.clone());
    }
    let v = Arc::new(enumerate_sncd_all_through(n)?);
    set_cache().lock().unwrap().insert((n, true), v.clone());
    Ok(v)
}

/// Read a cycle as a letter tuple: positive points in arc order give plain
/// positions, negative points give transposed positions. Through cycles are
/// rotated to start right after their unique negative-to-positive transition.
pub fn cycle_reading(cycle: &[i64]) -> Result<Vec<(usize, bool)>> {
    let len = cycle.len();
    if cycle.iter().all(|&x| x < 0) {
        return Err(Error::Invalid(
            "reading an all-negative cycle; use its conjugate".into(),
        ));
    }
    let start = if cycle.iter().all(|&x| x > 0) {
        (0..len).min_by_key(|&i| cycle[i]).unwrap()
    } else {
        let transitions: Vec<usize> = (0..len)
            .filter(|&i| cycle[(i + len - 1) % len] < 0 && cycle[i] > 0)
            .collect();
        if transitions.len() != 1 {
            return Err(Error::Invalid(format!(
                "cycle {cycle:?} is not an annular through cycle"
            )));
        }
        transitions[0]
    };
    Ok((0..len)
        .map(|i| {
            let x = cycle[(start + i) % len];
            (x.unsigned_abs() as usize, x < 0)
        })
        .collect())
}
