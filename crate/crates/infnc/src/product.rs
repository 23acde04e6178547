//! Cumulants with products as entries.
//!
//! For a grouping `m⃗ = (m_1,..,m_r)` of `m` letters into `r` products, the
//! classical formula sums `κ_ρ` over `ρ ∈ NC(m)` joining to `1_m` with the
//! interval partition. The infinitesimal product rule adds the annular side:
//! `κ′_r(A_1,..,A_r) = Σ_{K(π) sep M} ∂κ_π + Σ_{K^δ(σ) sep ±M} κ_{σ/2}`,
//! the second sum running over `S_NC^δ(m,−m)`. The module also verifies the
//! index-set decompositions behind the proof on small instances.

use crate::annular;
use crate::cumulant::{dkappa_pi, kappa_sigma_half, CumulantTable, Mode};
use crate::error::{Error, Result};
use crate::nc::{enumerate_nc_cached, separates, NcPartition, Partition, UnionFind};
use crate::perm::SignedPermutation;
use crate::word::{Letter, Rat, Word};
use num::{One, Zero};

/// A grouping `(m_1,..,m_r)` of `m = Σ m_i` letters into `r` products.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupingSpec {
    parts: Vec<usize>,
}

impl GroupingSpec {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::Invalid(
                "grouping needs at least one positive part".into(),
            ));
        }
        Ok(GroupingSpec { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn m(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Right endpoints `M = {m_1, m_1+m_2, .., m}`.
    pub fn boundary(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.r());
        let mut acc = 0i64;
        for &p in &self.parts {
            acc += p as i64;
            out.push(acc);
        }
        out
    }

    /// `±M`.
    pub fn boundary_pm(&self) -> Vec<i64> {
        let mut out = self.boundary();
        out.extend(self.boundary().iter().map(|&x| -x));
        out
    }

    /// `ψ(k) = m_1 + .. + m_k`, `ψ(−k) = −(m_1 + .. + m_k)`.
    pub fn psi(&self, k: i64) -> i64 {
        let b = self.boundary();
        if k > 0 {
            b[(k - 1) as usize]
        } else {
            -b[(-k - 1) as usize]
        }
    }

    /// The intervals `I_l` as a list of 1-based index blocks.
    pub fn intervals(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.r());
        let mut start = 1usize;
        for &p in &self.parts {
            out.push((start..start + p).collect());
            start += p;
        }
        out
    }

    /// `γ_{m⃗}` as an interval partition of `[m]`.
    pub fn interval_partition(&self) -> Partition {
        Partition::from_blocks(self.m(), self.intervals()).expect("intervals partition [m]")
    }

    /// `γ_{m⃗}` as the permutation with one cycle per interval.
    pub fn interval_permutation(&self) -> crate::perm::Permutation {
        crate::perm::Permutation::gamma_vec(&self.parts)
    }
}

fn check_letters(g: &GroupingSpec, letters: &[Letter]) -> Result<()> {
    if letters.len() != g.m() {
        return Err(Error::SizeMismatch(format!(
            "grouping of m = {} letters, got {}",
            g.m(),
            letters.len()
        )));
    }
    Ok(())
}

/// Classical product formula: `κ_r(A_1,..,A_r) = Σ κ_ρ` over `ρ ∈ NC(m)`
/// with `ρ ∨ γ_{m⃗} = 1_m`.
pub fn product_cumulant(
    g: &GroupingSpec,
    letters: &[Letter],
    table: &CumulantTable,
) -> Result<Rat> {
    check_letters(g, letters)?;
    let gamma_vec = g.interval_partition();
    let mut total = Rat::zero();
    for rho in enumerate_nc_cached(g.m())?.iter() {
        if !rho.as_partition().join(&gamma_vec)?.is_full() {
            continue;
        }
        let mut term = Rat::one();
        for block in rho.blocks() {
            term *= table.kappa(&Word(block.iter().map(|&p| letters[p - 1]).collect()))?;
            if term.is_zero() {
                break;
            }
        }
        total += term;
    }
    Ok(total)
}

/// One surviving term of the infinitesimal product rule.
#[derive(Clone, Debug)]
pub struct Survivor {
    /// Cycle or block notation of the surviving π or σ.
    pub notation: String,
    /// Its contribution to the sum.
    pub value: Rat,
    /// For annular survivors: whether σ is a pairing.
    pub pairing: bool,
}

/// Value and surviving-term breakdown of `κ′_r(A_1,..,A_r)`.
#[derive(Clone, Debug)]
pub struct ProductPrime {
    pub value: Rat,
    /// π ∈ NC(m) passing the `K(π) sep M` filter, with their ∂κ_π values.
    pub disc_survivors: Vec<Survivor>,
    /// σ ∈ S_NC^δ(m,−m) passing the `K^δ(σ) sep ±M` filter (real mode).
    pub annular_survivors: Vec<Survivor>,
}

/// The infinitesimal product rule. In complex mode the annular sum is
/// dropped and the disc filter is the equivalent `π ∨ γ_{m⃗} = 1_m`.
pub fn product_cumulant_prime_explain(
    g: &GroupingSpec,
    letters: &[Letter],
    table: &CumulantTable,
    mode: Mode,
) -> Result<ProductPrime> {
    check_letters(g, letters)?;
    let m = g.m();
    let boundary = g.boundary();
    // the annular cap bounds the whole product rule; report it up front
    let sncd = if mode == Mode::Real {
        Some(annular::sncd_cached(m)?)
    } else {
        None
    };
    let mut value = Rat::zero();
    let mut disc_survivors = Vec::new();
    for pi in enumerate_nc_cached(m)?.iter() {
        if !separates(&pi.kreweras().to_permutation(), &boundary) {
            continue;
        }
        let term = dkappa_pi(pi, letters, table)?;
        value += term.clone();
        disc_survivors.push(Survivor {
            notation: pi.to_string(),
            value: term,
            pairing: false,
        });
    }
    let mut annular_survivors = Vec::new();
    if let Some(sncd) = sncd {
        let pm = g.boundary_pm();
        for sigma in sncd.iter() {
            if !separates(&sigma.kdelta(), &pm) {
                continue;
            }
            let term = kappa_sigma_half(sigma, letters, table)?;
            value += term.clone();
            annular_survivors.push(Survivor {
                notation: sigma.to_string(),
                value: term,
                pairing: sigma.is_pairing(),
            });
        }
    }
    Ok(ProductPrime {
        value,
        disc_survivors,
        annular_survivors,
    })
}

pub fn product_cumulant_prime(
    g: &GroupingSpec,
    letters: &[Letter],
    table: &CumulantTable,
    mode: Mode,
) -> Result<Rat> {
    Ok(product_cumulant_prime_explain(g, letters, table, mode)?.value)
}

/// Complex product formula: `κ′_r = Σ_{π ∨ ρ_r = 1_m} ∂κ_π`.
pub fn complex_product_cumulant_prime(
    g: &GroupingSpec,
    letters: &[Letter],
    table: &CumulantTable,
) -> Result<Rat> {
    check_letters(g, letters)?;
    let gamma_vec = g.interval_partition();
    let mut total = Rat::zero();
    for pi in enumerate_nc_cached(g.m())?.iter() {
        if !pi.as_partition().join(&gamma_vec)?.is_full() {
            continue;
        }
        total += dkappa_pi(pi, letters, table)?;
    }
    Ok(total)
}

/// `δπ_{m⃗}⁻¹δ · π_{m⃗}` on `[±m]`.
fn doubled(pi_m: &NcPartition) -> SignedPermutation {
    let p = pi_m.to_permutation().embed();
    p.conjugate_by_delta()
        .inverse()
        .compose(&p)
        .expect("equal sizes")
}

/// Partitioned-permutation length `|(U, p)| = 2m − (2·#blocks(U) − #cycles(p))`.
fn pp_length(points: usize, blocks: usize, cycles: usize) -> i64 {
    points as i64 - (2 * blocks as i64 - cycles as i64)
}

/// Verification report for the proof's index-set decompositions at one
/// grouping: `NC(m) = N_1 ⊔ N_2`, `S_NC^δ = S_1 ⊔ S_2 ⊔ S_3`, and the two
/// bijection lemmas `N_2 = Ñ_2`, `S_2 = S̃_2`.
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub parts: Vec<usize>,
    pub n1: usize,
    pub n2: usize,
    pub s1: usize,
    pub s2: usize,
    pub s3: usize,
    pub failures: Vec<String>,
}

impl DecompositionReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn decomposition_check(parts: &[usize]) -> Result<DecompositionReport> {
    let g = GroupingSpec::new(parts.to_vec())?;
    let m = g.m();
    let r = g.r();
    let boundary = g.boundary();
    let pm = g.boundary_pm();
    let mut failures = Vec::new();

    // N1 / N2 partition NC(m)
    let nc = enumerate_nc_cached(m)?;
    let mut n1 = Vec::new();
    let mut n2 = Vec::new();
    for pi in nc.iter() {
        let k = pi.kreweras().to_permutation();
        let sep = separates(&k, &boundary);
        let id = crate::nc::restrict_first_return(&k, &boundary).is_identity();
        if sep != id {
            failures.push(format!("separation/first-return mismatch at {pi}"));
        }
        if sep {
            n1.push(pi.clone());
        } else {
            n2.push(pi.clone());
        }
    }

    // tilde-N2: rho <= pi_m for some pi != 1_r with rho^-1 pi_m separating M
    let mut n2_tilde = Vec::new();
    if r >= 1 {
        let ncr = enumerate_nc_cached(r)?;
        for rho in nc.iter() {
            let mut witness = false;
            for pi in ncr.iter() {
                if pi.as_partition().is_full() {
                    continue;
                }
                let pim = pi.blow_up(g.parts())?;
                if !rho.as_partition().refines(pim.as_partition()) {
                    continue;
                }
                let prod = rho
                    .to_permutation()
                    .inverse()
                    .compose(&pim.to_permutation())?;
                if separates(&prod, &boundary) {
                    witness = true;
                    break;
                }
            }
            if witness {
                n2_tilde.push(rho.clone());
            }
        }
    }
    if n2 != n2_tilde {
        failures.push(format!(
            "N2 != tilde-N2: {} vs {} elements",
            n2.len(),
            n2_tilde.len()
        ));
    }

    // S1 / S2 / S3 partition S_NC^delta(m,-m)
    let sncd = annular::sncd_cached(m)?;
    let (mut s1, mut s2, mut s3) = (Vec::new(), Vec::new(), Vec::new());
    for sigma in sncd.iter() {
        let k = sigma.kdelta();
        let restriction = crate::nc::restrict_first_return(&k, &pm);
        if separates(&k, &pm) != restriction.is_identity() {
            failures.push(format!("annular separation mismatch at {sigma}"));
        }
        if restriction.is_identity() {
            s1.push(sigma.clone());
        } else if restriction.has_through_cycle() {
            s3.push(sigma.clone());
        } else {
            s2.push(sigma.clone());
        }
    }

    // tilde-S2 via the partitioned-permutation inequality
    let slot = |x: i64| -> usize {
        if x > 0 {
            (x - 1) as usize
        } else {
            m + (-x - 1) as usize
        }
    };
    let sigma_cycles: Vec<Vec<Vec<i64>>> = sncd.iter().map(|s| s.sigma().cycles()).collect();
    let mut witnesses = vec![0usize; sncd.len()];
    let ncr = enumerate_nc_cached(r)?;
    for pi in ncr.iter() {
        if pi.as_partition().is_full() {
            continue;
        }
        let pim = pi.blow_up(g.parts())?;
        let pim_perm = pim.to_permutation();
        let sigma_hat = doubled(&pim);
        let sigma_hat_cycles = sigma_hat.cycle_count();
        for v in pi.blocks() {
            // U_V: cycles of sigma_hat with V_m and delta(V_m) joined
            let mut uf = UnionFind::new(2 * m);
            for c in sigma_hat.cycles() {
                for w in c.windows(2) {
                    uf.union(slot(w[0]), slot(w[1]));
                }
            }
            let vm: Vec<usize> = v
                .iter()
                .flat_map(|&k| g.intervals()[k - 1].clone())
                .collect();
            for w in vm.windows(2) {
                uf.union(w[0] - 1, w[1] - 1);
                uf.union(m + w[0] - 1, m + w[1] - 1);
            }
            uf.union(vm[0] - 1, m + vm[0] - 1);
            let u_blocks = uf.component_count();
            let roots: Vec<usize> = (0..2 * m).map(|x| uf.find(x)).collect();

            for (si, sigma) in sncd.iter().enumerate() {
                // every cycle of tau inside a block of U_V
                let tau = sigma.sigma();
                let contained = sigma_cycles[si]
                    .iter()
                    .all(|c| c.iter().all(|&x| roots[slot(x)] == roots[slot(c[0])]));
                if !contained {
                    continue;
                }

                // (0_tau, tau) <= (U_V, sigma_hat): some (V2, pi2) with
                // pi2 = tau^-1 sigma_hat completes the product, i.e.
                // |(U, sigma_hat)| = |tau| + |(V2, pi2)| with
                // cycles(pi2) <= V2 and cycles(tau) v V2 = U_V. The length
                // fixes the number of merges of pi2-cycles forming V2; a
                // valid V2 exists iff that count lies between the merges
                // needed to reach U_V in the join and the total available.
                let pi2 = tau.inverse().compose(&sigma_hat)?;
                let excess = pp_length(2 * m, u_blocks, sigma_hat_cycles)
                    - tau.length() as i64
                    - pi2.length() as i64;
                if excess < 0 || excess % 2 != 0 {
                    continue;
                }
                let merges = excess / 2;
                let mut jf = UnionFind::new(2 * m);
                for c in sigma_cycles[si].iter().chain(pi2.cycles().iter()) {
                    for w in c.windows(2) {
                        jf.union(slot(w[0]), slot(w[1]));
                    }
                }
                let j_blocks = jf.component_count() as i64;
                let min_merges = j_blocks - u_blocks as i64;
                let max_merges = pi2.cycle_count() as i64 - u_blocks as i64;
                if merges < min_merges || merges > max_merges {
                    continue;
                }

                // relative Kreweras separation
                let krel = annular::relative_kreweras(tau, &pim_perm)?;
                if separates(&krel, &pm) {
                    witnesses[si] += 1;
                }
            }
        }
    }
    let mut s2_tilde = Vec::new();
    for (si, sigma) in sncd.iter().enumerate() {
        if witnesses[si] == 1 {
            s2_tilde.push(sigma.clone());
        } else if witnesses[si] > 1 {
            failures.push(format!("non-unique (pi, V) witness for {sigma}"));
        }
    }
    let s2_strings: Vec<String> = s2.iter().map(|s| s.to_string()).collect();
    let s2_tilde_strings: Vec<String> = s2_tilde.iter().map(|s| s.to_string()).collect();
    if s2_strings != s2_tilde_strings {
        failures.push(format!(
            "S2 != tilde-S2: {} vs {} elements",
            s2.len(),
            s2_tilde.len()
        ));
    }

    Ok(DecompositionReport {
        parts: parts.to_vec(),
        n1: n1.len(),
        n2: n2.len(),
        s1: s1.len(),
        s2: s2.len(),
        s3: s3.len(),
        failures,
    })
}

/// All compositions of `m` (ordered tuples of positive parts).
pub fn compositions(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(rest: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(current.clone());
            return;
        }
        for first in 1..=rest {
            current.push(first);
            rec(rest - first, current, out);
            current.pop();
        }
    }
    rec(m, &mut Vec::new(), &mut out);
    out
}
