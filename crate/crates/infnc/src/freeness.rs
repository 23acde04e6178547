//! Free products of marginal cumulant data, and verification of the
//! definitional conditions of real infinitesimal freeness.
//!
//! The construction goes through cumulants: the joint `κ` and `κ′` agree
//! with the marginals on single-label tuples and vanish on mixed tuples.
//! `κ̇` is never free data; the annular sums recompute it from the joint
//! `κ`, which is where the mixed `τ′` terms come from. Moments are then
//! rebuilt through the moment-cumulant formulas.

use crate::cumulant::{
    infinitesimal_cumulants_from_distribution, tau_from_cumulants, tau_prime_from_cumulants,
    CumulantTable, Mode,
};
use crate::dist::{Distribution, SymmetryFlags};
use crate::error::{Error, Result};
use crate::word::{Letter, Rat, Word, WordPoly};
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Labelled marginals with disjoint letters in the joint alphabet.
pub struct MarginalFamily {
    marginals: Vec<(String, CumulantTable)>,
}

impl MarginalFamily {
    pub fn new() -> Self {
        MarginalFamily {
            marginals: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, table: CumulantTable) -> Result<()> {
        let label = label.into();
        if self.marginals.iter().any(|(l, _)| *l == label) {
            return Err(Error::Invalid(format!("duplicate marginal label {label:?}")));
        }
        self.marginals.push((label, table));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.marginals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marginals.is_empty()
    }

    pub fn marginals(&self) -> &[(String, CumulantTable)] {
        &self.marginals
    }
}

impl Default for MarginalFamily {
    fn default() -> Self {
        Self::new()
    }
}

/// Joint letter index → subalgebra label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterLabeling(pub BTreeMap<usize, String>);

impl LetterLabeling {
    pub fn label_of(&self, letter: usize) -> Option<&str> {
        self.0.get(&letter).map(|s| s.as_str())
    }

    /// The single label of the word, or `None` if mixed (the empty word has
    /// no label either).
    pub fn single_label(&self, w: &Word) -> Option<&str> {
        let mut labels = w.letters().iter().map(|l| self.label_of(l.index));
        let first = labels.next()??;
        for l in labels {
            if l? != first {
                return None;
            }
        }
        Some(first)
    }

    pub fn letters_of(&self, label: &str) -> Vec<usize> {
        self.0
            .iter()
            .filter(|(_, l)| l.as_str() == label)
            .map(|(&i, _)| i)
            .collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.0.values().map(|s| s.as_str()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let map: BTreeMap<String, String> = self
            .0
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        std::fs::write(path, serde_json::to_string_pretty(&map)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let map: BTreeMap<String, String> =
            serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let mut out = BTreeMap::new();
        for (k, v) in map {
            let idx: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad letter index {k:?}")))?;
            out.insert(idx, v);
        }
        Ok(LetterLabeling(out))
    }
}

/// The free product: joint `(τ, τ′)` on the disjoint union of the marginal
/// alphabets, built from vanishing mixed cumulants. Also returns the joint
/// cumulant table and the letter labeling.
pub fn free_product(
    family: &MarginalFamily,
    degree: usize,
) -> Result<(Distribution, CumulantTable, LetterLabeling)> {
    if family.is_empty() {
        return Err(Error::Invalid("free product of no marginals".into()));
    }
    // relabel marginal letters into a disjoint joint alphabet
    let mut labeling = BTreeMap::new();
    let mut joint_flags = SymmetryFlags::tracial_symmetric();
    let mut maps: Vec<(String, BTreeMap<usize, usize>)> = Vec::new(); // joint <- marginal
    let mut next = 1usize;
    for (label, table) in family.marginals() {
        if !table.flags().tracial || !table.flags().transpose_symmetric {
            return Err(Error::NeedsSymmetry("free products of marginal tables"));
        }
        let mut map = BTreeMap::new();
        for &i in &table.letter_indices() {
            labeling.insert(next, label.clone());
            map.insert(next, i);
            if table.flags().symmetric_letters.contains(&i) {
                joint_flags.symmetric_letters.insert(next);
            }
            next += 1;
        }
        maps.push((label.clone(), map));
    }
    let labeling = LetterLabeling(labeling);

    // joint cumulants: marginal on single-label tuples, zero on mixed ones
    let mut joint = CumulantTable::new(degree, joint_flags.clone(), false);
    let probe = Distribution::new(degree, joint_flags.clone(), true);
    let letters: std::collections::BTreeSet<usize> = labeling.0.keys().copied().collect();
    let words = probe.canonical_words(&letters);
    for w in &words {
        let (kappa, kappa_prime) = match labeling.single_label(w) {
            Some(label) => {
                let (_, map) = maps.iter().find(|(l, _)| l == label).unwrap();
                let back = Word(
                    w.letters()
                        .iter()
                        .map(|l| Letter {
                            index: map[&l.index],
                            transposed: l.transposed,
                        })
                        .collect(),
                );
                let table = &family
                    .marginals()
                    .iter()
                    .find(|(l, _)| l == label)
                    .unwrap()
                    .1;
                (table.kappa(&back)?, table.kappa_prime(&back)?)
            }
            None => (Rat::zero(), Rat::zero()),
        };
        joint.insert_kappa(w, kappa)?;
        joint.insert_kappa_prime(w, kappa_prime)?;
    }

    // rebuild the joint moments
    let mut dist = Distribution::new(degree, joint_flags, false);
    for w in &words {
        dist.insert_tau(w.clone(), tau_from_cumulants(w, &joint)?)?;
        dist.insert_tau_prime(w.clone(), tau_prime_from_cumulants(w, &joint, Mode::Real)?)?;
    }
    Ok((dist, joint, labeling))
}

/// `word − τ(word)·1` as a formal combination.
pub fn center(word: &Word, dist: &Distribution) -> Result<WordPoly> {
    Ok(WordPoly::from_word(word.clone()).sub_scalar(&dist.tau(word)?))
}

#[derive(Clone, Debug, Default)]
pub struct FreenessReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl FreenessReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

fn eval_tau(p: &WordPoly, dist: &Distribution) -> Result<Rat> {
    p.eval(|w| dist.tau(w))
}

fn eval_tau_prime(p: &WordPoly, dist: &Distribution) -> Result<Rat> {
    p.eval(|w| dist.tau_prime(w))
}

fn product_all(elems: &[WordPoly]) -> WordPoly {
    elems
        .iter()
        .fold(WordPoly::unit(), |acc, e| acc.mul(e))
}

/// Centered single-label monomials of one label, with their degrees.
type LabelElements = (String, Vec<(WordPoly, usize)>);

/// Centered single-label monomials of each label, up to the per-element
/// degree cap.
fn centered_elements(
    dist: &Distribution,
    labeling: &LetterLabeling,
    element_degree_cap: usize,
) -> Result<Vec<LabelElements>> {
    let mut out = Vec::new();
    for label in labeling.labels() {
        let letters = labeling.letters_of(label);
        let mut elems: Vec<(WordPoly, usize)> = Vec::new();
        let mut alphabet: Vec<Letter> = Vec::new();
        for &i in &letters {
            alphabet.push(Letter::new(i));
            if !dist.flags().symmetric_letters.contains(&i) {
                alphabet.push(Letter::transposed(i));
            }
        }
        let mut stack: Vec<Letter> = Vec::new();
        fn rec(
            alphabet: &[Letter],
            cap: usize,
            stack: &mut Vec<Letter>,
            dist: &Distribution,
            elems: &mut Vec<(WordPoly, usize)>,
        ) -> Result<()> {
            if !stack.is_empty() {
                let w = Word(stack.clone());
                elems.push((center(&w, dist)?, w.len()));
            }
            if stack.len() == cap {
                return Ok(());
            }
            for &l in alphabet {
                stack.push(l);
                rec(alphabet, cap, stack, dist, elems)?;
                stack.pop();
            }
            Ok(())
        }
        rec(&alphabet, element_degree_cap, &mut stack, dist, &mut elems)?;
        out.push((label.to_string(), elems));
    }
    Ok(out)
}

fn alternating_sequences(
    by_label: &[LabelElements],
    min_len: usize,
    max_len: usize,
    total_degree_cap: usize,
    cyclic: bool,
) -> Vec<Vec<(usize, usize)>> {
    // sequences of (label index, element index)
    let mut out = Vec::new();
    let mut current: Vec<(usize, usize)> = Vec::new();
    fn rec(
        by_label: &[LabelElements],
        min_len: usize,
        max_len: usize,
        budget: usize,
        cyclic: bool,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if current.len() >= min_len {
            let ok_cyclic = !cyclic || current[0].0 != current.last().unwrap().0;
            if ok_cyclic {
                out.push(current.clone());
            }
        }
        if current.len() == max_len {
            return;
        }
        for (li, (_, elems)) in by_label.iter().enumerate() {
            if let Some(&(prev, _)) = current.last() {
                if prev == li {
                    continue;
                }
            }
            for (ei, (_, deg)) in elems.iter().enumerate() {
                if *deg > budget {
                    continue;
                }
                current.push((li, ei));
                rec(by_label, min_len, max_len, budget - deg, cyclic, current, out);
                current.pop();
            }
        }
    }
    rec(
        by_label,
        min_len,
        max_len,
        total_degree_cap,
        cyclic,
        &mut current,
        &mut out,
    );
    out
}

/// Check conditions (i)–(iv) of the definition of real infinitesimal
/// freeness on alternating sequences of centered single-label monomials.
/// Element degree is capped at 3, sequence length at 6, and total degree at
/// the distribution's bound.
pub fn check_definition(
    dist: &Distribution,
    labeling: &LetterLabeling,
) -> Result<FreenessReport> {
    let by_label = centered_elements(dist, labeling, 3)?;
    let seqs = alternating_sequences(&by_label, 2, 6, dist.degree(), false);
    let mut report = FreenessReport::default();
    for seq in seqs {
        let elems: Vec<&WordPoly> = seq
            .iter()
            .map(|&(li, ei)| &by_label[li].1[ei].0)
            .collect();
        let n = elems.len();
        let owned: Vec<WordPoly> = elems.iter().map(|e| (*e).clone()).collect();
        let prod = product_all(&owned);
        report.checked += 1;

        // (i) tau vanishes on alternating centered words
        let tau_val = eval_tau(&prod, dist)?;
        if !tau_val.is_zero() {
            report
                .violations
                .push(format!("(i) tau != 0 at sequence {seq:?}: {tau_val}"));
        }

        let tp = eval_tau_prime(&prod, dist)?;
        if n == 2 {
            // (ii)
            if !tp.is_zero() {
                report
                    .violations
                    .push(format!("(ii) tau' != 0 at sequence {seq:?}: {tp}"));
            }
            continue;
        }

        // time-derivative term tau(a_1 tau'(a_2..a_{n-1}) a_n)
        let mid = product_all(&owned[1..n - 1]);
        let outer = owned[0].mul(owned.last().unwrap());
        let time_term = eval_tau_prime(&mid, dist)? * eval_tau(&outer, dist)?;

        let expected = if n % 2 == 1 {
            // (iii) n = 2k-1: space term tau(a_1 a_k^t a_n) prod tau(a_i a_{k+i-1}^t)
            let k = n.div_ceil(2);
            let mut space = eval_tau(
                &owned[0]
                    .mul(&owned[k - 1].transpose())
                    .mul(&owned[n - 1]),
                dist,
            )?;
            for i in 2..=k - 1 {
                space *= eval_tau(&owned[i - 1].mul(&owned[k + i - 2].transpose()), dist)?;
            }
            time_term + space
        } else {
            // (iv) n = 2k: space term prod_{i=1..k} tau(a_i a_{k+i}^t)
            let k = n / 2;
            let mut space = Rat::one();
            for i in 1..=k {
                space *= eval_tau(&owned[i - 1].mul(&owned[k + i - 1].transpose()), dist)?;
            }
            time_term + space
        };
        if tp != expected {
            report.violations.push(format!(
                "({}) tau' mismatch at sequence {seq:?}: got {tp}, expected {expected}",
                if n % 2 == 1 { "iii" } else { "iv" }
            ));
        }
    }
    Ok(report)
}

/// Check the tracial cyclically-alternating form: `τ′ = 0` for `n = 2` or
/// odd, and `τ′ = Π τ(a_i a_{k+i}^t)` for even `n = 2k ≥ 4`.
pub fn check_cyclic_form(
    dist: &Distribution,
    labeling: &LetterLabeling,
) -> Result<FreenessReport> {
    if !dist.flags().tracial {
        return Err(Error::NeedsSymmetry("the cyclically alternating form"));
    }
    let by_label = centered_elements(dist, labeling, 3)?;
    let seqs = alternating_sequences(&by_label, 2, 6, dist.degree(), true);
    let mut report = FreenessReport::default();
    for seq in seqs {
        let owned: Vec<WordPoly> = seq
            .iter()
            .map(|&(li, ei)| by_label[li].1[ei].0.clone())
            .collect();
        let n = owned.len();
        let prod = product_all(&owned);
        report.checked += 1;
        let tp = eval_tau_prime(&prod, dist)?;
        if n == 2 || n % 2 == 1 {
            if !tp.is_zero() {
                report
                    .violations
                    .push(format!("cyclic (i) tau' != 0 at {seq:?}: {tp}"));
            }
        } else {
            let k = n / 2;
            let mut space = Rat::one();
            for i in 1..=k {
                space *= eval_tau(&owned[i - 1].mul(&owned[k + i - 1].transpose()), dist)?;
            }
            if tp != space {
                report.violations.push(format!(
                    "cyclic (ii) mismatch at {seq:?}: got {tp}, expected {space}"
                ));
            }
        }
    }
    Ok(report)
}

/// Extract cumulants from a joint distribution and verify that mixed `κ`
/// and `κ′` vanish identically.
pub fn check_mixed_cumulants_vanish(
    dist: &Distribution,
    labeling: &LetterLabeling,
) -> Result<FreenessReport> {
    let table = infinitesimal_cumulants_from_distribution(dist, Mode::Real)?;
    let mut report = FreenessReport::default();
    for w in dist.canonical_words(&dist.letter_indices()) {
        if labeling.single_label(&w).is_some() {
            continue;
        }
        report.checked += 1;
        let k = table.kappa(&w)?;
        if !k.is_zero() {
            report
                .violations
                .push(format!("mixed kappa({w}) = {k} != 0"));
        }
        let kp = table.kappa_prime(&w)?;
        if !kp.is_zero() {
            report
                .violations
                .push(format!("mixed kappa'({w}) = {kp} != 0"));
        }
    }
    Ok(report)
}
