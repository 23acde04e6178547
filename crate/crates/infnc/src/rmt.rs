//! Monte Carlo harness: GOE, real Wishart and Haar-orthogonal samplers,
//! expected-trace estimation, 1/N regression for infinitesimal moments, and
//! numerical checks of the integration-by-parts identity and of asymptotic
//! real infinitesimal freeness against the exact predictions.
//!
//! Estimates are reproducible: samples are split over a fixed number of RNG
//! substreams (independent of the worker count) and partial sums are always
//! combined in stream order.

use crate::cumulant::CumulantTable;
use crate::dist::parse_rational;
use crate::error::{Error, Result};
use crate::freeness::{free_product, MarginalFamily};
use crate::word::Rat;
use nalgebra::DMatrix;
use num::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// A fixed matrix used by the deterministic ensembles.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DeterministicSource {
    Identity,
    /// Entries i.i.d. standard normal from the given seed, optionally
    /// symmetrized as `(A + A^t)/2`.
    Gaussian { seed: u64, symmetric: bool },
}

impl DeterministicSource {
    pub fn build(&self, n: usize) -> DMatrix<f64> {
        match self {
            DeterministicSource::Identity => DMatrix::identity(n, n),
            DeterministicSource::Gaussian { seed, symmetric } => {
                let mut rng = ChaCha12Rng::seed_from_u64(*seed);
                let a = gaussian_matrix(n, n, &mut rng);
                if *symmetric {
                    (&a + a.transpose()) * 0.5
                } else {
                    a
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    /// `X = (G + G^t)/sqrt(2N)`, so `E[tr X²] = 1 + 1/N` exactly.
    Goe,
    /// `W = G G^t / M` with `G` of shape `N×M`, `M = round(N/c)`; `c` is a
    /// rational string. `centered` subtracts the limit mean `1`.
    Wishart {
        c: String,
        #[serde(default)]
        centered: bool,
    },
    /// `O A O^t` with `A` fixed and `O` fresh Haar-orthogonal per draw.
    HaarConjugatedDeterministic { source: DeterministicSource },
    /// The fixed matrix `A` itself.
    Deterministic { source: DeterministicSource },
}

impl EnsembleSpec {
    /// Exact limit cumulant table, when one is known.
    pub fn limit_table(&self, degree: usize) -> Result<CumulantTable> {
        match self {
            EnsembleSpec::Goe => Ok(CumulantTable::semicircular(degree)),
            EnsembleSpec::Wishart { c, centered } => {
                let c: Rat = parse_rational(c)?;
                Ok(CumulantTable::free_poisson(&c, degree, *centered))
            }
            _ => Err(Error::Invalid(
                "no closed-form limit table for deterministic ensembles".into(),
            )),
        }
    }
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// GOE: `X = (G + G^t)/sqrt(2N)` with `G` i.i.d. standard normal.
pub fn sample_goe(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = gaussian_matrix(n, n, rng);
    (&g + g.transpose()) / (2.0 * n as f64).sqrt()
}

/// Haar-orthogonal matrix: QR of a Gaussian matrix with the sign correction
/// that makes the diagonal of R positive (unique factorization, unbiased).
pub fn sample_haar_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Columns for a Wishart of aspect ratio `c`: `M = round(N/c)`.
pub fn wishart_columns(n: usize, c_num: u64, c_den: u64) -> usize {
    ((n as f64) * (c_den as f64) / (c_num as f64)).round() as usize
}

/// Real Wishart `W = G G^t / M`, `G` of shape `N×M`; `E[tr W] = 1` exactly.
pub fn sample_wishart(n: usize, m: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = gaussian_matrix(n, m, rng);
    let w = &g * g.transpose();
    w / m as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEstimate {
    /// Mean of `Tr(word)`.
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub n: usize,
}

impl TraceEstimate {
    /// The normalized-trace view `tr = Tr/N`.
    pub fn normalized(&self) -> (f64, f64) {
        (self.mean / self.n as f64, self.std_error / self.n as f64)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct McConfig {
    pub seed: u64,
    pub samples: usize,
    pub workers: usize,
    /// Fixed substream count; estimates do not depend on `workers`.
    pub streams: usize,
}

impl McConfig {
    pub fn new(seed: u64, samples: usize) -> Self {
        McConfig {
            seed,
            samples,
            workers: std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1),
            streams: 64,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

/// A word over ensemble letters: `(index into the ensemble list, transposed)`.
pub type ResolvedWord = Vec<(usize, bool)>;

/// Parse `"a b^t a"` against a letter list.
pub fn resolve_word(word: &str, letters: &[String]) -> Result<ResolvedWord> {
    word.split_whitespace()
        .map(|tok| {
            let (name, t) = match tok.strip_suffix("^t") {
                Some(base) => (base, true),
                None => (tok, false),
            };
            letters
                .iter()
                .position(|l| l == name)
                .map(|i| (i, t))
                .ok_or_else(|| Error::Parse(format!("unknown ensemble letter {name:?}")))
        })
        .collect()
}

struct DrawContext {
    samples: Vec<DMatrix<f64>>,
    powers: HashMap<(usize, u8), DMatrix<f64>>,
}

impl DrawContext {
    fn power(&mut self, letter: usize, k: u8) -> DMatrix<f64> {
        if k == 1 {
            return self.samples[letter].clone();
        }
        if let Some(p) = self.powers.get(&(letter, k)) {
            return p.clone();
        }
        let lower = self.power(letter, k - 1);
        let p = &lower * &self.samples[letter];
        self.powers.insert((letter, k), p.clone());
        p
    }
}

fn trace_prod(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut t = 0.0;
    for i in 0..n {
        for j in 0..n {
            t += a[(i, j)] * b[(j, i)];
        }
    }
    t
}

fn trace_word(ctx: &mut DrawContext, word: &ResolvedWord, n: usize) -> f64 {
    if word.is_empty() {
        return n as f64;
    }
    // compress into runs of one letter
    let mut runs: Vec<(usize, bool, u8)> = Vec::new();
    for &(l, t) in word {
        match runs.last_mut() {
            Some((pl, pt, c)) if *pl == l && *pt == t => *c += 1,
            _ => runs.push((l, t, 1)),
        }
    }
    if runs.len() == 1 {
        // Tr(X^k) (transposition does not change the trace of a power)
        let (l, _, c) = runs[0];
        if c == 1 {
            return ctx.samples[l].trace();
        }
        let a = ctx.power(l, c / 2);
        let b = ctx.power(l, c - c / 2);
        return trace_prod(&a, &b);
    }
    let mats: Vec<DMatrix<f64>> = runs
        .iter()
        .map(|&(l, t, c)| {
            let p = ctx.power(l, c);
            if t {
                p.transpose()
            } else {
                p
            }
        })
        .collect();
    let mut prefix = mats[0].clone();
    for m in &mats[1..mats.len() - 1] {
        prefix = &prefix * m;
    }
    trace_prod(&prefix, &mats[mats.len() - 1])
}

fn draw_samples(
    ensembles: &[EnsembleSpec],
    fixed: &[Option<DMatrix<f64>>],
    n: usize,
    rng: &mut impl Rng,
) -> Vec<DMatrix<f64>> {
    ensembles
        .iter()
        .enumerate()
        .map(|(i, spec)| match spec {
            EnsembleSpec::Goe => sample_goe(n, rng),
            EnsembleSpec::Wishart { c, centered } => {
                let c = parse_rational(c).expect("validated earlier");
                let (num, den) = (
                    c.numer().to_u64().expect("small aspect ratio"),
                    c.denom().to_u64().expect("small aspect ratio"),
                );
                let mut w = sample_wishart(n, wishart_columns(n, num, den), rng);
                if *centered {
                    for d in 0..n {
                        w[(d, d)] -= 1.0;
                    }
                }
                w
            }
            EnsembleSpec::HaarConjugatedDeterministic { .. } => {
                let o = sample_haar_orthogonal(n, rng);
                let a = fixed[i].as_ref().expect("fixed matrix prepared");
                &o * a * o.transpose()
            }
            EnsembleSpec::Deterministic { .. } => fixed[i].as_ref().unwrap().clone(),
        })
        .collect()
}

fn prepare_fixed(ensembles: &[EnsembleSpec], n: usize) -> Vec<Option<DMatrix<f64>>> {
    ensembles
        .iter()
        .map(|spec| match spec {
            EnsembleSpec::HaarConjugatedDeterministic { source }
            | EnsembleSpec::Deterministic { source } => Some(source.build(n)),
            _ => None,
        })
        .collect()
}

fn stream_counts(samples: usize, streams: usize) -> Vec<usize> {
    let s = streams.clamp(1, samples.max(1));
    (0..s)
        .map(|i| samples / s + usize::from(i < samples % s))
        .collect()
}

fn run_streams<T, F>(cfg: &McConfig, per_stream: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize, ChaCha12Rng) -> T + Sync,
{
    let counts = stream_counts(cfg.samples, cfg.streams);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        counts
            .par_iter()
            .enumerate()
            .map(|(idx, &count)| {
                let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
                rng.set_stream(idx as u64 + 1);
                per_stream(idx, count, rng)
            })
            .collect()
    })
}

/// Estimate `E[Tr(word)]` for several words over shared draws.
pub fn mc_expected_traces(
    ensembles: &[EnsembleSpec],
    words: &[ResolvedWord],
    n: usize,
    cfg: &McConfig,
) -> Vec<TraceEstimate> {
    let fixed = prepare_fixed(ensembles, n);
    let partials = run_streams(cfg, |_, count, mut rng| {
        let mut sums = vec![0.0f64; words.len()];
        let mut sq = vec![0.0f64; words.len()];
        for _ in 0..count {
            let samples = draw_samples(ensembles, &fixed, n, &mut rng);
            let mut ctx = DrawContext {
                samples,
                powers: HashMap::new(),
            };
            for (w, word) in words.iter().enumerate() {
                let v = trace_word(&mut ctx, word, n);
                sums[w] += v;
                sq[w] += v * v;
            }
        }
        (sums, sq)
    });
    let mut sums = vec![0.0f64; words.len()];
    let mut sq = vec![0.0f64; words.len()];
    for (s, q) in partials {
        for w in 0..words.len() {
            sums[w] += s[w];
            sq[w] += q[w];
        }
    }
    let count = cfg.samples as f64;
    words
        .iter()
        .enumerate()
        .map(|(w, _)| {
            let mean = sums[w] / count;
            let var = ((sq[w] - sums[w] * sums[w] / count) / (count - 1.0)).max(0.0);
            TraceEstimate {
                mean,
                std_error: (var / count).sqrt(),
                samples: cfg.samples,
                n,
            }
        })
        .collect()
}

pub fn mc_expected_trace(
    ensembles: &[EnsembleSpec],
    word: &ResolvedWord,
    n: usize,
    cfg: &McConfig,
) -> TraceEstimate {
    mc_expected_traces(ensembles, std::slice::from_ref(word), n, cfg)
        .pop()
        .unwrap()
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub word: String,
    /// Intercept of the `1/N` expansion of `E[tr]` and its standard error.
    pub tau: (f64, f64),
    /// Coefficient of `1/N` and its standard error.
    pub tau_prime: (f64, f64),
    pub points: Vec<TraceEstimate>,
}

/// Weighted least squares of `E[tr]` against `1 + β/N + γ/N²`; `τ̂` is the
/// intercept, `τ̂′` the `1/N` coefficient.
pub fn infinitesimal_fit(
    ensembles: &[EnsembleSpec],
    word: &ResolvedWord,
    word_name: &str,
    n_list: &[usize],
    cfg: &McConfig,
) -> Result<FitResult> {
    if n_list.len() < 3 {
        return Err(Error::Invalid(
            "the infinitesimal fit needs at least three dimensions".into(),
        ));
    }
    let points: Vec<TraceEstimate> = n_list
        .iter()
        .map(|&n| mc_expected_trace(ensembles, word, n, cfg))
        .collect();
    fit_points(word_name, points)
}

pub fn fit_points(word_name: &str, points: Vec<TraceEstimate>) -> Result<FitResult> {
    let k = 3usize;
    let mut xtwx = DMatrix::<f64>::zeros(k, k);
    let mut xtwy = DMatrix::<f64>::zeros(k, 1);
    for p in &points {
        let (y, se) = p.normalized();
        let x = 1.0 / p.n as f64;
        let weight = 1.0 / (se * se);
        let row = [1.0, x, x * x];
        for i in 0..k {
            for j in 0..k {
                xtwx[(i, j)] += weight * row[i] * row[j];
            }
            xtwy[(i, 0)] += weight * row[i] * y;
        }
    }
    let cov = xtwx.try_inverse().ok_or_else(|| {
        Error::Invalid("singular design matrix in the infinitesimal fit".into())
    })?;
    let beta = &cov * xtwy;
    Ok(FitResult {
        word: word_name.to_string(),
        tau: (beta[(0, 0)], cov[(0, 0)].sqrt()),
        tau_prime: (beta[(1, 0)], cov[(1, 1)].sqrt()),
        points,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IbpReport {
    pub n_matrices: usize,
    pub dim: usize,
    pub samples: usize,
    pub lhs_mean: f64,
    pub lhs_std_error: f64,
    pub rhs_mean: f64,
    pub diff_mean: f64,
    pub diff_std_error: f64,
    /// `|LHS − RHS|` in units of the standard error of the difference.
    pub sigmas: f64,
}

impl IbpReport {
    pub fn pass(&self, tol_sigma: f64) -> bool {
        self.sigmas < tol_sigma
    }
}

/// Per-sample evaluation of both sides of the integration-by-parts identity
/// for the word `O M_1 O^t · M_2 · O M_3 O^t ⋯ O M_{n−1} O^t · M_n`.
fn ibp_sides(ms: &[DMatrix<f64>], o: &DMatrix<f64>) -> (f64, f64) {
    let n = ms.len();
    let dim = ms[0].nrows();
    let w: Vec<DMatrix<f64>> = ms
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if i % 2 == 0 {
                o * m * o.transpose()
            } else {
                m.clone()
            }
        })
        .collect();
    // prefixes[i] = W_1 .. W_i, suffixes[i] = W_i .. W_n (1-based)
    let mut prefixes: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let next = if i == 0 {
            w[0].clone()
        } else {
            &prefixes[i - 1] * &w[i]
        };
        prefixes.push(next);
    }
    let mut suffixes: Vec<DMatrix<f64>> = vec![DMatrix::zeros(0, 0); n];
    for i in (0..n).rev() {
        suffixes[i] = if i == n - 1 {
            w[i].clone()
        } else {
            &w[i] * &suffixes[i + 1]
        };
    }
    let lhs = (dim as f64 - 1.0) * prefixes[n - 1].trace();
    let mut rhs = 0.0;
    for k in (1..n).step_by(2) {
        // k odd (1-based): prefix through O M_k O^t, suffix from M_{k+1}
        rhs -= trace_prod(&prefixes[k - 1], &suffixes[k].transpose());
        rhs += prefixes[k - 1].trace() * suffixes[k].trace();
        if k >= 3 {
            // prefix through M_{k-1}, suffix from O M_k O^t
            rhs += trace_prod(&prefixes[k - 2], &suffixes[k - 1].transpose());
            rhs -= prefixes[k - 2].trace() * suffixes[k - 1].trace();
        }
    }
    (lhs, rhs)
}

/// Monte Carlo check of the integration-by-parts identity with fixed
/// matrices `ms` (their count must be even). Both sides share the Haar
/// samples; `transpose_o` replaces every `O` by `O^t` (an invariance check).
pub fn verify_ibp(
    ms: &[DMatrix<f64>],
    cfg: &McConfig,
    transpose_o: bool,
) -> Result<IbpReport> {
    if ms.is_empty() || !ms.len().is_multiple_of(2) {
        return Err(Error::Invalid(
            "integration by parts needs an even number of matrices".into(),
        ));
    }
    let dim = ms[0].nrows();
    if ms.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
        return Err(Error::SizeMismatch("ibp matrices must be square, same size".into()));
    }
    let partials = run_streams(cfg, |_, count, mut rng| {
        let (mut sl, mut slsq, mut sr, mut sd, mut sdsq) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..count {
            let mut o = sample_haar_orthogonal(dim, &mut rng);
            if transpose_o {
                o = o.transpose();
            }
            let (lhs, rhs) = ibp_sides(ms, &o);
            sl += lhs;
            slsq += lhs * lhs;
            sr += rhs;
            let d = lhs - rhs;
            sd += d;
            sdsq += d * d;
        }
        (sl, slsq, sr, sd, sdsq)
    });
    let (mut sl, mut slsq, mut sr, mut sd, mut sdsq) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, asq, b, c, d) in partials {
        sl += a;
        slsq += asq;
        sr += b;
        sd += c;
        sdsq += d;
    }
    let count = cfg.samples as f64;
    let diff_mean = sd / count;
    let var = ((sdsq - sd * sd / count) / (count - 1.0)).max(0.0);
    let diff_se = (var / count).sqrt();
    let lhs_var = ((slsq - sl * sl / count) / (count - 1.0)).max(0.0);
    Ok(IbpReport {
        n_matrices: ms.len(),
        dim,
        samples: cfg.samples,
        lhs_mean: sl / count,
        lhs_std_error: (lhs_var / count).sqrt(),
        rhs_mean: sr / count,
        diff_mean,
        diff_std_error: diff_se,
        sigmas: if diff_se > 0.0 {
            diff_mean.abs() / diff_se
        } else {
            0.0
        },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FreenessCheckResult {
    pub word: String,
    pub predicted_tau: f64,
    pub predicted_tau_prime: f64,
    pub fit: FitResult,
    pub tau_sigmas: f64,
    pub tau_prime_sigmas: f64,
}

impl FreenessCheckResult {
    pub fn pass(&self, tol_sigma: f64) -> bool {
        self.tau_sigmas < tol_sigma && self.tau_prime_sigmas < tol_sigma
    }
}

/// Exact `(τ, τ′)` prediction for a word over independent ensembles, via the
/// free product of their limit tables.
pub fn predict_free(
    ensembles: &[EnsembleSpec],
    letters: &[String],
    word: &ResolvedWord,
) -> Result<(Rat, Rat)> {
    let degree = word.len();
    let mut family = MarginalFamily::new();
    for (name, spec) in letters.iter().zip(ensembles) {
        family.push(name.clone(), spec.limit_table(degree)?)?;
    }
    let (dist, _, _) = free_product(&family, degree)?;
    // marginal order gives joint letters 1..s in sequence
    let joint = crate::word::Word(
        word.iter()
            .map(|&(i, t)| crate::word::Letter {
                index: i + 1,
                transposed: t,
            })
            .collect(),
    );
    Ok((dist.tau(&joint)?, dist.tau_prime(&joint)?))
}

/// Fit the infinitesimal law of each word and compare against the exact
/// free-product prediction.
pub fn verify_asymptotic_freeness(
    ensembles: &[EnsembleSpec],
    letters: &[String],
    words: &[(String, ResolvedWord)],
    n_list: &[usize],
    cfg: &McConfig,
) -> Result<Vec<FreenessCheckResult>> {
    let mut out = Vec::new();
    for (name, word) in words {
        let (tau, tau_prime) = predict_free(ensembles, letters, word)?;
        let fit = infinitesimal_fit(ensembles, word, name, n_list, cfg)?;
        let tau_f = tau.to_f64().unwrap_or(f64::NAN);
        let tau_prime_f = tau_prime.to_f64().unwrap_or(f64::NAN);
        let tau_sigmas = (fit.tau.0 - tau_f).abs() / fit.tau.1;
        let tau_prime_sigmas = (fit.tau_prime.0 - tau_prime_f).abs() / fit.tau_prime.1;
        out.push(FreenessCheckResult {
            word: name.clone(),
            predicted_tau: tau_f,
            predicted_tau_prime: tau_prime_f,
            fit,
            tau_sigmas,
            tau_prime_sigmas,
        });
    }
    Ok(out)
}

/// Scenario file for `mc-verify`: named ensembles plus a list of checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub ensembles: BTreeMap<String, EnsembleSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

fn default_tol_sigma() -> f64 {
    3.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CheckSpec {
    /// Fit `(τ̂, τ̂′)` for a word and compare with the stated values.
    Fit {
        word: String,
        #[serde(default)]
        tau: Option<String>,
        #[serde(default)]
        tau_prime: Option<String>,
        #[serde(default = "default_tol_sigma")]
        tol_sigma: f64,
    },
    /// Fit and compare against the free-product prediction.
    Freeness {
        word: String,
        #[serde(default = "default_tol_sigma")]
        tol_sigma: f64,
    },
    /// Integration by parts with fixed Gaussian matrices at dimension `dim`.
    Ibp {
        n_matrices: usize,
        dim: usize,
        #[serde(default)]
        matrix_seed: u64,
        #[serde(default = "default_tol_sigma")]
        tol_sigma: f64,
    },
}

impl Scenario {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn letter_names(&self) -> Vec<String> {
        self.ensembles.keys().cloned().collect()
    }

    pub fn ensemble_list(&self) -> Vec<EnsembleSpec> {
        self.ensembles.values().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64, samples: usize) -> McConfig {
        McConfig::new(seed, samples).with_workers(2)
    }

    #[test]
    fn goe_sampler_moments() {
        let n = 20;
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let x = sample_goe(n, &mut rng);
        assert_eq!(x, x.transpose()); // symmetric by construction
        let est = mc_expected_trace(
            &[EnsembleSpec::Goe],
            &vec![(0, false), (0, false)],
            n,
            &cfg(2, 4000),
        );
        // E[Tr X^2] = N + 1
        assert!(
            (est.mean - (n as f64 + 1.0)).abs() < 5.0 * est.std_error,
            "mean {} se {}",
            est.mean,
            est.std_error
        );
        // E[Tr X] = 0 by symmetry
        let est1 = mc_expected_trace(&[EnsembleSpec::Goe], &vec![(0, false)], n, &cfg(3, 4000));
        assert!(est1.mean.abs() < 5.0 * est1.std_error);
    }

    #[test]
    fn haar_orthogonality_and_first_moment() {
        let n = 15;
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let o = sample_haar_orthogonal(n, &mut rng);
        let err = (&o * o.transpose() - DMatrix::<f64>::identity(n, n))
            .abs()
            .max();
        assert!(err < 1e-10, "orthogonality error {err}");
        // E[O_11^2] = 1/N
        let mut acc = 0.0;
        let samples = 20000;
        for _ in 0..samples {
            let o = sample_haar_orthogonal(n, &mut rng);
            acc += o[(0, 0)] * o[(0, 0)];
        }
        let mean = acc / samples as f64;
        assert!((mean - 1.0 / n as f64).abs() < 3e-3, "{mean}");
    }

    #[test]
    fn haar_rank_one_average() {
        // E[Tr(O A O^t B)] = Tr(A) Tr(B) / N for fixed A, B
        let n = 10;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = gaussian_matrix(n, n, &mut rng);
        let b = gaussian_matrix(n, n, &mut rng);
        let expected = a.trace() * b.trace() / n as f64;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        let samples = 20000;
        for _ in 0..samples {
            let o = sample_haar_orthogonal(n, &mut rng);
            let v = (&o * &a * o.transpose() * &b).trace();
            acc += v;
            acc2 += v * v;
        }
        let mean = acc / samples as f64;
        let se = (((acc2 - acc * acc / samples as f64) / (samples as f64 - 1.0))
            / samples as f64)
            .sqrt();
        assert!((mean - expected).abs() < 5.0 * se, "{mean} vs {expected}");
    }

    #[test]
    fn wishart_mean_and_shape() {
        let n = 30;
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let w = sample_wishart(n, n, &mut rng);
        assert_eq!(w, w.transpose());
        assert_eq!(wishart_columns(30, 1, 2), 60); // c = 1/2 doubles M
        let spec = EnsembleSpec::Wishart {
            c: "1".into(),
            centered: false,
        };
        let est = mc_expected_trace(&[spec], &vec![(0, false)], n, &cfg(7, 3000));
        // E[tr W] = 1 exactly
        assert!(
            (est.mean / n as f64 - 1.0).abs() < 5.0 * est.std_error / n as f64,
            "{}",
            est.mean
        );
    }

    #[test]
    fn empty_word_is_dimension() {
        let est = mc_expected_trace(&[EnsembleSpec::Goe], &vec![], 7, &cfg(8, 100));
        assert_eq!(est.mean, 7.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn independent_letters_decorrelate() {
        // E[Tr(A B)] = 0 for independent centered GOE
        let est = mc_expected_trace(
            &[EnsembleSpec::Goe, EnsembleSpec::Goe],
            &vec![(0, false), (1, false)],
            12,
            &cfg(9, 4000),
        );
        assert!(est.mean.abs() < 5.0 * est.std_error);
    }

    #[test]
    fn reproducible_across_worker_counts() {
        let word = vec![(0, false), (0, false)];
        let a = mc_expected_trace(
            &[EnsembleSpec::Goe],
            &word,
            10,
            &McConfig::new(42, 500).with_workers(1),
        );
        let b = mc_expected_trace(
            &[EnsembleSpec::Goe],
            &word,
            10,
            &McConfig::new(42, 500).with_workers(4),
        );
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn fit_recovers_goe_inf_law() {
        // E[tr X^2] = 1 + 1/N exactly, so the fit recovers tau' = 1
        let word = vec![(0, false), (0, false)];
        let fit = infinitesimal_fit(
            &[EnsembleSpec::Goe],
            &word,
            "s s",
            &[10, 20, 40],
            &cfg(10, 4000),
        )
        .unwrap();
        assert!((fit.tau.0 - 1.0).abs() < 5.0 * fit.tau.1, "{:?}", fit.tau);
        assert!(
            (fit.tau_prime.0 - 1.0).abs() < 5.0 * fit.tau_prime.1,
            "{:?}",
            fit.tau_prime
        );
        assert!(infinitesimal_fit(
            &[EnsembleSpec::Goe],
            &word,
            "s s",
            &[10, 20],
            &cfg(10, 100)
        )
        .is_err());
    }

    #[test]
    fn ibp_identity_on_identity_matrices() {
        // with M_i = I both sides are deterministic and equal
        let ms = vec![DMatrix::<f64>::identity(8, 8); 2];
        let report = verify_ibp(&ms, &cfg(11, 200), false).unwrap();
        assert!(report.diff_mean.abs() < 1e-9, "{report:?}");
        let ms = vec![DMatrix::<f64>::identity(8, 8); 4];
        let report = verify_ibp(&ms, &cfg(12, 200), false).unwrap();
        assert!(report.diff_mean.abs() < 1e-9, "{report:?}");
    }

    #[test]
    fn ibp_identity_gaussian_matrices() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let ms: Vec<DMatrix<f64>> = (0..4).map(|_| gaussian_matrix(6, 6, &mut rng)).collect();
        let report = verify_ibp(&ms, &cfg(14, 20000), false).unwrap();
        assert!(report.pass(5.0), "{report:?}");
        // Haar invariance: O -> O^t leaves the estimates statistically alike
        let transposed = verify_ibp(&ms, &cfg(15, 20000), true).unwrap();
        assert!(transposed.pass(5.0), "{transposed:?}");
        let gap = (report.lhs_mean - transposed.lhs_mean).abs();
        let combined = (report.lhs_std_error.powi(2) + transposed.lhs_std_error.powi(2)).sqrt();
        assert!(gap < 5.0 * combined, "lhs gap {gap} vs se {combined}");
        assert!(verify_ibp(&ms[..3], &cfg(16, 10), false).is_err());
    }

    #[test]
    fn free_prediction_two_goe() {
        let ensembles = vec![EnsembleSpec::Goe, EnsembleSpec::Goe];
        let letters = vec!["a".to_string(), "b".to_string()];
        let abab = resolve_word("a b a b", &letters).unwrap();
        let (tau, tau_prime) = predict_free(&ensembles, &letters, &abab).unwrap();
        assert_eq!(tau, Rat::from_integer(0.into()));
        assert_eq!(tau_prime, Rat::from_integer(1.into()));
        let aba = resolve_word("a b a", &letters).unwrap();
        let (_, tau_prime) = predict_free(&ensembles, &letters, &aba).unwrap();
        assert_eq!(tau_prime, Rat::from_integer(0.into()));
    }

    #[test]
    fn free_prediction_goe_with_centered_wishart() {
        // a GOE letter against a centered Wishart with c = 1: the spoke gives
        // tau'(a w a w) = tau(a a^t) tau(w w^t) = 1 * c = 1
        let ensembles = vec![
            EnsembleSpec::Goe,
            EnsembleSpec::Wishart {
                c: "1".into(),
                centered: true,
            },
        ];
        let letters = vec!["a".to_string(), "w".to_string()];
        let awaw = resolve_word("a w a w", &letters).unwrap();
        let (tau, tau_prime) = predict_free(&ensembles, &letters, &awaw).unwrap();
        assert_eq!(tau, Rat::from_integer(0.into()));
        assert_eq!(tau_prime, Rat::from_integer(1.into()));
        // cheap MC consistency at small dimensions
        let results = verify_asymptotic_freeness(
            &ensembles,
            &letters,
            &[("a w a w".to_string(), awaw)],
            &[10, 20, 40],
            &cfg(23, 3000),
        )
        .unwrap();
        assert!(results[0].pass(5.0), "{:?}", results[0]);
    }

    #[test]
    fn scenario_roundtrip() {
        let json = r#"{
            "ensembles": {
                "a": {"kind": "goe"},
                "w": {"kind": "wishart", "c": "1", "centered": true}
            },
            "checks": [
                {"type": "fit", "word": "a a", "tau": "1", "tau_prime": "1"},
                {"type": "freeness", "word": "a w a w"},
                {"type": "ibp", "n_matrices": 4, "dim": 10, "matrix_seed": 7}
            ]
        }"#;
        let s: Scenario = serde_json::from_str(json).unwrap();
        assert_eq!(s.letter_names(), vec!["a", "w"]);
        assert_eq!(s.checks.len(), 3);
        let back = serde_json::to_string(&s).unwrap();
        let s2: Scenario = serde_json::from_str(&back).unwrap();
        assert_eq!(s.ensembles, s2.ensembles);
    }

    #[test]
    fn trace_variance_shrinks_with_dimension() {
        // the variance of tr estimates per sample scales like O(1/N^2);
        // monitored loosely, not asserted with tight bounds
        let word = vec![(0, false), (0, false)];
        let var_of = |n: usize| {
            let est = mc_expected_trace(&[EnsembleSpec::Goe], &word, n, &cfg(21, 3000));
            let (_, se) = est.normalized();
            se * se * est.samples as f64
        };
        let (v20, v40) = (var_of(20), var_of(40));
        assert!(
            v40 < v20,
            "per-sample variance of tr should shrink with N: {v20} vs {v40}"
        );
    }

    #[test]
    fn word_resolution() {
        let letters = vec!["a".to_string(), "b".to_string()];
        assert_eq!(
            resolve_word("a b^t a", &letters).unwrap(),
            vec![(0, false), (1, true), (0, false)]
        );
        assert!(resolve_word("a c", &letters).is_err());
    }
}
