//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured runtime. Exact criteria use exact arithmetic; Monte Carlo
//! criteria use fixed seeds, at least 2·10⁵ samples, and 3σ tolerances.

use infnc::annular;
use infnc::cumulant::{
    infinitesimal_cumulants_from_distribution, kappa_dot_moment_form, kappa_dot_polynomial,
    tau_from_cumulants, tau_prime_from_cumulants, CumulantTable, Mode,
};
use infnc::dist::{goe_square_distribution, Distribution, SymmetryFlags};
use infnc::freeness::{
    check_cyclic_form, check_definition, check_mixed_cumulants_vanish, free_product,
    MarginalFamily,
};
use infnc::nc::{catalan, enumerate_nc};

use infnc::product::{
    compositions, decomposition_check, product_cumulant_prime_explain, GroupingSpec,
};
use infnc::rmt::{
    fit_points, mc_expected_traces, predict_free, verify_ibp, DeterministicSource, EnsembleSpec,
    McConfig, ResolvedWord,
};
use infnc::word::{Letter, Rat, Word};
use num::{BigInt, Zero};
use std::time::Instant;

fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

fn s_word(n: usize) -> Word {
    Word(vec![Letter::new(1); n])
}

#[test]
fn criterion_01_enumeration_golden_values() {
    let start = Instant::now();
    for n in 1..=9 {
        assert_eq!(
            BigInt::from(enumerate_nc(n).unwrap().len()),
            catalan(n),
            "|NC({n})|"
        );
    }
    let s3 = annular::enumerate_sncd(3).unwrap();
    assert_eq!(s3.len(), 6);
    assert_eq!(annular::enumerate_sncd_all_through(3).unwrap().len(), 3);
    let pairings: Vec<String> = annular::enumerate_sncd(4)
        .unwrap()
        .into_iter()
        .filter(|a| a.is_pairing())
        .map(|a| a.to_string())
        .collect();
    let expected = vec![
        "(1,-2)(-1,2)(3,4)(-3,-4)",
        "(1,-3)(-1,3)(2,-4)(-2,4)",
        "(1,-4)(-1,4)(2,3)(-2,-3)",
        "(1,2)(-1,-2)(3,-4)(-3,4)",
        "(1,4)(-1,-4)(2,-3)(-2,3)",
    ];
    assert_eq!(pairings, expected);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "runtime {elapsed:?}");
    println!("ACCEPTANCE 1 enumeration golden values: PASS ({elapsed:?})");
}

#[test]
fn criterion_02_square_of_semicircle_both_routes() {
    let start = Instant::now();
    // route one: solve the moment-cumulant relation for x = s^2 with the
    // GOE infinitesimal law
    let x = goe_square_distribution(3).unwrap();
    let solved = infinitesimal_cumulants_from_distribution(&x, Mode::Real).unwrap();
    let k2_solved = solved.kappa_prime(&s_word(2)).unwrap();
    let k3_solved = solved.kappa_prime(&s_word(3)).unwrap();
    assert_eq!(k2_solved, rat(2));
    assert_eq!(k3_solved, rat(4));

    // route two: the product rule on the semicircular letter
    let semi = CumulantTable::semicircular(8);
    let g22 = GroupingSpec::new(vec![2, 2]).unwrap();
    let out2 =
        product_cumulant_prime_explain(&g22, &[Letter::new(1); 4], &semi, Mode::Real).unwrap();
    let g222 = GroupingSpec::new(vec![2, 2, 2]).unwrap();
    let out3 =
        product_cumulant_prime_explain(&g222, &[Letter::new(1); 6], &semi, Mode::Real)
            .unwrap();
    assert_eq!(out2.value, k2_solved, "the two routes agree exactly at r=2");
    assert_eq!(out3.value, k3_solved, "the two routes agree exactly at r=3");

    // surviving annular terms at m = 4: exactly the two pairings
    let mut nonzero2: Vec<&str> = out2
        .annular_survivors
        .iter()
        .filter(|s| !s.value.is_zero())
        .map(|s| s.notation.as_str())
        .collect();
    nonzero2.sort_unstable();
    assert_eq!(
        nonzero2,
        vec!["(1,-4)(-1,4)(2,3)(-2,-3)", "(1,4)(-1,-4)(2,-3)(-2,3)"]
    );

    // at m = 6: the 4 listed pairings out of the 22 in S_NC^delta(6,-6)
    let pairing_total = annular::enumerate_sncd(6)
        .unwrap()
        .iter()
        .filter(|a| a.is_pairing())
        .count();
    assert_eq!(pairing_total, 22);
    let mut nonzero3: Vec<&str> = out3
        .annular_survivors
        .iter()
        .filter(|s| !s.value.is_zero())
        .map(|s| s.notation.as_str())
        .collect();
    nonzero3.sort_unstable();
    let mut expected = vec![
        "(1,-4)(-1,4)(2,-5)(-2,5)(3,-6)(-3,6)",
        "(1,-6)(-1,6)(2,3)(-2,-3)(4,5)(-4,-5)",
        "(1,6)(-1,-6)(2,3)(-2,-3)(4,-5)(-4,5)",
        "(1,6)(-1,-6)(2,-3)(-2,3)(4,5)(-4,-5)",
    ];
    expected.sort_unstable();
    assert_eq!(nonzero3, expected);
    assert!(out3
        .annular_survivors
        .iter()
        .filter(|s| !s.value.is_zero())
        .all(|s| s.pairing));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "runtime {elapsed:?}");
    println!("ACCEPTANCE 2 worked example both routes: PASS ({elapsed:?})");
}

#[test]
fn criterion_03_kappa_dot_tables() {
    let start = Instant::now();

    // cumulant form, n = 2..10; keys are sorted multisets of cumulant orders
    #[allow(clippy::type_complexity)]
    let cumulant_rows: Vec<(usize, Vec<(&[usize], u64)>)> = vec![
        (2, vec![(&[2][..], 1)]),
        (3, vec![(&[3][..], 3)]),
        (4, vec![(&[4][..], 6), (&[2, 2][..], 1)]),
        (5, vec![(&[5][..], 10), (&[2, 3][..], 5)]),
        (
            6,
            vec![
                (&[6][..], 15),
                (&[2, 4][..], 9),
                (&[3, 3][..], 6),
                (&[2, 2, 2][..], 1),
            ],
        ),
        (
            7,
            vec![
                (&[7][..], 21),
                (&[2, 5][..], 14),
                (&[3, 4][..], 21),
                (&[2, 2, 3][..], 7),
            ],
        ),
        (
            // the published n = 8 row omits the [2,3,3] monomial; enumeration
            // and the generating-function identity both give coefficient 16
            8,
            vec![
                (&[8][..], 28),
                (&[2, 6][..], 20),
                (&[3, 5][..], 32),
                (&[4, 4][..], 18),
                (&[2, 2, 4][..], 12),
                (&[2, 3, 3][..], 16),
                (&[2, 2, 2, 2][..], 1),
            ],
        ),
        (
            9,
            vec![
                (&[9][..], 36),
                (&[2, 7][..], 27),
                (&[3, 6][..], 45),
                (&[4, 5][..], 54),
                (&[2, 2, 5][..], 18),
                (&[2, 3, 4][..], 54),
                (&[3, 3, 3][..], 12),
                (&[2, 2, 2, 3][..], 9),
            ],
        ),
        (
            10,
            vec![
                (&[10][..], 45),
                (&[2, 8][..], 35),
                (&[3, 7][..], 60),
                (&[4, 6][..], 75),
                (&[5, 5][..], 40),
                (&[2, 2, 6][..], 25),
                (&[2, 3, 5][..], 80),
                (&[2, 4, 4][..], 45),
                (&[3, 3, 4][..], 60),
                (&[2, 2, 2, 4][..], 15),
                (&[2, 2, 3, 3][..], 30),
                (&[2, 2, 2, 2, 2][..], 1),
            ],
        ),
    ];
    for (n, row) in &cumulant_rows {
        let poly = kappa_dot_polynomial(*n).unwrap();
        let total: u64 = row.iter().map(|(_, c)| c).sum();
        assert_eq!(poly.total_count(), total, "n = {n} total");
        for (orders, count) in row {
            assert_eq!(poly.coefficient(orders), *count, "n = {n}, {orders:?}");
        }
        assert_eq!(poly.terms().count(), row.len(), "n = {n} monomials");
    }

    // moment form, n = 2..6
    #[allow(clippy::type_complexity)]
    let moment_rows: Vec<(usize, Vec<(&[u32], i64)>)> = vec![
        (2, vec![(&[0, 1][..], 1), (&[2][..], -1)]),
        (3, vec![(&[0, 0, 1][..], 3), (&[1, 1][..], -9), (&[3][..], 6)]),
        (
            4,
            vec![
                (&[0, 0, 0, 1][..], 6),
                (&[1, 0, 1][..], -24),
                (&[0, 2][..], -11),
                (&[2, 1][..], 58),
                (&[4][..], -29),
            ],
        ),
        (
            5,
            vec![
                (&[0, 0, 0, 0, 1][..], 10),
                (&[1, 0, 0, 1][..], -50),
                (&[0, 1, 1][..], -45),
                (&[2, 0, 1][..], 145),
                (&[1, 2][..], 135),
                (&[3, 1][..], -325),
                (&[5][..], 130),
            ],
        ),
        (
            6,
            vec![
                (&[0, 0, 0, 0, 0, 1][..], 15),
                (&[1, 0, 0, 0, 1][..], -90),
                (&[0, 1, 0, 1][..], -81),
                (&[2, 0, 0, 1][..], 306),
                (&[0, 0, 2][..], -39),
                (&[1, 1, 1][..], 558),
                (&[3, 0, 1][..], -780),
                (&[0, 3][..], 88),
                (&[2, 2][..], -1101),
                (&[4, 1][..], 1686),
                (&[6][..], -562),
            ],
        ),
    ];
    for (n, row) in &moment_rows {
        let poly = kappa_dot_moment_form(*n).unwrap();
        for (exps, coeff) in row {
            assert_eq!(poly.coefficient(exps), rat(*coeff), "n = {n}, {exps:?}");
        }
        assert_eq!(poly.terms().count(), row.len(), "n = {n} monomials");
    }

    // the all-through generator agrees with the brute-force filter at the
    // full brute-force cap
    let arc: Vec<String> = annular::enumerate_sncd_all_through(8)
        .unwrap()
        .iter()
        .map(|a| a.to_string())
        .collect();
    let brute: Vec<String> = annular::enumerate_sncd(8)
        .unwrap()
        .into_iter()
        .filter(|a| a.is_all_through())
        .map(|a| a.to_string())
        .collect();
    assert_eq!(arc, brute);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "runtime {elapsed:?}");
    println!("ACCEPTANCE 3 kappa-dot tables (n <= 10, incl. moment form): PASS ({elapsed:?})");
}

#[test]
fn criterion_04_moment_cumulant_roundtrip() {
    use rand::{Rng, SeedableRng};
    let start = Instant::now();
    for case in 0..10u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(500 + case);
        // vary the alphabet: one symmetric letter, one general letter, or two
        // symmetric letters
        let flags = match case % 3 {
            0 => SymmetryFlags::with_symmetric_letters([1]),
            1 => SymmetryFlags::tracial_symmetric(),
            _ => SymmetryFlags::with_symmetric_letters([1, 2]),
        };
        let letters: std::collections::BTreeSet<usize> = if case % 3 == 2 {
            [1, 2].into_iter().collect()
        } else {
            [1].into_iter().collect()
        };
        let mut d = Distribution::new(6, flags.clone(), false);
        let probe = Distribution::new(6, flags, true);
        for w in probe.canonical_words(&letters) {
            let den = rng.gen_range(1i64..=3);
            d.insert_tau(w.clone(), Rat::new(rng.gen_range(-6i64..=6).into(), den.into()))
                .unwrap();
            d.insert_tau_prime(w, Rat::new(rng.gen_range(-6i64..=6).into(), den.into()))
                .unwrap();
        }
        let table = infinitesimal_cumulants_from_distribution(&d, Mode::Real).unwrap();
        for w in probe.canonical_words(&letters) {
            assert_eq!(
                tau_from_cumulants(&w, &table).unwrap(),
                d.tau(&w).unwrap(),
                "case {case}, tau({w})"
            );
            assert_eq!(
                tau_prime_from_cumulants(&w, &table, Mode::Real).unwrap(),
                d.tau_prime(&w).unwrap(),
                "case {case}, tau'({w})"
            );
        }
    }
    let elapsed = start.elapsed();
    println!("ACCEPTANCE 4 moment-cumulant round trip (10 random distributions): PASS ({elapsed:?})");
}

#[test]
fn criterion_05_spoke_diagram_lemma() {
    let start = Instant::now();
    for n in 2..=6usize {
        let all = annular::enumerate_sncd(n).unwrap();
        if n % 2 == 1 {
            for a in &all {
                assert!(
                    annular::has_singleton_or_adjacent_pair(a),
                    "n = {n}, sigma = {a}"
                );
            }
        } else {
            let plain: Vec<String> = all
                .iter()
                .filter(|a| !annular::has_singleton_or_adjacent_pair(a))
                .map(|a| a.to_string())
                .collect();
            assert_eq!(
                plain,
                vec![annular::spoke(n).unwrap().to_string()],
                "n = {n}: the spoke is the unique element without singletons or adjacent pairs"
            );
        }
    }
    let elapsed = start.elapsed();
    println!("ACCEPTANCE 5 spoke-diagram lemma (n <= 6): PASS ({elapsed:?})");
}

#[test]
fn criterion_06_decomposition_lemmas_all_groupings() {
    let start = Instant::now();
    let mut groupings = 0usize;
    for m in 2..=6usize {
        for parts in compositions(m) {
            let report = decomposition_check(&parts).unwrap();
            assert!(report.pass(), "{parts:?}: {:?}", report.failures);
            assert_eq!(
                report.n1 + report.n2,
                enumerate_nc(m).unwrap().len(),
                "{parts:?}: NC(m) = N1 ⊔ N2"
            );
            assert_eq!(
                report.s1 + report.s2 + report.s3,
                annular::enumerate_sncd(m).unwrap().len(),
                "{parts:?}: S = S1 ⊔ S2 ⊔ S3"
            );
            groupings += 1;
        }
    }
    assert_eq!(groupings, 2 + 4 + 8 + 16 + 32);
    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE 6 annular reduction and bijection lemmas ({groupings} groupings, m <= 6): PASS ({elapsed:?})"
    );
}

#[test]
fn criterion_07_freeness_theorem_both_directions() {
    let start = Instant::now();
    // forward: free products pass the definitional checks to degree 6
    let mut family = MarginalFamily::new();
    family.push("a", CumulantTable::semicircular(6)).unwrap();
    family.push("b", CumulantTable::semicircular(6)).unwrap();
    let (joint6, _, labeling) = free_product(&family, 6).unwrap();
    let def = check_definition(&joint6, &labeling).unwrap();
    assert!(def.pass(), "{:?}", def.violations);
    let cyc = check_cyclic_form(&joint6, &labeling).unwrap();
    assert!(cyc.pass(), "{:?}", cyc.violations);

    // a second, non-trivial pair of marginals
    let mut family2 = MarginalFamily::new();
    family2.push("s", CumulantTable::semicircular(6)).unwrap();
    family2
        .push("p", CumulantTable::free_poisson(&rat(1), 6, false))
        .unwrap();
    let (joint6b, _, labeling2) = free_product(&family2, 6).unwrap();
    let def2 = check_definition(&joint6b, &labeling2).unwrap();
    assert!(def2.pass(), "{:?}", def2.violations);
    let cyc2 = check_cyclic_form(&joint6b, &labeling2).unwrap();
    assert!(cyc2.pass(), "{:?}", cyc2.violations);

    // reverse: extracting cumulants from the joints gives identically zero
    // mixed kappa and kappa' to degree 5
    for (fam, lab) in [(&family, &labeling), (&family2, &labeling2)] {
        let (joint5, _, _) = free_product(fam, 5).unwrap();
        let mixed = check_mixed_cumulants_vanish(&joint5, lab).unwrap();
        assert!(mixed.pass(), "{:?}", mixed.violations);
        assert!(mixed.checked > 0);
    }
    let elapsed = start.elapsed();
    println!("ACCEPTANCE 7 freeness theorem both directions: PASS ({elapsed:?})");
}

/// Shared-draw fits for several words of one ensemble family.
fn batched_fits(
    ensembles: &[EnsembleSpec],
    words: &[(&str, ResolvedWord)],
    n_list: &[usize],
    cfg: &McConfig,
) -> Vec<infnc::rmt::FitResult> {
    let resolved: Vec<ResolvedWord> = words.iter().map(|(_, w)| w.clone()).collect();
    let mut per_word_points: Vec<Vec<infnc::rmt::TraceEstimate>> =
        vec![Vec::new(); words.len()];
    for &n in n_list {
        let ests = mc_expected_traces(ensembles, &resolved, n, cfg);
        for (w, est) in ests.into_iter().enumerate() {
            per_word_points[w].push(est);
        }
    }
    words
        .iter()
        .zip(per_word_points)
        .map(|((name, _), points)| fit_points(name, points).unwrap())
        .collect()
}

#[test]
fn criterion_08_mc_goe_infinitesimal_moments() {
    let start = Instant::now();
    let cfg = McConfig::new(4242, 200_000);
    let words: Vec<(&str, ResolvedWord)> = vec![
        ("s s", vec![(0, false); 2]),
        ("s s s s", vec![(0, false); 4]),
        ("s s s s s s", vec![(0, false); 6]),
    ];
    let fits = batched_fits(&[EnsembleSpec::Goe], &words, &[40, 80, 160], &cfg);
    let expected = [1.0, 5.0, 22.0];
    for (fit, want) in fits.iter().zip(expected) {
        let (est, se) = fit.tau_prime;
        let sigmas = (est - want).abs() / se;
        let rel = (est - want).abs() / want;
        println!(
            "  tau'({}) = {est:.4} ± {se:.4} (expect {want}, {sigmas:.2}σ, {:.2}% rel)",
            fit.word,
            rel * 100.0
        );
        assert!(sigmas < 3.0, "tau'({}) off by {sigmas:.2} sigma", fit.word);
        assert!(rel < 0.10, "tau'({}) off by {:.1}%", fit.word, rel * 100.0);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 1200, "runtime {elapsed:?}");
    println!("ACCEPTANCE 8 MC GOE infinitesimal moments (1, 5, 22): PASS ({elapsed:?})");
}

#[test]
fn criterion_09_mc_integration_by_parts() {
    let start = Instant::now();
    let cfg = McConfig::new(777, 200_000);
    let ms: Vec<nalgebra::DMatrix<f64>> = (0..4)
        .map(|i| {
            DeterministicSource::Gaussian {
                seed: 900 + i,
                symmetric: false,
            }
            .build(10)
        })
        .collect();
    let report = verify_ibp(&ms, &cfg, false).unwrap();
    println!(
        "  n = 4, N = 10: |LHS - RHS| = {:.5} ({:.2}σ), LHS = {:.4}, RHS = {:.4}",
        report.diff_mean.abs(),
        report.sigmas,
        report.lhs_mean,
        report.rhs_mean
    );
    assert!(report.pass(3.0), "{report:?}");
    let elapsed = start.elapsed();
    println!("ACCEPTANCE 9 MC integration by parts: PASS ({elapsed:?})");
}

#[test]
fn criterion_10_mc_asymptotic_freeness() {
    let start = Instant::now();
    let ensembles = vec![EnsembleSpec::Goe, EnsembleSpec::Goe];
    let letters = vec!["a".to_string(), "b".to_string()];
    let abab: ResolvedWord = vec![(0, false), (1, false), (0, false), (1, false)];
    let aba: ResolvedWord = vec![(0, false), (1, false), (0, false)];

    // exact predictions from the freeness module
    let (_, p_abab) = predict_free(&ensembles, &letters, &abab).unwrap();
    let (_, p_aba) = predict_free(&ensembles, &letters, &aba).unwrap();
    assert_eq!(p_abab, rat(1));
    assert_eq!(p_aba, rat(0));

    let cfg = McConfig::new(31337, 200_000);
    let words: Vec<(&str, ResolvedWord)> = vec![("a b a b", abab), ("a b a", aba)];
    let fits = batched_fits(&ensembles, &words, &[40, 80, 160], &cfg);
    for (fit, want) in fits.iter().zip([1.0f64, 0.0]) {
        let (est, se) = fit.tau_prime;
        let sigmas = (est - want).abs() / se;
        println!(
            "  tau'({}) = {est:.4} ± {se:.4} (predicted {want}, {sigmas:.2}σ)",
            fit.word
        );
        assert!(sigmas < 3.0, "tau'({}) off by {sigmas:.2} sigma", fit.word);
    }
    let elapsed = start.elapsed();
    println!("ACCEPTANCE 10 MC asymptotic real infinitesimal freeness: PASS ({elapsed:?})");
}
