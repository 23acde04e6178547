//! The `infnc` command line: enumeration, cumulant transforms, the product
//! formula, free products, definitional checks, and Monte Carlo verification.
//!
//! Exit codes: 0 on success, 1 when a check fails, 2 on usage errors.

use crate::cumulant::{
    infinitesimal_cumulants_from_distribution, tau_prime_from_cumulants, Mode,
};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::freeness::{
    check_cyclic_form, check_definition, check_mixed_cumulants_vanish, free_product,
    LetterLabeling, MarginalFamily,
};
use crate::product::{product_cumulant_prime_explain, GroupingSpec};
use crate::rmt::{self, CheckSpec, DeterministicSource, McConfig, Scenario};
use crate::word::Word;
use clap::{Args, Parser, Subcommand};
use num::ToPrimitive;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "infnc",
    about = "Exact combinatorics of real infinitesimal free probability, with a Monte Carlo random-matrix harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate NC(n) or the symmetric annular permutations.
    Enumerate(EnumerateArgs),
    /// Print the cumulant tables of a distribution.
    Cumulants(CumulantsArgs),
    /// Reconstruct tau'(word) from the cumulant tables.
    Tauprime(TauprimeArgs),
    /// Cumulants with products as entries.
    Product(ProductArgs),
    /// Free product of marginal distributions.
    Freeprod(FreeprodArgs),
    /// Check the definitional conditions of real infinitesimal freeness.
    Check(CheckArgs),
    /// Monte Carlo verification of a scenario file.
    #[command(name = "mc-verify")]
    McVerify(McVerifyArgs),
}

#[derive(Args)]
struct EnumerateArgs {
    /// Enumerate the non-crossing partitions of [n].
    #[arg(long, value_name = "N", conflicts_with = "annular")]
    nc: Option<usize>,
    /// Enumerate the symmetric non-crossing annular permutations of (n, -n).
    #[arg(long, value_name = "N")]
    annular: Option<usize>,
    /// Keep only the all-through elements.
    #[arg(long, requires = "annular")]
    all_through: bool,
    /// Keep only the pairings.
    #[arg(long, requires = "annular")]
    pairings_only: bool,
}

#[derive(Args)]
struct CumulantsArgs {
    #[arg(long)]
    dist: PathBuf,
    /// Truncate the printed table at this degree (defaults to the file's).
    #[arg(long)]
    degree: Option<usize>,
    /// Also compute the infinitesimal cumulants.
    #[arg(long)]
    infinitesimal: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Real)]
    mode: ModeArg,
    /// Treat absent moment keys as zero.
    #[arg(long)]
    sparse: bool,
}

#[derive(Args)]
struct TauprimeArgs {
    #[arg(long)]
    dist: PathBuf,
    /// Space-separated letters, e.g. "1 1 2t".
    #[arg(long)]
    word: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Real)]
    mode: ModeArg,
    #[arg(long)]
    sparse: bool,
}

#[derive(Args)]
struct ProductArgs {
    /// Comma-separated grouping, e.g. 2,2.
    #[arg(long)]
    parts: String,
    /// The m letters being grouped, e.g. "1 1 1 1".
    #[arg(long)]
    letters: String,
    #[arg(long)]
    dist: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Real)]
    mode: ModeArg,
    /// List the surviving permutations of both sums.
    #[arg(long)]
    explain: bool,
    #[arg(long)]
    sparse: bool,
}

#[derive(Args)]
struct FreeprodArgs {
    /// Marginal distribution files; the label is the file stem.
    #[arg(long = "marginal", required = true)]
    marginals: Vec<PathBuf>,
    #[arg(long)]
    degree: usize,
    /// Output path for the joint distribution.
    #[arg(short, long)]
    output: PathBuf,
    /// Output path for the letter labeling (defaults next to the joint).
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    sparse: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    sparse: bool,
}

#[derive(Args)]
struct McVerifyArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Comma-separated dimensions for the 1/N fits.
    #[arg(long = "Ns", default_value = "40,80,160")]
    ns: String,
    /// Worker threads (substream assignment is worker-independent).
    #[arg(long)]
    workers: Option<usize>,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ModeArg {
    Real,
    Complex,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Real => Mode::Real,
            ModeArg::Complex => Mode::Complex,
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Enumerate(args) => enumerate(args),
        Command::Cumulants(args) => cumulants(args),
        Command::Tauprime(args) => tauprime(args),
        Command::Product(args) => product(args),
        Command::Freeprod(args) => freeprod(args),
        Command::Check(args) => check(args),
        Command::McVerify(args) => mc_verify(args),
    }
}

fn enumerate(args: EnumerateArgs) -> Result<bool> {
    match (args.nc, args.annular) {
        (Some(n), None) => {
            let all = crate::nc::enumerate_nc(n)?;
            for p in &all {
                println!("{p}");
            }
            println!("count: {}", all.len());
        }
        (None, Some(n)) => {
            let all = if args.all_through {
                crate::annular::enumerate_sncd_all_through(n)?
            } else {
                crate::annular::enumerate_sncd(n)?
            };
            let mut count = 0usize;
            for a in &all {
                if args.pairings_only && !a.is_pairing() {
                    continue;
                }
                println!("{a}");
                count += 1;
            }
            println!("count: {count}");
        }
        _ => {
            return Err(Error::Invalid(
                "pass exactly one of --nc N or --annular N".into(),
            ))
        }
    }
    Ok(true)
}

fn cumulants(args: CumulantsArgs) -> Result<bool> {
    let dist = Distribution::load(&args.dist, args.sparse)?;
    let degree = args.degree.unwrap_or_else(|| dist.degree());
    if degree > dist.degree() {
        return Err(Error::DegreeExceeded {
            degree,
            bound: dist.degree(),
        });
    }
    let table = if args.infinitesimal {
        infinitesimal_cumulants_from_distribution(&dist, args.mode.into())?
    } else {
        crate::cumulant::kappa_from_moments(&dist)?
    };
    for (word, kappa, kappa_prime) in table.rows() {
        if word.len() > degree {
            continue;
        }
        let mut line = format!(
            "{word}: kappa = {}",
            kappa.map_or_else(|| "-".into(), |v| v.to_string())
        );
        if args.infinitesimal {
            line += &format!(
                ", kappa' = {}",
                kappa_prime.map_or_else(|| "-".into(), |v| v.to_string())
            );
        }
        println!("{line}");
    }
    Ok(true)
}

fn tauprime(args: TauprimeArgs) -> Result<bool> {
    let dist = Distribution::load(&args.dist, args.sparse)?;
    let word = Word::parse(&args.word)?;
    let mode: Mode = args.mode.into();
    let table = infinitesimal_cumulants_from_distribution(&dist, mode)?;
    let value = tau_prime_from_cumulants(&word, &table, mode)?;
    println!("{value}");
    Ok(true)
}

fn product(args: ProductArgs) -> Result<bool> {
    let parts: Vec<usize> = args
        .parts
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad part {t:?}")))
        })
        .collect::<Result<_>>()?;
    let grouping = GroupingSpec::new(parts)?;
    let word = Word::parse(&args.letters)?;
    let dist = Distribution::load(&args.dist, args.sparse)?;
    let mode: Mode = args.mode.into();
    let table = infinitesimal_cumulants_from_distribution(&dist, mode)?;
    let out = match mode {
        Mode::Real => product_cumulant_prime_explain(&grouping, word.letters(), &table, mode)?,
        Mode::Complex => {
            let value =
                crate::product::complex_product_cumulant_prime(&grouping, word.letters(), &table)?;
            crate::product::ProductPrime {
                value,
                disc_survivors: Vec::new(),
                annular_survivors: Vec::new(),
            }
        }
    };
    println!("{}", out.value);
    if args.explain && mode == Mode::Real {
        println!("surviving pi (K(pi) separates M):");
        for s in &out.disc_survivors {
            println!("  {}  dkappa = {}", s.notation, s.value);
        }
        println!("surviving sigma (K^delta(sigma) separates +-M):");
        for s in &out.annular_survivors {
            println!(
                "  {}  kappa_sigma/2 = {}{}",
                s.notation,
                s.value,
                if s.pairing { "  [pairing]" } else { "" }
            );
        }
    }
    Ok(true)
}

fn freeprod(args: FreeprodArgs) -> Result<bool> {
    let mut family = MarginalFamily::new();
    let mut used = Vec::new();
    for path in &args.marginals {
        let base = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("marginal")
            .to_string();
        let mut label = base.clone();
        let mut k = 2;
        while used.contains(&label) {
            label = format!("{base}{k}");
            k += 1;
        }
        used.push(label.clone());
        let dist = Distribution::load(path, args.sparse)?;
        if dist.degree() < args.degree {
            return Err(Error::DegreeExceeded {
                degree: args.degree,
                bound: dist.degree(),
            });
        }
        let table = infinitesimal_cumulants_from_distribution(&dist, Mode::Real)?;
        family.push(label, table)?;
    }
    let (joint, _, labeling) = free_product(&family, args.degree)?;
    joint.save(&args.output)?;
    let labels_path = args
        .labels
        .unwrap_or_else(|| args.output.with_extension("labels.json"));
    labeling.save(&labels_path)?;
    println!(
        "joint distribution written to {} (labels: {})",
        args.output.display(),
        labels_path.display()
    );
    Ok(true)
}

fn check(args: CheckArgs) -> Result<bool> {
    let dist = Distribution::load(&args.dist, args.sparse)?;
    let labeling = LetterLabeling::load(&args.labels)?;
    let mut pass = true;
    let def = check_definition(&dist, &labeling)?;
    println!(
        "definition conditions (i)-(iv): {} sequences checked, {} violations",
        def.checked,
        def.violations.len()
    );
    for v in def.violations.iter().take(10) {
        println!("  {v}");
    }
    pass &= def.pass();
    if dist.flags().tracial {
        let cyc = check_cyclic_form(&dist, &labeling)?;
        println!(
            "cyclically alternating form: {} sequences checked, {} violations",
            cyc.checked,
            cyc.violations.len()
        );
        for v in cyc.violations.iter().take(10) {
            println!("  {v}");
        }
        pass &= cyc.pass();
    }
    let mixed = check_mixed_cumulants_vanish(&dist, &labeling)?;
    println!(
        "mixed cumulant vanishing: {} words checked, {} violations",
        mixed.checked,
        mixed.violations.len()
    );
    for v in mixed.violations.iter().take(10) {
        println!("  {v}");
    }
    pass &= mixed.pass();
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn mc_verify(args: McVerifyArgs) -> Result<bool> {
    let scenario = Scenario::load(&args.scenario)?;
    let n_list: Vec<usize> = args
        .ns
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad dimension {t:?}")))
        })
        .collect::<Result<_>>()?;
    let mut cfg = McConfig::new(args.seed, args.samples);
    if let Some(w) = args.workers {
        cfg = cfg.with_workers(w);
    }
    let letters = scenario.letter_names();
    let ensembles = scenario.ensemble_list();
    let mut pass = true;
    let mut json_rows = Vec::new();
    for check in &scenario.checks {
        match check {
            CheckSpec::Fit {
                word,
                tau,
                tau_prime,
                tol_sigma,
            } => {
                let resolved = rmt::resolve_word(word, &letters)?;
                let fit = rmt::infinitesimal_fit(&ensembles, &resolved, word, &n_list, &cfg)?;
                let mut ok = true;
                let mut describe = format!(
                    "fit      \"{word}\"  tau = {:.6} +- {:.6}  tau' = {:.6} +- {:.6}",
                    fit.tau.0, fit.tau.1, fit.tau_prime.0, fit.tau_prime.1
                );
                if let Some(t) = tau {
                    let expect = crate::dist::parse_rational(t)?.to_f64().unwrap();
                    let sig = (fit.tau.0 - expect).abs() / fit.tau.1;
                    describe += &format!("  [tau expect {expect}: {sig:.2}s]");
                    ok &= sig < *tol_sigma;
                }
                if let Some(t) = tau_prime {
                    let expect = crate::dist::parse_rational(t)?.to_f64().unwrap();
                    let sig = (fit.tau_prime.0 - expect).abs() / fit.tau_prime.1;
                    describe += &format!("  [tau' expect {expect}: {sig:.2}s]");
                    ok &= sig < *tol_sigma;
                }
                println!("{describe}  {}", if ok { "PASS" } else { "FAIL" });
                json_rows.push(serde_json::json!({
                    "type": "fit", "word": word, "result": fit, "pass": ok,
                }));
                pass &= ok;
            }
            CheckSpec::Freeness { word, tol_sigma } => {
                let resolved = rmt::resolve_word(word, &letters)?;
                let results = rmt::verify_asymptotic_freeness(
                    &ensembles,
                    &letters,
                    &[(word.clone(), resolved)],
                    &n_list,
                    &cfg,
                )?;
                let r = &results[0];
                let ok = r.pass(*tol_sigma);
                println!(
                    "freeness \"{word}\"  predicted tau' = {}  fitted = {:.6} +- {:.6} ({:.2}s)  {}",
                    r.predicted_tau_prime,
                    r.fit.tau_prime.0,
                    r.fit.tau_prime.1,
                    r.tau_prime_sigmas,
                    if ok { "PASS" } else { "FAIL" }
                );
                json_rows.push(serde_json::json!({
                    "type": "freeness", "word": word, "result": r, "pass": ok,
                }));
                pass &= ok;
            }
            CheckSpec::Ibp {
                n_matrices,
                dim,
                matrix_seed,
                tol_sigma,
            } => {
                let ms: Vec<nalgebra::DMatrix<f64>> = (0..*n_matrices)
                    .map(|i| {
                        DeterministicSource::Gaussian {
                            seed: matrix_seed + i as u64,
                            symmetric: false,
                        }
                        .build(*dim)
                    })
                    .collect();
                let report = rmt::verify_ibp(&ms, &cfg, false)?;
                let ok = report.pass(*tol_sigma);
                println!(
                    "ibp      n = {}  N = {}  |LHS-RHS| = {:.6} ({:.2}s)  {}",
                    n_matrices,
                    dim,
                    report.diff_mean.abs(),
                    report.sigmas,
                    if ok { "PASS" } else { "FAIL" }
                );
                json_rows.push(serde_json::json!({
                    "type": "ibp", "result": report, "pass": ok,
                }));
                pass &= ok;
            }
        }
    }
    if let Some(path) = &args.json {
        std::fs::write(path, serde_json::to_string_pretty(&json_rows)? + "\n")?;
    }
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}
