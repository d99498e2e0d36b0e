use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use wigner_bulk::harness::{
    parse_config, run_experiment, universality_compare, CompareConfig, ComparisonReport,
    ExperimentConfig, Outcome, RunOptions,
};

#[derive(Parser)]
#[command(
    name = "wigner-bulk",
    version,
    about = "Bulk spectral statistics of Wigner Hermitian random matrices"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample matrices and dump spectra (optionally the matrices themselves)
    Sample(RunArgs),
    /// Windowed nearest-neighbor gap distribution
    Gap(RunArgs),
    /// Averaged k-point correlation statistic
    Correlation(RunArgs),
    /// Local semicircle law sweep over resolvent scales
    LocalLaw(RunArgs),
    /// Bulk eigenvalue deviation from classical locations
    Localization(RunArgs),
    /// Tabulate det(1 - K_alpha) and the limiting gap law
    FredholmTable(RunArgs),
    /// Run two ensembles and compare their statistic against theory
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's matrix size
    #[arg(long)]
    n: Option<usize>,
    /// Override the config's sample count
    #[arg(long)]
    samples: Option<usize>,
    /// Override the config's root seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config's `out`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// Comparison config (JSON with arms `a` and `b`)
    #[arg(long)]
    config: PathBuf,
    /// Override both arms' matrix size
    #[arg(long)]
    n: Option<usize>,
    /// Override both arms' sample count
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap
    #[arg(long)]
    workers: Option<usize>,
}

fn load_experiment(args: &RunArgs, expected: &'static str) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let mut cfg = parse_config(&text)
        .with_context(|| format!("parsing config {}", args.config.display()))?;
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(samples) = args.samples {
        cfg.samples = samples;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    if cfg.statistic.name() != expected {
        bail!(
            "the `{}` subcommand expects a `{}` statistic, but the config declares `{}`",
            expected.replace('_', "-"),
            expected,
            cfg.statistic.name()
        );
    }
    Ok(cfg)
}

fn run(args: RunArgs, expected: &'static str) -> Result<()> {
    let cfg = load_experiment(&args, expected)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let opts = RunOptions::new(out).with_workers(args.workers);
    let summary = run_experiment(&cfg, &opts)?;
    match &summary.outcome {
        Outcome::Gap { curve, .. } => {
            let last = curve.last().expect("nonempty grid");
            println!(
                "gap curve over {} samples; Lambda_n(s={}) = {:.4} +- {:.4}",
                last.samples, last.s, last.value, last.std_error
            );
        }
        Outcome::Correlation(est) => {
            println!(
                "correlation estimate [{}]: {:.6} +- {:.6} over {} samples",
                est.test_function, est.value, est.std_error, est.samples
            );
        }
        Outcome::LocalLaw(rep) => {
            for (i, eta) in rep.etas.iter().enumerate() {
                println!(
                    "eta = {:.6}: sup-dev median {:.5}, max {:.5}, exceed({}) = {:.2}",
                    eta,
                    rep.sup_dev_quantiles.q50[i],
                    rep.sup_dev_quantiles.max[i],
                    rep.exceed_rate.eps0,
                    rep.exceed_rate.per_eta[i]
                );
            }
        }
        Outcome::Localization(rep) => {
            println!(
                "localization over indices [{}, {}]: ensemble max |lambda_i - t(i/n)| = {:.6}",
                rep.first_index, rep.last_index, rep.ensemble_max
            );
        }
        Outcome::Sample { spectra } => {
            println!("wrote {} spectra of size {}", spectra.len(), cfg.n);
        }
        Outcome::FredholmTable { rows } => {
            println!("tabulated {} alpha values", rows.len());
        }
    }
    if summary.failures > 0 {
        println!("warning: {} samples failed to diagonalize", summary.failures);
    }
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading config {}", args.config.display()))?;
    let mut cfg: CompareConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", args.config.display()))?;
    if let Some(n) = args.n {
        cfg.a.n = n;
        cfg.b.n = n;
    }
    if let Some(samples) = args.samples {
        cfg.a.samples = samples;
        cfg.b.samples = samples;
    }
    cfg.a.validate()?;
    cfg.b.validate()?;
    let out = args.out.unwrap_or_else(|| PathBuf::from("out"));
    let opts = RunOptions::new(out).with_workers(args.workers);
    let (report, run_a, run_b) = universality_compare(&cfg, &opts)?;
    match &report {
        ComparisonReport::Gap {
            ks_a_theory,
            ks_b_theory,
            ks_a_b,
            noise_floor_a_b,
            ..
        } => {
            println!("KS(A, theory) = {ks_a_theory:.4}");
            println!("KS(B, theory) = {ks_b_theory:.4}");
            println!("KS(A, B)      = {ks_a_b:.4} (bootstrap noise floor {noise_floor_a_b:.4})");
        }
        ComparisonReport::Correlation {
            z_a_theory,
            z_b_theory,
            z_a_b,
            theory,
            ..
        } => {
            println!("theory integral = {theory:.6}");
            println!("z(A, theory) = {z_a_theory:.2}, z(B, theory) = {z_b_theory:.2}, z(A, B) = {z_a_b:.2}");
        }
    }
    println!("verdict: {}", if report.all_pass() { "PASS" } else { "FAIL" });
    for f in run_a.files.iter().chain(&run_b.files) {
        println!("wrote {}", f.display());
    }
    if !report.all_pass() {
        std::process::exit(1);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Sample(a) => run(a, "sample"),
        Cmd::Gap(a) => run(a, "gap"),
        Cmd::Correlation(a) => run(a, "correlation"),
        Cmd::LocalLaw(a) => run(a, "local_law"),
        Cmd::Localization(a) => run(a, "localization"),
        Cmd::FredholmTable(a) => run(a, "fredholm_table"),
        Cmd::Compare(a) => compare(a),
    }
}
