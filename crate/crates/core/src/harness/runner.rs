//! Deterministic experiment execution.
//!
//! Samples are generated by a worker pool mapping sample indices to
//! (sample, diagonalize, per-sample statistic); every index derives its own
//! RNG stream, results are collected in index order, and aggregation runs
//! single-threaded. Outputs are therefore a pure function of (config, seed),
//! whatever the worker count. The one exception is the manifest's wall-time
//! field, which is inherently volatile.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, StatisticSpec};
use crate::eigensolver::{eigenvalues, EigenError, Spectrum};
use crate::ensemble::{ou_interpolate, sample_wigner, EnsembleError};
use crate::gapstats::{
    correlation_statistic, gap_curve, gap_curve_samples, CorrelationEstimate, GapStatistic,
    GapStatsError,
};
use crate::predict::{fredholm_det, gap_density, gap_limit_cdf, PredictError};
use crate::rng::StreamKey;
use crate::spectral::{local_law_check, localization_check, LocalLawReport, LocalizationReport, SpectralError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    GapStats(#[from] GapStatsError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error("eigensolver failures exceeded 1% of samples: {failures}/{samples}")]
    TooManyFailures { failures: usize, samples: usize },
    #[error("all samples failed to diagonalize")]
    NoUsableSamples,
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("curves must be nonempty and of equal length")]
    CurveShapeMismatch,
    #[error("ks distance requires monotone nondecreasing curves")]
    NonMonotoneCurve,
    #[error("comparison arms must share n, samples, window, and statistic")]
    ArmsMismatch,
    #[error("subcommand expects a `{expected}` statistic, config has `{got}`")]
    StatisticMismatch {
        expected: &'static str,
        got: &'static str,
    },
}

/// Runtime options that do not affect results.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker thread cap; `None` uses the global pool. The per-sample matrix
    /// footprint is what bounds a sensible value.
    pub workers: Option<usize>,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        RunOptions {
            out_dir: out_dir.into(),
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }
}

/// In-memory results of a run, alongside the files written.
#[derive(Debug)]
pub enum Outcome {
    Gap {
        s_grid: Vec<f64>,
        curve: Vec<GapStatistic>,
        /// Per-sample curves, for bootstrap estimates downstream.
        per_sample: Vec<Vec<f64>>,
    },
    Correlation(CorrelationEstimate),
    LocalLaw(LocalLawReport),
    Localization(LocalizationReport),
    Sample {
        spectra: Vec<Spectrum>,
    },
    FredholmTable {
        rows: Vec<FredholmRow>,
    },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FredholmRow {
    pub alpha: f64,
    pub e: f64,
    pub e_err: f64,
    pub density: f64,
    pub cdf: f64,
}

#[derive(Debug)]
pub struct RunSummary {
    pub config_hash: String,
    pub samples_ok: usize,
    pub failures: usize,
    pub files: Vec<PathBuf>,
    pub outcome: Outcome,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_hash: &'a str,
    seed: u64,
    version: &'a str,
    wall_time_ms: u128,
    samples_ok: usize,
    failures: usize,
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    let mut f = fs::File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(text.as_bytes()).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Diagonalize all samples of the configured ensemble. Failed samples are
/// counted; more than 1% of them aborts the run.
fn compute_spectra(
    cfg: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<(Vec<Spectrum>, usize), HarnessError> {
    let (off, diag) = cfg.ensemble.atoms(cfg.n)?;
    let t = cfg.ensemble.resolve_ou_time(cfg.n);
    let key = StreamKey::new(cfg.seed, cfg.identity_hash());
    let n = cfg.n;

    let job = || -> Vec<Result<Spectrum, EigenError>> {
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = key.stream(i);
                let h = sample_wigner(n, &off, &diag, &mut rng)
                    .expect("config validation guarantees a sampleable ensemble");
                let h = match t {
                    Some(t) => ou_interpolate(&h, t, &mut rng)
                        .expect("config validation guarantees t >= 0"),
                    None => h,
                };
                eigenvalues(&h)
            })
            .collect()
    };

    let results = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .expect("thread pool")
            .install(job),
        None => job(),
    };

    let failures = results.iter().filter(|r| r.is_err()).count();
    if failures * 100 > cfg.samples {
        return Err(HarnessError::TooManyFailures {
            failures,
            samples: cfg.samples,
        });
    }
    let spectra: Vec<Spectrum> = results.into_iter().filter_map(Result::ok).collect();
    if spectra.is_empty() {
        return Err(HarnessError::NoUsableSamples);
    }
    Ok((spectra, failures))
}

/// Run one experiment: sample, diagonalize, aggregate, and write the
/// statistic's CSV/JSON artifacts plus a run manifest.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<RunSummary, HarnessError> {
    cfg.validate()?;
    let started = Instant::now();
    let out = &opts.out_dir;
    fs::create_dir_all(out).map_err(|source| HarnessError::Io {
        path: out.clone(),
        source,
    })?;
    let mut files = Vec::new();

    let needs_samples = !matches!(cfg.statistic, StatisticSpec::FredholmTable(_));
    let (spectra, failures) = if needs_samples {
        compute_spectra(cfg, opts.workers)?
    } else {
        (Vec::new(), 0)
    };

    let outcome = match &cfg.statistic {
        StatisticSpec::Gap(g) => {
            let window = cfg.window.to_window()?;
            let s_grid = g.s_grid();
            let per_sample = gap_curve_samples(&spectra, &window, &s_grid)?;
            let curve = gap_curve(&spectra, &window, &s_grid)?;
            let mut text = String::from("s,value,std_error,samples\n");
            for p in &curve {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    p.s, p.value, p.std_error, p.samples
                ));
            }
            let path = out.join("gap_curve.csv");
            write_text(&path, &text)?;
            files.push(path);
            Outcome::Gap {
                s_grid,
                curve,
                per_sample,
            }
        }
        StatisticSpec::Correlation(c) => {
            let window = cfg.window.to_window()?;
            let tf = c.test_function.build()?;
            let est = correlation_statistic(&spectra, &tf, &window, c.quad_nodes)?;
            let path = out.join("correlation.csv");
            write_text(
                &path,
                &format!(
                    "stat_id,k,u,eps,value,std_error,samples\n{},{},{},{},{},{},{}\n",
                    est.test_function,
                    est.k,
                    window.u(),
                    window.eps(),
                    est.value,
                    est.std_error,
                    est.samples
                ),
            )?;
            files.push(path);
            Outcome::Correlation(est)
        }
        StatisticSpec::LocalLaw(l) => {
            let report = local_law_check(
                &spectra,
                l.kappa,
                l.delta,
                l.eps0,
                l.eta_points,
                l.e_step_frac,
            )?;
            let path = out.join("local_law.json");
            write_text(
                &path,
                &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"),
            )?;
            files.push(path);
            Outcome::LocalLaw(report)
        }
        StatisticSpec::Localization(l) => {
            let report = localization_check(&spectra, l.delta_idx)?;
            let mut text = String::from("sample_index,max_abs_dev\n");
            for (i, d) in report.per_sample_max.iter().enumerate() {
                text.push_str(&format!("{},{}\n", i, d));
            }
            let csv = out.join("localization.csv");
            write_text(&csv, &text)?;
            files.push(csv);
            let path = out.join("localization.json");
            write_text(
                &path,
                &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"),
            )?;
            files.push(path);
            Outcome::Localization(report)
        }
        StatisticSpec::Sample(s) => {
            let mut text = String::from("sample_index");
            for i in 1..=cfg.n {
                text.push_str(&format!(",lambda_{i}"));
            }
            text.push('\n');
            for (i, sp) in spectra.iter().enumerate() {
                text.push_str(&i.to_string());
                for v in sp.values() {
                    text.push_str(&format!(",{v}"));
                }
                text.push('\n');
            }
            let path = out.join("spectra.csv");
            write_text(&path, &text)?;
            files.push(path);
            if s.dump_matrices {
                // re-derive the matrices from the same streams
                let (off, diag) = cfg.ensemble.atoms(cfg.n)?;
                let t = cfg.ensemble.resolve_ou_time(cfg.n);
                let key = StreamKey::new(cfg.seed, cfg.identity_hash());
                for i in 0..cfg.samples as u64 {
                    let mut rng = key.stream(i);
                    let h = sample_wigner(cfg.n, &off, &diag, &mut rng)?;
                    let h = match t {
                        Some(t) => ou_interpolate(&h, t, &mut rng)?,
                        None => h,
                    };
                    let path = out.join(format!("matrix_{i:04}.csv"));
                    let mut buf = Vec::new();
                    h.write_upper_csv(&mut buf).expect("write to memory");
                    write_text(&path, std::str::from_utf8(&buf).expect("ascii csv"))?;
                    files.push(path);
                }
            }
            Outcome::Sample { spectra }
        }
        StatisticSpec::FredholmTable(f) => {
            let count = (f.alpha_max / f.alpha_step).round() as usize;
            let mut rows = Vec::with_capacity(count + 1);
            for i in 0..=count {
                let alpha = i as f64 * f.alpha_step;
                let ev = fredholm_det(alpha, f.m)?;
                let density = if alpha > f.h {
                    gap_density(alpha, f.m, f.h)?
                } else {
                    0.0
                };
                let cdf = gap_limit_cdf(alpha, f.m, f.h)?;
                rows.push(FredholmRow {
                    alpha,
                    e: ev.value,
                    e_err: ev.error_estimate,
                    density,
                    cdf,
                });
            }
            let mut text = String::from("alpha,E,E_err,density,cdf\n");
            for r in &rows {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.alpha, r.e, r.e_err, r.density, r.cdf
                ));
            }
            let path = out.join("fredholm.csv");
            write_text(&path, &text)?;
            files.push(path);
            Outcome::FredholmTable { rows }
        }
    };

    let config_hash = format!("{:016x}", cfg.identity_hash());
    let samples_ok = if needs_samples {
        cfg.samples - failures
    } else {
        0
    };
    let manifest = Manifest {
        config_hash: &config_hash,
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_ms: started.elapsed().as_millis(),
        samples_ok,
        failures,
    };
    let path = out.join("manifest.json");
    write_text(
        &path,
        &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"),
    )?;
    files.push(path);

    Ok(RunSummary {
        config_hash,
        samples_ok,
        failures,
        files,
        outcome,
    })
}
