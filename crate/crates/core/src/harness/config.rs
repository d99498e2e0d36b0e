//! Experiment configuration: a JSON document with strict schema checking
//! (unknown keys are errors) and defaults for the common knobs.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::{make_atom, truncate_atom, AtomDistribution, AtomKind, EnsembleError, Role};
use crate::gapstats::{make_bump, make_pair_bump, Bump, GapStatsError, TestFunction};
use crate::rng::fnv1a;
use crate::spectral::{EnergyWindow, SpectralError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON for the experiment schema: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Window(#[from] SpectralError),
    #[error(transparent)]
    TestFunction(#[from] GapStatsError),
}

/// Top-level experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Matrix size.
    pub n: usize,
    /// Monte Carlo sample count.
    pub samples: usize,
    /// Root seed; per-sample streams derive from (seed, config identity, index).
    pub seed: u64,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub window: WindowSpec,
    pub statistic: StatisticSpec,
    /// Output directory; the CLI `--out` flag overrides it.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Semantic validation beyond the JSON schema.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::Invalid("n must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(ConfigError::Invalid("samples must be at least 1".into()));
        }
        self.window.to_window()?;
        self.ensemble.atoms(self.n)?;
        match &self.statistic {
            StatisticSpec::Gap(g) => {
                if !(g.s_max > 0.0) || !(g.s_step > 0.0) || g.s_step > g.s_max {
                    return Err(ConfigError::Invalid(format!(
                        "gap grid (s_max={}, s_step={}) must be positive with s_step <= s_max",
                        g.s_max, g.s_step
                    )));
                }
            }
            StatisticSpec::Correlation(c) => {
                let tf = c.test_function.build()?;
                if tf.k() != c.k {
                    return Err(ConfigError::Invalid(format!(
                        "statistic k = {} does not match test function arity {}",
                        c.k,
                        tf.k()
                    )));
                }
                if c.k > 3 {
                    return Err(ConfigError::Invalid(format!(
                        "correlation order k = {} exceeds the supported maximum 3",
                        c.k
                    )));
                }
                if c.quad_nodes == 0 {
                    return Err(ConfigError::Invalid("quad_nodes must be positive".into()));
                }
            }
            StatisticSpec::LocalLaw(l) => {
                if !(l.kappa > 0.0 && l.kappa < 2.0) {
                    return Err(ConfigError::Invalid(format!(
                        "local-law kappa = {} outside (0, 2)",
                        l.kappa
                    )));
                }
                if !(l.delta > 0.0 && l.delta <= 1.0) {
                    return Err(ConfigError::Invalid(format!(
                        "local-law delta = {} outside (0, 1]",
                        l.delta
                    )));
                }
                if !(l.e_step_frac > 0.0 && l.e_step_frac <= 0.25) {
                    return Err(ConfigError::Invalid(format!(
                        "local-law E-grid step fraction {} outside (0, 1/4]",
                        l.e_step_frac
                    )));
                }
            }
            StatisticSpec::Localization(l) => {
                if !(0.0..0.5).contains(&l.delta_idx) {
                    return Err(ConfigError::Invalid(format!(
                        "localization delta_idx = {} outside [0, 0.5)",
                        l.delta_idx
                    )));
                }
            }
            StatisticSpec::Sample(_) => {}
            StatisticSpec::FredholmTable(f) => {
                if !(f.alpha_max > 0.0) || !(f.alpha_step > 0.0) || f.m < 4 || !(f.h > 0.0) {
                    return Err(ConfigError::Invalid(
                        "fredholm table needs alpha_max, alpha_step, h > 0 and m >= 4".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Hash of the statistic-defining fields (everything except output
    /// paths); used as the manifest identity and the RNG experiment id.
    pub fn identity_hash(&self) -> u64 {
        #[derive(Serialize)]
        struct Identity<'a> {
            n: usize,
            samples: usize,
            seed: u64,
            ensemble: &'a EnsembleSpec,
            window: &'a WindowSpec,
            statistic: &'a StatisticSpec,
        }
        let id = Identity {
            n: self.n,
            samples: self.samples,
            seed: self.seed,
            ensemble: &self.ensemble,
            window: &self.window,
            statistic: &self.statistic,
        };
        fnv1a(serde_json::to_string(&id).expect("config serializes").as_bytes())
    }
}

/// Parse and validate an experiment config from JSON text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = serde_json::from_str(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Which atoms fill the matrix, whether they are truncated, and whether the
/// sampled matrix is evolved toward GUE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default = "AtomSpec::gaussian")]
    pub off_diag: AtomSpec,
    #[serde(default = "AtomSpec::gaussian")]
    pub diag: AtomSpec,
    /// Truncate atoms to the bound (log n)^3 before sampling.
    #[serde(default)]
    pub truncate: bool,
    #[serde(default)]
    pub ou_time: OuTime,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            off_diag: AtomSpec::Gaussian,
            diag: AtomSpec::Gaussian,
            truncate: false,
            ou_time: OuTime::default(),
        }
    }
}

impl EnsembleSpec {
    /// Materialize the two atom distributions (truncated if requested).
    pub fn atoms(&self, n: usize) -> Result<(AtomDistribution, AtomDistribution), ConfigError> {
        let mut off = make_atom(self.off_diag.kind(), Role::OffDiagonal)?;
        let mut diag = make_atom(self.diag.kind(), Role::Diagonal)?;
        if self.truncate {
            off = truncate_atom(&off, n)?;
            diag = truncate_atom(&diag, n)?;
        }
        Ok((off, diag))
    }

    /// The Ornstein-Uhlenbeck time to apply after sampling, if any.
    pub fn resolve_ou_time(&self, n: usize) -> Option<f64> {
        self.ou_time.resolve(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomSpec {
    Gaussian,
    Bernoulli,
    Uniform,
    Laplace,
    ThreePoint { a: f64, b: f64 },
}

impl AtomSpec {
    fn gaussian() -> Self {
        AtomSpec::Gaussian
    }

    pub fn kind(&self) -> AtomKind {
        match *self {
            AtomSpec::Gaussian => AtomKind::Gaussian,
            AtomSpec::Bernoulli => AtomKind::Bernoulli,
            AtomSpec::Uniform => AtomKind::Uniform,
            AtomSpec::Laplace => AtomKind::Laplace,
            AtomSpec::ThreePoint { a, b } => AtomKind::ThreePoint { a, b },
        }
    }
}

/// Ornstein-Uhlenbeck evolution time: a number, `"none"`, or `"paper"`
/// (which resolves to `n^{-0.99}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OuTime {
    Fixed(f64),
    Named(OuTimeName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuTimeName {
    None,
    Paper,
}

impl Default for OuTime {
    fn default() -> Self {
        OuTime::Named(OuTimeName::None)
    }
}

impl OuTime {
    pub fn resolve(&self, n: usize) -> Option<f64> {
        match *self {
            OuTime::Fixed(t) => Some(t),
            OuTime::Named(OuTimeName::None) => None,
            OuTime::Named(OuTimeName::Paper) => Some((n as f64).powf(-0.99)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    #[serde(default)]
    pub u: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    0.2
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { u: 0.0, eps: 0.2 }
    }
}

impl WindowSpec {
    pub fn to_window(self) -> Result<EnergyWindow, SpectralError> {
        EnergyWindow::new(self.u, self.eps)
    }
}

/// What to measure. Externally tagged, e.g. `{"gap": {"s_max": 5.0}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticSpec {
    Gap(GapSpec),
    Correlation(CorrelationSpec),
    LocalLaw(LocalLawSpec),
    Localization(LocalizationSpec),
    Sample(SampleSpec),
    FredholmTable(FredholmTableSpec),
}

impl StatisticSpec {
    pub fn name(&self) -> &'static str {
        match self {
            StatisticSpec::Gap(_) => "gap",
            StatisticSpec::Correlation(_) => "correlation",
            StatisticSpec::LocalLaw(_) => "local_law",
            StatisticSpec::Localization(_) => "localization",
            StatisticSpec::Sample(_) => "sample",
            StatisticSpec::FredholmTable(_) => "fredholm_table",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSpec {
    #[serde(default = "default_s_max")]
    pub s_max: f64,
    #[serde(default = "default_s_step")]
    pub s_step: f64,
}

fn default_s_max() -> f64 {
    5.0
}

fn default_s_step() -> f64 {
    0.1
}

impl GapSpec {
    pub fn s_grid(&self) -> Vec<f64> {
        let count = (self.s_max / self.s_step).round() as usize;
        (0..=count).map(|i| i as f64 * self.s_step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSpec {
    pub k: usize,
    pub test_function: TestFunctionSpec,
    #[serde(default = "default_quad_nodes")]
    pub quad_nodes: usize,
}

fn default_quad_nodes() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctionSpec {
    /// Product of per-coordinate C^2 bumps on `[lo_d, hi_d]`.
    BoxBump {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default = "default_width")]
        width: f64,
    },
    /// `b(a1) b(a2) psi(a1 - a2)` with box `[each_lo, each_hi]^2` and
    /// difference support `[diff_lo, diff_hi]`.
    PairBump {
        each_lo: f64,
        each_hi: f64,
        diff_lo: f64,
        diff_hi: f64,
        #[serde(default = "default_width")]
        width: f64,
    },
}

fn default_width() -> f64 {
    0.05
}

impl TestFunctionSpec {
    pub fn build(&self) -> Result<TestFunction, GapStatsError> {
        match self {
            TestFunctionSpec::BoxBump { lo, hi, width } => make_bump(lo, hi, *width),
            TestFunctionSpec::PairBump {
                each_lo,
                each_hi,
                diff_lo,
                diff_hi,
                width,
            } => Ok(make_pair_bump(
                Bump::new(*each_lo, *each_hi, *width)?,
                Bump::new(*diff_lo, *diff_hi, *width)?,
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalLawSpec {
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default = "default_eta_points")]
    pub eta_points: usize,
    #[serde(default = "default_e_step_frac")]
    pub e_step_frac: f64,
}

fn default_kappa() -> f64 {
    0.5
}

fn default_delta() -> f64 {
    0.2
}

fn default_eps0() -> f64 {
    0.1
}

fn default_eta_points() -> usize {
    6
}

fn default_e_step_frac() -> f64 {
    0.25
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalizationSpec {
    #[serde(default = "default_delta_idx")]
    pub delta_idx: f64,
}

fn default_delta_idx() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    /// Also dump each matrix's upper triangle as CSV (debug aid; dense).
    #[serde(default)]
    pub dump_matrices: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FredholmTableSpec {
    #[serde(default = "default_alpha_max")]
    pub alpha_max: f64,
    #[serde(default = "default_alpha_step")]
    pub alpha_step: f64,
    /// Nystrom quadrature order.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Finite-difference step for the gap density and cdf columns.
    #[serde(default = "default_h")]
    pub h: f64,
}

fn default_alpha_max() -> f64 {
    6.0
}

fn default_alpha_step() -> f64 {
    0.05
}

fn default_m() -> usize {
    40
}

fn default_h() -> f64 {
    1e-3
}

/// Two experiment arms plus comparison thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub a: ExperimentConfig,
    pub b: ExperimentConfig,
    #[serde(default)]
    pub thresholds: CompareThresholds,
    /// Nystrom order for the theory curve.
    #[serde(default = "default_m")]
    pub fredholm_order: usize,
    #[serde(default = "default_h")]
    pub fredholm_h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareThresholds {
    /// KS threshold for each arm against the limiting law.
    #[serde(default = "default_ks")]
    pub vs_theory: f64,
    /// KS threshold between the two arms.
    #[serde(default = "default_ks")]
    pub pairwise: f64,
    /// z-score budget for scalar (correlation) comparisons.
    #[serde(default = "default_sigma")]
    pub sigma_budget: f64,
}

fn default_ks() -> f64 {
    0.05
}

fn default_sigma() -> f64 {
    4.0
}

impl Default for CompareThresholds {
    fn default() -> Self {
        CompareThresholds {
            vs_theory: default_ks(),
            pairwise: default_ks(),
            sigma_budget: default_sigma(),
        }
    }
}
