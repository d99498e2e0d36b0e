//! Empirical bulk statistics: the windowed nearest-gap distribution and the
//! averaged k-point correlation statistic in its sum-over-tuples form.
//!
//! Both statistics rescale local eigenvalue coordinates by `n rho_sc(u)` so
//! the mean spacing becomes 1, and average over the energy window
//! `[u - eps, u + eps]`. The correlation estimator restricts tuple
//! enumeration to eigenvalues whose rescaled coordinates can intersect the
//! test function's support; the skipped terms are exact zeros, so pruning is
//! an optimization, not an approximation (see the dense variant used as a
//! brute-force cross-check).

use serde::Serialize;
use thiserror::Error;

use crate::eigensolver::Spectrum;
use crate::quad::GaussLegendre;
use crate::spectral::{rho_sc, EnergyWindow};

#[derive(Debug, Error, PartialEq)]
pub enum GapStatsError {
    #[error("no spectra supplied")]
    EmptySpectra,
    #[error("spectra have mixed sizes ({0} vs {1})")]
    MixedSizes(usize, usize),
    #[error("s grid must be nonempty and ascending")]
    BadSGrid,
    #[error("gap statistic needs s >= 0, got {0}")]
    NegativeS(f64),
    #[error("test function needs 1 <= k <= 3 variables, got {0}")]
    BadArity(usize),
    #[error("degenerate bump box: lo {lo} must be below hi {hi}")]
    DegenerateBox { lo: f64, hi: f64 },
    #[error("bump smoothing width {width} must be positive and at most half the box ({half})")]
    BadWidth { width: f64, half: f64 },
    #[error("test function arity {expected} does not match estimator arity {got}")]
    ArityMismatch { expected: usize, got: usize },
}

/// One point of the windowed gap distribution
/// `Lambda_n(u, s, eps) = #{j < n : gap_j <= s/(n rho_sc(u)), |lambda_j - u| <= eps} / (2 eps n rho_sc(u))`,
/// averaged over samples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapStatistic {
    pub u: f64,
    pub eps: f64,
    pub s: f64,
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
    pub samples: usize,
}

/// The gap statistic of a single spectrum at one `s`.
pub fn gap_statistic(spectrum: &Spectrum, window: &EnergyWindow, s: f64) -> f64 {
    let n = spectrum.n();
    let rho = rho_sc(window.u());
    let cutoff = s / (n as f64 * rho);
    let v = spectrum.values();
    let mut count = 0usize;
    for j in 0..n.saturating_sub(1) {
        if (v[j] - window.u()).abs() <= window.eps() && v[j + 1] - v[j] <= cutoff {
            count += 1;
        }
    }
    count as f64 / (2.0 * window.eps() * n as f64 * rho)
}

/// Per-sample gap curves over `s_grid`; row `m` holds sample `m`'s values.
pub fn gap_curve_samples(
    spectra: &[Spectrum],
    window: &EnergyWindow,
    s_grid: &[f64],
) -> Result<Vec<Vec<f64>>, GapStatsError> {
    if spectra.is_empty() {
        return Err(GapStatsError::EmptySpectra);
    }
    if s_grid.is_empty() || s_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(GapStatsError::BadSGrid);
    }
    if let Some(&s) = s_grid.first() {
        if s < 0.0 {
            return Err(GapStatsError::NegativeS(s));
        }
    }
    let n = spectra[0].n();
    for sp in spectra {
        if sp.n() != n {
            return Err(GapStatsError::MixedSizes(n, sp.n()));
        }
    }
    Ok(spectra
        .iter()
        .map(|sp| s_grid.iter().map(|&s| gap_statistic(sp, window, s)).collect())
        .collect())
}

/// Sample-averaged gap curve: the Monte Carlo estimate of `E Lambda_n` per
/// grid point, with standard errors.
pub fn gap_curve(
    spectra: &[Spectrum],
    window: &EnergyWindow,
    s_grid: &[f64],
) -> Result<Vec<GapStatistic>, GapStatsError> {
    let rows = gap_curve_samples(spectra, window, s_grid)?;
    let m = rows.len() as f64;
    let n = spectra[0].n();
    Ok(s_grid
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mean = rows.iter().map(|r| r[i]).sum::<f64>() / m;
            let var = if rows.len() > 1 {
                rows.iter().map(|r| (r[i] - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            GapStatistic {
                u: window.u(),
                eps: window.eps(),
                s,
                value: mean,
                std_error: (var / m).sqrt(),
                n,
                samples: rows.len(),
            }
        })
        .collect())
}

/// Quintic smoothstep: 0 below 0, 1 above 1, C^2 across both joins.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// A C^2 bump supported exactly on `[lo, hi]`, identically 1 on
/// `[lo + width, hi - width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    lo: f64,
    hi: f64,
    width: f64,
}

impl Bump {
    pub fn new(lo: f64, hi: f64, width: f64) -> Result<Self, GapStatsError> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(GapStatsError::DegenerateBox { lo, hi });
        }
        let half = (hi - lo) / 2.0;
        if !(width > 0.0) || width > half {
            return Err(GapStatsError::BadWidth { width, half });
        }
        Ok(Bump { lo, hi, width })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo || x >= self.hi {
            return 0.0;
        }
        smoothstep((x - self.lo) / self.width) * smoothstep((self.hi - x) / self.width)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
enum TfKind {
    /// Product of per-coordinate bumps.
    Product(Vec<Bump>),
    /// `b(a1) b(a2) psi(a1 - a2)`: a two-point bump with a difference factor.
    PairProduct { each: Bump, diff: Bump },
}

/// A smooth compactly supported test function of `k <= 3` variables with
/// sup-norm 1 and exactly bounded support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    k: usize,
    kind: TfKind,
}

impl TestFunction {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eval(&self, args: &[f64]) -> f64 {
        debug_assert_eq!(args.len(), self.k);
        match &self.kind {
            TfKind::Product(bumps) => bumps
                .iter()
                .zip(args)
                .map(|(b, &x)| b.eval(x))
                .product(),
            TfKind::PairProduct { each, diff } => {
                each.eval(args[0]) * each.eval(args[1]) * diff.eval(args[0] - args[1])
            }
        }
    }

    /// Per-coordinate support box (the function vanishes outside it).
    pub fn support(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            TfKind::Product(bumps) => (
                bumps.iter().map(|b| b.lo).collect(),
                bumps.iter().map(|b| b.hi).collect(),
            ),
            TfKind::PairProduct { each, .. } => {
                (vec![each.lo; 2], vec![each.hi; 2])
            }
        }
    }

    /// Short descriptor for reports.
    pub fn describe(&self) -> String {
        match &self.kind {
            TfKind::Product(bumps) => format!("box_bump_k{}_w{}", self.k, bumps[0].width),
            TfKind::PairProduct { each, diff } => format!(
                "pair_bump_each[{},{}]_diff[{},{}]",
                each.lo, each.hi, diff.lo, diff.hi
            ),
        }
    }
}

/// A product bump over the box `[lo_d, hi_d]` with common smoothing width.
pub fn make_bump(lo: &[f64], hi: &[f64], width: f64) -> Result<TestFunction, GapStatsError> {
    let k = lo.len();
    if k == 0 || k > 3 || hi.len() != k {
        return Err(GapStatsError::BadArity(k.max(hi.len())));
    }
    let bumps = lo
        .iter()
        .zip(hi)
        .map(|(&l, &h)| Bump::new(l, h, width))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TestFunction {
        k,
        kind: TfKind::Product(bumps),
    })
}

/// The two-point test function `b(a1) b(a2) psi(a1 - a2)`.
pub fn make_pair_bump(each: Bump, diff: Bump) -> TestFunction {
    TestFunction {
        k: 2,
        kind: TfKind::PairProduct { each, diff },
    }
}

/// Monte Carlo estimate of the averaged k-point correlation statistic.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationEstimate {
    pub k: usize,
    pub window: EnergyWindow,
    pub test_function: String,
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub n: usize,
}

fn tuple_norm(n: usize, k: usize) -> f64 {
    // n^k (n-k)! / n! = prod_{j=1}^{k-1} n/(n-j): the exact factor relating
    // the ordered-tuple sum to the smeared correlation integral.
    (1..k).map(|j| n as f64 / (n - j) as f64).product()
}

/// Value of the statistic for one spectrum. `pruned` restricts each tuple
/// coordinate to the eigenvalues whose rescaled position can land in the
/// support of `f`; all skipped terms evaluate to exactly zero.
fn correlation_sample_value(
    spectrum: &Spectrum,
    f: &TestFunction,
    window: &EnergyWindow,
    nodes: &[(f64, f64)],
    pruned: bool,
) -> f64 {
    let n = spectrum.n();
    let nf = n as f64;
    let vals = spectrum.values();
    let k = f.k();
    let (lo, hi) = f.support();
    let mut total = 0.0;
    let mut args = [0.0f64; 3];
    for &(uq, wq) in nodes {
        let rho = rho_sc(uq);
        let range = |d: usize| -> (usize, usize) {
            if !pruned {
                return (0, n);
            }
            let a = uq + lo[d] / (nf * rho);
            let b = uq + hi[d] / (nf * rho);
            (
                vals.partition_point(|&x| x < a),
                vals.partition_point(|&x| x <= b),
            )
        };
        let r0 = range(0);
        match k {
            1 => {
                for i0 in r0.0..r0.1 {
                    args[0] = rho * nf * (vals[i0] - uq);
                    total += wq * f.eval(&args[..1]);
                }
            }
            2 => {
                let r1 = range(1);
                for i0 in r0.0..r0.1 {
                    args[0] = rho * nf * (vals[i0] - uq);
                    for i1 in r1.0..r1.1 {
                        if i1 == i0 {
                            continue;
                        }
                        args[1] = rho * nf * (vals[i1] - uq);
                        total += wq * f.eval(&args[..2]);
                    }
                }
            }
            3 => {
                let r1 = range(1);
                let r2 = range(2);
                for i0 in r0.0..r0.1 {
                    args[0] = rho * nf * (vals[i0] - uq);
                    for i1 in r1.0..r1.1 {
                        if i1 == i0 {
                            continue;
                        }
                        args[1] = rho * nf * (vals[i1] - uq);
                        for i2 in r2.0..r2.1 {
                            if i2 == i0 || i2 == i1 {
                                continue;
                            }
                            args[2] = rho * nf * (vals[i2] - uq);
                            total += wq * f.eval(&args[..3]);
                        }
                    }
                }
            }
            _ => unreachable!("arity checked by caller"),
        }
    }
    total * tuple_norm(n, k) / (2.0 * window.eps())
}

fn correlation_impl(
    spectra: &[Spectrum],
    f: &TestFunction,
    window: &EnergyWindow,
    quad_nodes: usize,
    pruned: bool,
) -> Result<CorrelationEstimate, GapStatsError> {
    if spectra.is_empty() {
        return Err(GapStatsError::EmptySpectra);
    }
    let k = f.k();
    if k == 0 || k > 3 {
        return Err(GapStatsError::BadArity(k));
    }
    let n = spectra[0].n();
    for sp in spectra {
        if sp.n() != n {
            return Err(GapStatsError::MixedSizes(n, sp.n()));
        }
    }
    let gl = GaussLegendre::new(quad_nodes).expect("node count >= 1");
    let nodes: Vec<(f64, f64)> = gl.mapped(window.lo(), window.hi()).collect();
    let per_sample: Vec<f64> = spectra
        .iter()
        .map(|sp| correlation_sample_value(sp, f, window, &nodes, pruned))
        .collect();
    let m = per_sample.len() as f64;
    let mean = per_sample.iter().sum::<f64>() / m;
    let var = if per_sample.len() > 1 {
        per_sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(CorrelationEstimate {
        k,
        window: *window,
        test_function: f.describe(),
        value: mean,
        std_error: (var / m).sqrt(),
        samples: per_sample.len(),
        n,
    })
}

/// The averaged k-point correlation statistic with support pruning. The
/// u'-integral inside each tuple term uses a `quad_nodes`-point
/// Gauss-Legendre rule on the window (64 by default in the harness).
pub fn correlation_statistic(
    spectra: &[Spectrum],
    f: &TestFunction,
    window: &EnergyWindow,
    quad_nodes: usize,
) -> Result<CorrelationEstimate, GapStatsError> {
    correlation_impl(spectra, f, window, quad_nodes, true)
}

/// Brute-force variant: the full distinct-tuple summation with no support
/// pruning. Cost grows like n^k; intended for small n cross-checks.
pub fn correlation_statistic_dense(
    spectra: &[Spectrum],
    f: &TestFunction,
    window: &EnergyWindow,
    quad_nodes: usize,
) -> Result<CorrelationEstimate, GapStatsError> {
    correlation_impl(spectra, f, window, quad_nodes, false)
}
