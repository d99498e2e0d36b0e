//! Universal limit objects: the Dyson sine kernel, its k x k determinants and
//! integrals against test functions, and the Fredholm determinant
//! `E(alpha) = det(1 - K_alpha)` of the sine-kernel operator on
//! `L^2((0, alpha))`, from which the limiting gap law follows as
//! `cdf(s) = E'(s) - E'(0)`.

use thiserror::Error;

use crate::gapstats::TestFunction;
use crate::quad::{adaptive_box, GaussLegendre, QuadError};

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("alpha must be nonnegative and finite, got {0}")]
    BadAlpha(f64),
    #[error("Nystrom order {0} too small; need m >= 4")]
    BadOrder(usize),
    #[error("s must be nonnegative, got {0}")]
    BadS(f64),
    #[error("difference step h = {h} unusable at s = {s}")]
    BadStep { s: f64, h: f64 },
    #[error("finite-difference step failed the Richardson consistency check: |D(h/2) - D(h)| = {discrepancy}")]
    StepInconsistent { discrepancy: f64 },
    #[error("test functions of k > 3 variables are not supported (got {0})")]
    UnsupportedK(usize),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Dyson sine kernel `sin(pi(x-y)) / (pi(x-y))`, with the removable
/// singularity on the diagonal handled by its Taylor form.
pub fn sine_kernel(x: f64, y: f64) -> f64 {
    let d = std::f64::consts::PI * (x - y);
    if d.abs() < 1e-8 {
        let d2 = d * d;
        1.0 - d2 / 6.0 + d2 * d2 / 120.0
    } else {
        d.sin() / d
    }
}

/// Determinant of a dense row-major `n x n` matrix by partially pivoted
/// Gaussian elimination. The matrix is consumed as workspace.
fn lu_det(a: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in col + 1..n {
            let factor = a[row * n + col] / d;
            if factor == 0.0 {
                continue;
            }
            for j in col + 1..n {
                a[row * n + j] -= factor * a[col * n + j];
            }
        }
    }
    det
}

/// `det(K(points[i], points[j]))_{i,j}`: the k-point sine-kernel correlation
/// determinant. Lies in [0, 1]; vanishes when two points coincide.
pub fn sine_det(points: &[f64]) -> f64 {
    let k = points.len();
    if k == 0 {
        return 1.0;
    }
    let mut m = vec![0.0f64; k * k];
    for i in 0..k {
        for j in 0..k {
            m[i * k + j] = sine_kernel(points[i], points[j]);
        }
    }
    lu_det(&mut m, k)
}

/// `\int f(a_1..a_k) det(K(a_i, a_j)) da` over the support box of `f`, by
/// adaptive tensor-product quadrature with relative error target `1e-6`.
pub fn sine_correlation_integral(f: &TestFunction) -> Result<f64, PredictError> {
    let k = f.k();
    if k > 3 {
        return Err(PredictError::UnsupportedK(k));
    }
    let (lo, hi) = f.support();
    // Two passes: a crude scale estimate fixes the absolute tolerance that
    // realizes the relative target.
    let integrand = |p: &[f64]| f.eval(p) * sine_det(p);
    let coarse = adaptive_box(&integrand, &lo, &hi, 1e-4)?;
    let tol = (1e-6 * coarse.abs()).max(1e-12);
    Ok(adaptive_box(&integrand, &lo, &hi, tol)?)
}

/// One Nystrom evaluation of the Fredholm determinant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FredholmEvaluation {
    pub alpha: f64,
    pub quad_order: usize,
    /// `det(1 - K_alpha)`, in (0, 1].
    pub value: f64,
    /// Order-doubling error estimate `|E_m - E_{2m}|`.
    pub error_estimate: f64,
}

use serde::Serialize;

fn nystrom_det(alpha: f64, m: usize) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    let gl = GaussLegendre::new(m).expect("m >= 4");
    let pts: Vec<(f64, f64)> = gl.mapped(0.0, alpha).collect();
    let sqrt_w: Vec<f64> = pts.iter().map(|&(_, w)| w.sqrt()).collect();
    let mut a = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            let kij = sine_kernel(pts[i].0, pts[j].0);
            a[i * m + j] = (if i == j { 1.0 } else { 0.0 }) - sqrt_w[i] * kij * sqrt_w[j];
        }
    }
    lu_det(&mut a, m)
}

/// `det(1 - K_alpha)` by symmetric Nystrom discretization on Gauss-Legendre
/// nodes over `(0, alpha)`, with an order-doubling error estimate.
pub fn fredholm_det(alpha: f64, m: usize) -> Result<FredholmEvaluation, PredictError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(PredictError::BadAlpha(alpha));
    }
    if m < 4 {
        return Err(PredictError::BadOrder(m));
    }
    let value = nystrom_det(alpha, m);
    let refined = nystrom_det(alpha, 2 * m);
    Ok(FredholmEvaluation {
        alpha,
        quad_order: m,
        value,
        error_estimate: (value - refined).abs(),
    })
}

/// `E'(s)` by central differencing (one-sided at s = 0, which also checks the
/// exact slope E'(0) = -1).
fn e_prime(s: f64, m: usize, h: f64) -> f64 {
    let e = |a: f64| nystrom_det(a, m);
    if s < h {
        (-3.0 * e(s) + 4.0 * e(s + h) - e(s + 2.0 * h)) / (2.0 * h)
    } else {
        (e(s + h) - e(s - h)) / (2.0 * h)
    }
}

/// The limiting gap law `int_0^s E''(alpha) d alpha = E'(s) - E'(0)`.
///
/// A half-step Richardson comparison guards the finite-difference step, and
/// the known slope at the origin is asserted to O(h^2).
pub fn gap_limit_cdf(s: f64, m: usize, h: f64) -> Result<f64, PredictError> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(PredictError::BadS(s));
    }
    if m < 4 {
        return Err(PredictError::BadOrder(m));
    }
    if !(h > 0.0) || h > 0.1 {
        return Err(PredictError::BadStep { s, h });
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let dp0 = e_prime(0.0, m, h);
    let dps = e_prime(s, m, h);
    let value = dps - dp0;
    let half = e_prime(s, m, 0.5 * h) - e_prime(0.0, m, 0.5 * h);
    let discrepancy = (half - value).abs();
    if discrepancy > 1e-5 + 1e-3 * value.abs() {
        return Err(PredictError::StepInconsistent { discrepancy });
    }
    if (dp0 + 1.0).abs() > 1e-4 {
        return Err(PredictError::StepInconsistent {
            discrepancy: (dp0 + 1.0).abs(),
        });
    }
    Ok(value)
}

/// The limiting gap density `E''(s)` by second central differences.
pub fn gap_density(s: f64, m: usize, h: f64) -> Result<f64, PredictError> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(PredictError::BadS(s));
    }
    if m < 4 {
        return Err(PredictError::BadOrder(m));
    }
    if !(h > 0.0) || h >= s || h > 0.1 {
        return Err(PredictError::BadStep { s, h });
    }
    let e = |a: f64| nystrom_det(a, m);
    let value = (e(s + h) - 2.0 * e(s) + e(s - h)) / (h * h);
    let hh = 0.5 * h;
    let half = (e(s + hh) - 2.0 * e(s) + e(s - hh)) / (hh * hh);
    let discrepancy = (half - value).abs();
    if discrepancy > 1e-4 + 1e-2 * value.abs() {
        return Err(PredictError::StepInconsistent { discrepancy });
    }
    Ok(value)
}
