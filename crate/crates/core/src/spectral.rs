//! Semicircle-law reference quantities and spectrum-level checks.
//!
//! The density `rho_sc(u) = (2 pi)^{-1} sqrt(4 - u^2)` governs the global
//! eigenvalue distribution; its Stieltjes transform `m_sc` has the closed
//! form `(-z + sqrt(z^2 - 4))/2` on the upper half-plane. Everything here is
//! a pure function of spectra, so checks parallelize freely over samples.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::eigensolver::Spectrum;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("window (u={u}, eps={eps}) must satisfy -2 < u - eps < u + eps < 2")]
    BadWindow { u: f64, eps: f64 },
    #[error("quantile argument {0} outside [0, 1]")]
    QuantileOutOfRange(f64),
    #[error("Stieltjes transforms require Im z > 0, got {0}")]
    NonPositiveImag(f64),
    #[error("no spectra supplied")]
    EmptySpectra,
    #[error("spectra have mixed sizes ({0} vs {1})")]
    MixedSizes(usize, usize),
    #[error("local law parameters invalid: {0}")]
    BadLocalLawParams(String),
}

/// A bulk energy window `(u - eps, u + eps)` strictly inside `(-2, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyWindow {
    u: f64,
    eps: f64,
}

impl EnergyWindow {
    pub fn new(u: f64, eps: f64) -> Result<Self, SpectralError> {
        if !(eps > 0.0 && -2.0 < u - eps && u + eps < 2.0) {
            return Err(SpectralError::BadWindow { u, eps });
        }
        Ok(EnergyWindow { u, eps })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn lo(&self) -> f64 {
        self.u - self.eps
    }

    pub fn hi(&self) -> f64 {
        self.u + self.eps
    }
}

/// Semicircle density `(1/2pi) sqrt((4 - u^2)_+)`.
pub fn rho_sc(u: f64) -> f64 {
    (4.0 - u * u).max(0.0).sqrt() / (2.0 * std::f64::consts::PI)
}

/// Cumulative distribution of the semicircle law.
pub fn semicircle_cdf(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// The classical location `t(a)`: the semicircle quantile solving
/// `semicircle_cdf(t) = a`. Monotone in `a`; endpoints map to -+2.
pub fn classical_location(a: f64) -> Result<f64, SpectralError> {
    if !(0.0..=1.0).contains(&a) {
        return Err(SpectralError::QuantileOutOfRange(a));
    }
    if a == 0.0 {
        return Ok(-2.0);
    }
    if a == 1.0 {
        return Ok(2.0);
    }
    let mut lo = -2.0f64;
    let mut hi = 2.0f64;
    // bisection to floating-point resolution; the CDF is strictly increasing
    // on (-2, 2)
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if semicircle_cdf(mid) < a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Empirical Stieltjes transform `(1/n) sum_i 1/(lambda_i - z)` for Im z > 0.
pub fn stieltjes_empirical(s: &Spectrum, z: Complex64) -> Result<Complex64, SpectralError> {
    if z.im <= 0.0 {
        return Err(SpectralError::NonPositiveImag(z.im));
    }
    let sum: Complex64 = s
        .values()
        .iter()
        .map(|&l| (Complex64::new(l, 0.0) - z).inv())
        .sum();
    Ok(sum / s.n() as f64)
}

/// Stieltjes transform of the semicircle law, `(-z + sqrt(z^2 - 4))/2` with
/// the branch mapping the upper half-plane to itself.
pub fn stieltjes_sc(z: Complex64) -> Result<Complex64, SpectralError> {
    if z.im <= 0.0 {
        return Err(SpectralError::NonPositiveImag(z.im));
    }
    let w = (z * z - 4.0).sqrt();
    let m = (-z + w) / 2.0;
    if m.im > 0.0 {
        Ok(m)
    } else {
        Ok((-z - w) / 2.0)
    }
}

/// Count of eigenvalues in the closed interval `[lo, hi]` by binary search.
pub fn count_in_interval(s: &Spectrum, lo: f64, hi: f64) -> usize {
    if hi < lo {
        return 0;
    }
    let v = s.values();
    let a = v.partition_point(|&x| x < lo);
    let b = v.partition_point(|&x| x <= hi);
    b - a
}

/// Per-eta summary of the local-law sweep.
#[derive(Debug, Clone, Serialize)]
pub struct LocalLawReport {
    pub kappa: f64,
    pub delta: f64,
    pub samples: usize,
    pub n: usize,
    /// Ascending geometric grid spanning `[n^{-1+delta}, 1]`.
    pub etas: Vec<f64>,
    /// `sup_dev[j][m]`: sup over the E-grid of `|m_n - m_sc|` at `etas[j]`
    /// for sample `m`.
    pub sup_dev: Vec<Vec<f64>>,
    pub sup_dev_quantiles: Quantiles,
    pub exceed_rate: ExceedRate,
}

#[derive(Debug, Clone, Serialize)]
pub struct Quantiles {
    pub q50: Vec<f64>,
    pub q90: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExceedRate {
    pub eps0: f64,
    /// Fraction of samples whose sup deviation reaches `eps0`, per eta.
    pub per_eta: Vec<f64>,
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < n {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[n - 1]
    }
}

/// Sweep of the local semicircle law: for each eta in a geometric grid over
/// `[n^{-1+delta}, 1]` and each sample, the sup over an E-grid of step
/// `e_step_frac * eta` (at most eta/4) of `|m_n(E + i eta) - m_sc(E + i eta)|`
/// with E ranging over `(-2 + kappa, 2 - kappa)`.
pub fn local_law_check(
    spectra: &[Spectrum],
    kappa: f64,
    delta: f64,
    eps0: f64,
    eta_points: usize,
    e_step_frac: f64,
) -> Result<LocalLawReport, SpectralError> {
    if spectra.is_empty() {
        return Err(SpectralError::EmptySpectra);
    }
    let n = spectra[0].n();
    for s in spectra {
        if s.n() != n {
            return Err(SpectralError::MixedSizes(n, s.n()));
        }
    }
    if !(kappa > 0.0 && kappa < 2.0) {
        return Err(SpectralError::BadLocalLawParams(format!(
            "kappa {kappa} outside (0, 2)"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(SpectralError::BadLocalLawParams(format!(
            "delta {delta} outside (0, 1]"
        )));
    }
    if eta_points < 2 {
        return Err(SpectralError::BadLocalLawParams(
            "need at least 2 eta grid points".into(),
        ));
    }
    if !(e_step_frac > 0.0 && e_step_frac <= 0.25) {
        return Err(SpectralError::BadLocalLawParams(format!(
            "E-grid step fraction {e_step_frac} must lie in (0, 1/4]"
        )));
    }

    let eta_min = (n as f64).powf(-1.0 + delta);
    let etas: Vec<f64> = (0..eta_points)
        .map(|j| {
            let frac = j as f64 / (eta_points - 1) as f64;
            // geometric from eta_min up to 1
            (eta_min.ln() * (1.0 - frac)).exp()
        })
        .collect();

    let e_lo = -2.0 + kappa;
    let e_hi = 2.0 - kappa;
    let sup_dev: Vec<Vec<f64>> = etas
        .iter()
        .map(|&eta| {
            let step = e_step_frac * eta;
            let count = ((e_hi - e_lo) / step).ceil() as usize + 1;
            let sc: Vec<Complex64> = (0..count)
                .map(|i| {
                    let e = (e_lo + i as f64 * step).min(e_hi);
                    stieltjes_sc(Complex64::new(e, eta)).expect("eta > 0")
                })
                .collect();
            spectra
                .par_iter()
                .map(|s| {
                    let mut sup: f64 = 0.0;
                    for (i, msc) in sc.iter().enumerate() {
                        let e = (e_lo + i as f64 * step).min(e_hi);
                        let z = Complex64::new(e, eta);
                        let mn = stieltjes_empirical(s, z).expect("eta > 0");
                        sup = sup.max((mn - msc).norm());
                    }
                    sup
                })
                .collect()
        })
        .collect();

    let mut q50 = Vec::with_capacity(eta_points);
    let mut q90 = Vec::with_capacity(eta_points);
    let mut max = Vec::with_capacity(eta_points);
    let mut per_eta = Vec::with_capacity(eta_points);
    for devs in &sup_dev {
        let mut sorted = devs.clone();
        sorted.sort_by(f64::total_cmp);
        q50.push(quantile_sorted(&sorted, 0.5));
        q90.push(quantile_sorted(&sorted, 0.9));
        max.push(*sorted.last().unwrap());
        per_eta.push(devs.iter().filter(|&&d| d >= eps0).count() as f64 / devs.len() as f64);
    }

    Ok(LocalLawReport {
        kappa,
        delta,
        samples: spectra.len(),
        n,
        etas,
        sup_dev,
        sup_dev_quantiles: Quantiles { q50, q90, max },
        exceed_rate: ExceedRate { eps0, per_eta },
    })
}

/// Deviation of bulk eigenvalues from their classical locations.
#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub n: usize,
    pub delta_idx: f64,
    /// 1-based index range checked (inclusive).
    pub first_index: usize,
    pub last_index: usize,
    pub per_sample_max: Vec<f64>,
    pub ensemble_max: f64,
}

/// Max over bulk indices `i in [delta_idx * n, (1 - delta_idx) * n]` of
/// `|lambda_i - t(i/n)|`, per sample and over the ensemble. Meaningful for
/// atoms with vanishing third moment.
pub fn localization_check(
    spectra: &[Spectrum],
    delta_idx: f64,
) -> Result<LocalizationReport, SpectralError> {
    if spectra.is_empty() {
        return Err(SpectralError::EmptySpectra);
    }
    let n = spectra[0].n();
    for s in spectra {
        if s.n() != n {
            return Err(SpectralError::MixedSizes(n, s.n()));
        }
    }
    if !(0.0..0.5).contains(&delta_idx) {
        return Err(SpectralError::BadLocalLawParams(format!(
            "delta_idx {delta_idx} outside [0, 0.5)"
        )));
    }
    let first = ((delta_idx * n as f64).ceil() as usize).max(1);
    let last = ((1.0 - delta_idx) * n as f64).floor() as usize;
    let locations: Vec<f64> = (first..=last)
        .map(|i| classical_location(i as f64 / n as f64).expect("quantile in range"))
        .collect();
    let per_sample_max: Vec<f64> = spectra
        .iter()
        .map(|s| {
            let v = s.values();
            locations
                .iter()
                .enumerate()
                .map(|(j, &t)| (v[first - 1 + j] - t).abs())
                .fold(0.0f64, f64::max)
        })
        .collect();
    let ensemble_max = per_sample_max.iter().copied().fold(0.0f64, f64::max);
    Ok(LocalizationReport {
        n,
        delta_idx,
        first_index: first,
        last_index: last,
        per_sample_max,
        ensemble_max,
    })
}
