//! Atom distributions and Wigner Hermitian matrix sampling.
//!
//! A Wigner matrix of size `n` has upper-triangular entries
//! `h_{lk} = n^{-1/2} (x_{lk} + i y_{lk})` with `x, y` i.i.d. mean-zero
//! variance-1/2 atoms, and real diagonal entries `n^{-1/2} x_{ll}` with
//! variance-1 atoms. All shipped atom kinds have subexponential tails by
//! construction. The module also provides the two ingredients of the
//! moment-comparison route to universality: truncation of an atom to a
//! polylogarithmic bound (with exact re-standardization) and
//! Ornstein–Uhlenbeck interpolation of a sampled matrix toward GUE.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnsembleError {
    #[error("three-point support (a={a}, b={b}) cannot carry variance {variance}; need a, b > 0 and a*b >= variance")]
    BadThreePoint { a: f64, b: f64, variance: f64 },
    #[error("truncated atoms are built with truncate_atom, not make_atom")]
    TruncatedKindInMakeAtom,
    #[error("truncation bound {bound} leaves a degenerate (zero-variance) conditional law")]
    DegenerateTruncation { bound: f64 },
    #[error("re-truncating a truncated atom to a smaller bound is not supported")]
    NestedTruncation,
    #[error("truncation requires n >= 2, got {0}")]
    BadTruncationSize(usize),
    #[error("matrix size must be at least 1")]
    EmptyMatrix,
    #[error("atom role mismatch: expected {expected:?}, got {got:?}")]
    RoleMismatch { expected: Role, got: Role },
    #[error("Ornstein-Uhlenbeck time must be nonnegative and finite, got {0}")]
    BadTime(f64),
}

/// Position of an atom in the matrix, which fixes its variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    /// Real or imaginary part of an off-diagonal entry; variance 1/2.
    OffDiagonal,
    /// Diagonal entry; variance 1.
    Diagonal,
}

impl Role {
    pub fn variance(self) -> f64 {
        match self {
            Role::OffDiagonal => 0.5,
            Role::Diagonal => 1.0,
        }
    }
}

/// First four moments of a scalar law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

/// The scalar law of one matrix-entry component.
#[derive(Debug, Clone, PartialEq)]
pub enum AtomKind {
    Gaussian,
    Bernoulli,
    Uniform,
    Laplace,
    /// Support `{-a, 0, b}` with probabilities solving mean zero and the
    /// role's variance; permits a nonzero third moment.
    ThreePoint { a: f64, b: f64 },
    /// `inner` conditioned on `|x| <= bound`, then affinely re-standardized:
    /// output = `(x - center) * scale`.
    Truncated {
        inner: Box<AtomKind>,
        bound: f64,
        center: f64,
        scale: f64,
    },
}

/// A validated atom: kind, role, and analytically derived moments.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomDistribution {
    kind: AtomKind,
    role: Role,
    moments: Moments,
}

impl AtomDistribution {
    pub fn kind(&self) -> &AtomKind {
        &self.kind
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn moments(&self) -> Moments {
        self.moments
    }

    /// Smallest `B` with `|x| <= B` almost surely; infinite for unbounded kinds.
    pub fn support_bound(&self) -> f64 {
        kind_support_bound(&self.kind, self.role.variance())
    }

    /// Draw one value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_kind(&self.kind, self.role.variance(), rng)
    }
}

fn kind_support_bound(kind: &AtomKind, sigma2: f64) -> f64 {
    match kind {
        AtomKind::Gaussian | AtomKind::Laplace => f64::INFINITY,
        AtomKind::Bernoulli => sigma2.sqrt(),
        AtomKind::Uniform => (3.0 * sigma2).sqrt(),
        AtomKind::ThreePoint { a, b } => a.max(*b),
        AtomKind::Truncated {
            bound,
            center,
            scale,
            ..
        } => (bound + center.abs()) * scale,
    }
}

fn sample_kind<R: Rng + ?Sized>(kind: &AtomKind, sigma2: f64, rng: &mut R) -> f64 {
    match kind {
        AtomKind::Gaussian => {
            let z: f64 = StandardNormal.sample(rng);
            z * sigma2.sqrt()
        }
        AtomKind::Bernoulli => {
            let v = sigma2.sqrt();
            if rng.random::<bool>() {
                v
            } else {
                -v
            }
        }
        AtomKind::Uniform => {
            let a = (3.0 * sigma2).sqrt();
            a * (2.0 * rng.random::<f64>() - 1.0)
        }
        AtomKind::Laplace => {
            let b = (0.5 * sigma2).sqrt();
            loop {
                let u: f64 = rng.random::<f64>() - 0.5;
                let t = 1.0 - 2.0 * u.abs();
                if t > 0.0 {
                    return -b * u.signum() * t.ln();
                }
            }
        }
        AtomKind::ThreePoint { a, b } => {
            let (pa, pb) = three_point_probs(*a, *b, sigma2);
            let u: f64 = rng.random();
            if u < pa {
                -a
            } else if u < pa + pb {
                *b
            } else {
                0.0
            }
        }
        AtomKind::Truncated {
            inner,
            bound,
            center,
            scale,
        } => loop {
            // The raw draw uses the same role variance as the wrapper.
            let x = sample_kind(inner, sigma2, rng);
            if x.abs() <= *bound {
                return (x - center) * scale;
            }
        },
    }
}

fn three_point_probs(a: f64, b: f64, sigma2: f64) -> (f64, f64) {
    (sigma2 / (a * (a + b)), sigma2 / (b * (a + b)))
}

/// Build an atom of the given kind, normalized to the role's variance, with
/// moments filled in analytically.
pub fn make_atom(kind: AtomKind, role: Role) -> Result<AtomDistribution, EnsembleError> {
    let s2 = role.variance();
    let moments = match &kind {
        AtomKind::Gaussian => Moments {
            m1: 0.0,
            m2: s2,
            m3: 0.0,
            m4: 3.0 * s2 * s2,
        },
        AtomKind::Bernoulli => Moments {
            m1: 0.0,
            m2: s2,
            m3: 0.0,
            m4: s2 * s2,
        },
        AtomKind::Uniform => Moments {
            m1: 0.0,
            m2: s2,
            m3: 0.0,
            m4: 9.0 * s2 * s2 / 5.0,
        },
        AtomKind::Laplace => Moments {
            m1: 0.0,
            m2: s2,
            m3: 0.0,
            m4: 6.0 * s2 * s2,
        },
        AtomKind::ThreePoint { a, b } => {
            if !(a.is_finite() && b.is_finite()) || *a <= 0.0 || *b <= 0.0 || a * b < s2 {
                return Err(EnsembleError::BadThreePoint {
                    a: *a,
                    b: *b,
                    variance: s2,
                });
            }
            Moments {
                m1: 0.0,
                m2: s2,
                m3: s2 * (b - a),
                m4: s2 * (a * a - a * b + b * b),
            }
        }
        AtomKind::Truncated { .. } => return Err(EnsembleError::TruncatedKindInMakeAtom),
    };
    Ok(AtomDistribution {
        kind,
        role,
        moments,
    })
}

/// The standard GUE atom pair: N(0,1/2) off-diagonal components, N(0,1) diagonal.
pub fn gue_atoms() -> (AtomDistribution, AtomDistribution) {
    let off = make_atom(AtomKind::Gaussian, Role::OffDiagonal).expect("gaussian atom");
    let diag = make_atom(AtomKind::Gaussian, Role::Diagonal).expect("gaussian atom");
    (off, diag)
}

/// Truncate `dist` to the bound `(log n)^3` and re-standardize exactly.
pub fn truncate_atom(
    dist: &AtomDistribution,
    n: usize,
) -> Result<AtomDistribution, EnsembleError> {
    if n < 2 {
        return Err(EnsembleError::BadTruncationSize(n));
    }
    let bound = (n as f64).ln().powi(3);
    truncate_atom_at(dist, bound)
}

/// Truncate `dist` to an explicit bound. Bounded atoms whose support already
/// fits pass through unchanged; otherwise the conditional law on
/// `[-bound, bound]` is re-centered and re-scaled so the output has mean zero
/// and the role's variance exactly.
pub fn truncate_atom_at(
    dist: &AtomDistribution,
    bound: f64,
) -> Result<AtomDistribution, EnsembleError> {
    if dist.support_bound() <= bound {
        return Ok(dist.clone());
    }
    if matches!(dist.kind, AtomKind::Truncated { .. }) {
        return Err(EnsembleError::NestedTruncation);
    }
    let s2 = dist.role.variance();
    let (mean, c2, c3, c4) = conditional_central_moments(&dist.kind, s2, bound)?;
    if c2 <= 0.0 || !c2.is_finite() {
        return Err(EnsembleError::DegenerateTruncation { bound });
    }
    let scale = (s2 / c2).sqrt();
    let moments = Moments {
        m1: 0.0,
        m2: s2,
        m3: c3 * scale.powi(3),
        m4: c4 * scale.powi(4),
    };
    Ok(AtomDistribution {
        kind: AtomKind::Truncated {
            inner: Box::new(dist.kind.clone()),
            bound,
            center: mean,
            scale,
        },
        role: dist.role,
        moments,
    })
}

/// Central moments (mean, var, 3rd, 4th) of `kind` conditioned on `|x| <= bound`.
fn conditional_central_moments(
    kind: &AtomKind,
    sigma2: f64,
    bound: f64,
) -> Result<(f64, f64, f64, f64), EnsembleError> {
    match kind {
        AtomKind::Bernoulli | AtomKind::ThreePoint { .. } => {
            let points: Vec<(f64, f64)> = match kind {
                AtomKind::Bernoulli => {
                    let v = sigma2.sqrt();
                    vec![(-v, 0.5), (v, 0.5)]
                }
                AtomKind::ThreePoint { a, b } => {
                    let (pa, pb) = three_point_probs(*a, *b, sigma2);
                    vec![(-a, pa), (0.0, 1.0 - pa - pb), (*b, pb)]
                }
                _ => unreachable!(),
            };
            let kept: Vec<(f64, f64)> = points
                .into_iter()
                .filter(|&(x, _)| x.abs() <= bound)
                .collect();
            let mass: f64 = kept.iter().map(|&(_, p)| p).sum();
            if mass <= 0.0 {
                return Err(EnsembleError::DegenerateTruncation { bound });
            }
            let mean: f64 = kept.iter().map(|&(x, p)| x * p).sum::<f64>() / mass;
            let central = |k: i32| -> f64 {
                kept.iter()
                    .map(|&(x, p)| (x - mean).powi(k) * p)
                    .sum::<f64>()
                    / mass
            };
            Ok((mean, central(2), central(3), central(4)))
        }
        AtomKind::Gaussian | AtomKind::Laplace | AtomKind::Uniform => {
            // All continuous kinds are symmetric: mean and odd moments vanish,
            // and even moments follow from the density on [0, bound].
            let pdf: Box<dyn Fn(f64) -> f64> = match kind {
                AtomKind::Gaussian => {
                    let s = sigma2.sqrt();
                    Box::new(move |x: f64| {
                        (-x * x / (2.0 * sigma2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
                    })
                }
                AtomKind::Laplace => {
                    let b = (0.5 * sigma2).sqrt();
                    Box::new(move |x: f64| (-x.abs() / b).exp() / (2.0 * b))
                }
                AtomKind::Uniform => {
                    let a = (3.0 * sigma2).sqrt();
                    Box::new(move |x: f64| if x.abs() <= a { 0.5 / a } else { 0.0 })
                }
                _ => unreachable!(),
            };
            let cap = match kind {
                AtomKind::Gaussian => bound.min(40.0 * sigma2.sqrt()),
                AtomKind::Laplace => bound.min(500.0 * (0.5 * sigma2).sqrt()),
                AtomKind::Uniform => bound.min((3.0 * sigma2).sqrt()),
                _ => unreachable!(),
            };
            // forced bisection levels: the cap can sit far beyond the mass,
            // where a plain adaptive estimate would falsely converge to 0
            let moment = |k: i32| -> f64 {
                2.0 * crate::quad::adaptive_simpson_min_depth(
                    |x| x.powi(k) * pdf(x),
                    0.0,
                    cap,
                    1e-15,
                    12,
                )
                .expect("smooth bounded integrand")
            };
            let mass = moment(0);
            if mass <= 0.0 {
                return Err(EnsembleError::DegenerateTruncation { bound });
            }
            Ok((0.0, moment(2) / mass, 0.0, moment(4) / mass))
        }
        AtomKind::Truncated { .. } => Err(EnsembleError::NestedTruncation),
    }
}

/// An `n x n` Hermitian matrix with the `n^{-1/2}` Wigner normalization,
/// stored dense row-major with the lower triangle the exact conjugate of the
/// upper one.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl WignerMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, l: usize, k: usize) -> Complex64 {
        self.data[l * self.n + k]
    }

    /// Row-major dense storage.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Build a Hermitian matrix from its upper triangle. `f(l, k)` is called
    /// once per `l <= k`; the imaginary part of diagonal values is discarded.
    pub fn from_upper<F: FnMut(usize, usize) -> Complex64>(n: usize, mut f: F) -> Self {
        assert!(n >= 1, "matrix size must be at least 1");
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for l in 0..n {
            let d = f(l, l);
            data[l * n + l] = Complex64::new(d.re, 0.0);
            for k in l + 1..n {
                let v = f(l, k);
                data[l * n + k] = v;
                data[k * n + l] = v.conj();
            }
        }
        WignerMatrix { n, data }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|l| self.data[l * self.n + l].re).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Debug dump of the upper triangle as CSV rows `l,k,re,im`.
    pub fn write_upper_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "l,k,re,im")?;
        for l in 0..self.n {
            for k in l..self.n {
                let z = self.entry(l, k);
                writeln!(w, "{},{},{},{}", l, k, z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Sample one Wigner Hermitian matrix. Entries are filled in a fixed
/// row-major order, so a given generator state always yields the same matrix.
pub fn sample_wigner<R: Rng + ?Sized>(
    n: usize,
    off_diag: &AtomDistribution,
    diag: &AtomDistribution,
    rng: &mut R,
) -> Result<WignerMatrix, EnsembleError> {
    if n == 0 {
        return Err(EnsembleError::EmptyMatrix);
    }
    if off_diag.role != Role::OffDiagonal {
        return Err(EnsembleError::RoleMismatch {
            expected: Role::OffDiagonal,
            got: off_diag.role,
        });
    }
    if diag.role != Role::Diagonal {
        return Err(EnsembleError::RoleMismatch {
            expected: Role::Diagonal,
            got: diag.role,
        });
    }
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for l in 0..n {
        data[l * n + l] = Complex64::new(diag.sample(rng) * inv_sqrt_n, 0.0);
        for k in l + 1..n {
            let x = off_diag.sample(rng);
            let y = off_diag.sample(rng);
            let v = Complex64::new(x * inv_sqrt_n, y * inv_sqrt_n);
            data[l * n + k] = v;
            data[k * n + l] = v.conj();
        }
    }
    Ok(WignerMatrix { n, data })
}

/// Ornstein–Uhlenbeck interpolation toward GUE:
/// `H' = e^{-t/2} H + (1 - e^{-t})^{1/2} V` with `V` an independent GUE draw.
pub fn ou_interpolate<R: Rng + ?Sized>(
    h: &WignerMatrix,
    t: f64,
    rng: &mut R,
) -> Result<WignerMatrix, EnsembleError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(EnsembleError::BadTime(t));
    }
    if t == 0.0 {
        return Ok(h.clone());
    }
    let ca = (-t / 2.0).exp();
    let cb = (-(-t).exp_m1()).sqrt();
    let (off, diag) = gue_atoms();
    let v = sample_wigner(h.n, &off, &diag, rng)?;
    let data = h
        .data
        .iter()
        .zip(&v.data)
        .map(|(a, b)| ca * a + cb * b)
        .collect();
    Ok(WignerMatrix { n: h.n, data })
}

/// Moment comparison between an atom and its OU evolution
/// `x' = e^{-t/2} x + (1 - e^{-t})^{1/2} g`, with `g` Gaussian of the same
/// variance as `x`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentReport {
    pub source: Moments,
    pub target: Moments,
    pub t: f64,
    /// `target.m_j - source.m_j` for j = 1..4.
    pub delta: [f64; 4],
}

/// Moments of the OU-evolved atom, by binomial expansion against Gaussian
/// moments. Orders 0..2 are preserved identically (the defining property of
/// the interpolation); orders 3 and 4 drift by `O(t)`.
pub fn ou_atom_moments(source: Moments, t: f64) -> MomentReport {
    debug_assert_eq!(source.m1, 0.0, "atoms are mean zero");
    let a = (-t / 2.0).exp();
    let b2 = -(-t).exp_m1(); // 1 - e^{-t}, accurate for small t
    let a2 = a * a;
    let g2 = source.m2; // Gaussian component matches the atom variance
    let m3 = a2 * a * source.m3;
    let m4 = a2 * a2 * source.m4 + 6.0 * a2 * b2 * source.m2 * g2 + 3.0 * b2 * b2 * g2 * g2;
    let target = Moments {
        m1: 0.0,
        m2: source.m2, // exact: a^2 m2 + (1 - a^2) m2
        m3,
        m4,
    };
    MomentReport {
        source,
        target,
        t,
        delta: [
            0.0,
            0.0,
            target.m3 - source.m3,
            target.m4 - source.m4,
        ],
    }
}

/// Empirical moments of `dist` from `draws` samples, with standard errors.
#[derive(Debug, Clone, Copy)]
pub struct SampleMoments {
    pub m: [f64; 4],
    pub se: [f64; 4],
    pub draws: usize,
    pub max_abs: f64,
}

pub fn sample_moments<R: Rng + ?Sized>(
    dist: &AtomDistribution,
    draws: usize,
    rng: &mut R,
) -> SampleMoments {
    let mut p = [0.0f64; 8];
    let mut max_abs = 0.0f64;
    for _ in 0..draws {
        let x = dist.sample(rng);
        max_abs = max_abs.max(x.abs());
        let mut acc = 1.0;
        for s in p.iter_mut() {
            acc *= x;
            *s += acc;
        }
    }
    let nf = draws as f64;
    let mom = |k: usize| p[k - 1] / nf;
    let mut m = [0.0; 4];
    let mut se = [0.0; 4];
    for k in 1..=4 {
        m[k - 1] = mom(k);
        let var = (mom(2 * k) - m[k - 1] * m[k - 1]).max(0.0);
        se[k - 1] = (var / nf).sqrt();
    }
    SampleMoments {
        m,
        se,
        draws,
        max_abs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use approx::assert_abs_diff_eq;

    fn rng() -> rand_chacha::ChaCha8Rng {
        StreamKey::new(0xDEAD_BEEF, 1).stream(0)
    }

    #[test]
    fn bernoulli_off_diagonal_moments() {
        let atom = make_atom(AtomKind::Bernoulli, Role::OffDiagonal).unwrap();
        let m = atom.moments();
        assert_eq!(m.m1, 0.0);
        assert_eq!(m.m2, 0.5);
        assert_eq!(m.m3, 0.0);
        assert_eq!(m.m4, 0.25);
        let mut r = rng();
        for _ in 0..32 {
            let x = atom.sample(&mut r);
            assert_abs_diff_eq!(x.abs(), 0.5f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn gaussian_diagonal_moments() {
        let atom = make_atom(AtomKind::Gaussian, Role::Diagonal).unwrap();
        let m = atom.moments();
        assert_eq!((m.m1, m.m2, m.m3, m.m4), (0.0, 1.0, 0.0, 3.0));
    }

    #[test]
    fn uniform_off_diagonal_moments() {
        let atom = make_atom(AtomKind::Uniform, Role::OffDiagonal).unwrap();
        assert_abs_diff_eq!(atom.moments().m4, 9.0 / 20.0, epsilon = 1e-15);
        assert_abs_diff_eq!(atom.support_bound(), (1.5f64).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn three_point_moment_formulas() {
        let atom = make_atom(AtomKind::ThreePoint { a: 1.0, b: 2.0 }, Role::OffDiagonal).unwrap();
        let m = atom.moments();
        assert_abs_diff_eq!(m.m3, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.m4, 1.5, epsilon = 1e-15);
    }

    #[test]
    fn three_point_rejects_unreachable_variance() {
        // a*b = 0.25 < 0.5
        let err = make_atom(AtomKind::ThreePoint { a: 0.5, b: 0.5 }, Role::OffDiagonal);
        assert!(matches!(err, Err(EnsembleError::BadThreePoint { .. })));
    }

    #[test]
    fn truncation_is_identity_for_bounded_atoms() {
        let atom = make_atom(AtomKind::Bernoulli, Role::OffDiagonal).unwrap();
        let out = truncate_atom(&atom, 100).unwrap();
        assert_eq!(out, atom);
    }

    #[test]
    fn truncation_restandardizes_gaussian() {
        let atom = make_atom(AtomKind::Gaussian, Role::OffDiagonal).unwrap();
        let out = truncate_atom_at(&atom, 1.0).unwrap();
        assert_eq!(out.moments().m2, 0.5);
        assert_eq!(out.moments().m1, 0.0);
        // conditioning tightens the tails, so the fourth moment drops below
        // the Gaussian value 3 * (1/2)^2
        assert!(out.moments().m4 < 0.75);
        match out.kind() {
            AtomKind::Truncated { scale, center, .. } => {
                assert!(*scale > 1.0);
                assert_eq!(*center, 0.0);
            }
            other => panic!("expected truncated kind, got {other:?}"),
        }
    }

    #[test]
    fn truncation_degenerate_bound_is_rejected() {
        let atom = make_atom(AtomKind::Bernoulli, Role::OffDiagonal).unwrap();
        let err = truncate_atom_at(&atom, 0.5);
        assert!(matches!(err, Err(EnsembleError::DegenerateTruncation { .. })));
    }

    #[test]
    fn sample_wigner_n1_is_single_real_entry() {
        let (off, diag) = gue_atoms();
        let h = sample_wigner(1, &off, &diag, &mut rng()).unwrap();
        assert_eq!(h.n(), 1);
        assert_eq!(h.entry(0, 0).im, 0.0);
    }

    #[test]
    fn sample_wigner_rejects_n0_and_role_mismatch() {
        let (off, diag) = gue_atoms();
        assert_eq!(
            sample_wigner(0, &off, &diag, &mut rng()).unwrap_err(),
            EnsembleError::EmptyMatrix
        );
        assert!(matches!(
            sample_wigner(2, &diag, &diag, &mut rng()).unwrap_err(),
            EnsembleError::RoleMismatch { .. }
        ));
    }

    #[test]
    fn sample_wigner_is_hermitian_and_reproducible() {
        let (off, diag) = gue_atoms();
        let key = StreamKey::new(7, 7);
        let a = sample_wigner(2, &off, &diag, &mut key.stream(4)).unwrap();
        let b = sample_wigner(2, &off, &diag, &mut key.stream(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entry(1, 0), a.entry(0, 1).conj());
        assert_eq!(a.entry(0, 0).im, 0.0);
    }

    #[test]
    fn ou_interpolate_identity_and_errors() {
        let (off, diag) = gue_atoms();
        let h = sample_wigner(4, &off, &diag, &mut rng()).unwrap();
        let same = ou_interpolate(&h, 0.0, &mut rng()).unwrap();
        assert_eq!(same, h);
        assert!(matches!(
            ou_interpolate(&h, -0.5, &mut rng()),
            Err(EnsembleError::BadTime(_))
        ));
    }

    #[test]
    fn ou_coefficients() {
        // t large: the original matrix weight is negligible
        let t = 50.0f64;
        assert!((-t / 2.0).exp() < 1e-10);
        // t = n^{-0.99} at n = 1000
        let t = 1000.0f64.powf(-0.99);
        let ca = (-t / 2.0).exp();
        let cb = (-(-t).exp_m1()).sqrt();
        assert_abs_diff_eq!(t, 1.0715193e-3, epsilon = 1e-9);
        assert_abs_diff_eq!(ca * ca + cb * cb, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ou_moments_identity_at_t0() {
        let m = Moments {
            m1: 0.0,
            m2: 0.5,
            m3: 0.3,
            m4: 1.1,
        };
        let rep = ou_atom_moments(m, 0.0);
        assert_eq!(rep.delta, [0.0; 4]);
        assert_eq!(rep.target, m);
    }

    #[test]
    fn ou_moments_gaussian_fixed_point() {
        let m = Moments {
            m1: 0.0,
            m2: 0.5,
            m3: 0.0,
            m4: 0.75,
        };
        for &t in &[0.01, 0.5, 3.0] {
            let rep = ou_atom_moments(m, t);
            assert_abs_diff_eq!(rep.target.m4, 0.75, epsilon = 1e-15);
            assert_eq!(rep.target.m3, 0.0);
        }
    }

    #[test]
    fn ou_moments_third_order_decay() {
        let mu = 0.5;
        let m = Moments {
            m1: 0.0,
            m2: 0.5,
            m3: mu,
            m4: 1.5,
        };
        let t = 0.1;
        let rep = ou_atom_moments(m, t);
        assert_abs_diff_eq!(rep.target.m3, (-1.5 * t).exp() * mu, epsilon = 1e-15);
        assert!(rep.delta[2].abs() <= 1.5 * t * mu.abs());
    }
}
