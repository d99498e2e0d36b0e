//! Quadrature building blocks: Gauss–Legendre rules and adaptive Simpson.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge to tolerance {tol} (best error estimate {best})")]
    NotConverged { tol: f64, best: f64 },
    #[error("invalid quadrature order {0}; need at least 1 node")]
    BadOrder(usize),
}

/// A Gauss–Legendre rule on `[-1, 1]`.
///
/// Nodes are roots of the Legendre polynomial, found by Newton iteration from
/// the Chebyshev-like initial guess; accuracy is at the rounding level for the
/// orders used here (up to a few hundred nodes).
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Result<Self, QuadError> {
        if m == 0 {
            return Err(QuadError::BadOrder(m));
        }
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            // initial guess for the i-th root in descending order
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // evaluate P_m and P'_m by the three-term recurrence
                let mut p0 = 1.0;
                let mut p1 = x;
                for j in 2..=m {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = mf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Adaptive Simpson integration of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadError> {
    adaptive_simpson_min_depth(f, a, b, tol, 0)
}

/// Adaptive Simpson with `min_depth` forced bisection levels before the error
/// estimate may terminate a panel. Needed when the mass of the integrand is
/// concentrated in a region the first few sample points miss entirely (e.g.
/// a density integrated out to a far truncation cap), where the plain
/// estimate would report false convergence.
pub fn adaptive_simpson_min_depth<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    min_depth: u32,
) -> Result<f64, QuadError> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: FnMut(f64) -> f64>(
        f: &mut F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        forced: u32,
        worst: &mut f64,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = (left + right - whole) / 15.0;
        if (err.abs() <= tol && forced == 0) || depth == 0 {
            if depth == 0 {
                *worst = worst.max(err.abs());
            }
            return left + right + err;
        }
        let forced = forced.saturating_sub(1);
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, forced, worst)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, forced, worst)
    }

    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    let mut worst = 0.0;
    let value = recurse(
        &mut f, a, b, fa, fm, fb, whole, tol, 48, min_depth, &mut worst,
    );
    if worst > tol {
        return Err(QuadError::NotConverged { tol, best: worst });
    }
    Ok(value)
}

/// Adaptive tensor-product integration over a `dim`-dimensional box by
/// iterated 1-D adaptive Simpson.
pub fn adaptive_box<F>(f: &F, lo: &[f64], hi: &[f64], tol: f64) -> Result<f64, QuadError>
where
    F: Fn(&[f64]) -> f64,
{
    assert_eq!(lo.len(), hi.len());
    fn go<F: Fn(&[f64]) -> f64>(
        f: &F,
        lo: &[f64],
        hi: &[f64],
        point: &mut Vec<f64>,
        tol: f64,
    ) -> Result<f64, QuadError> {
        let d = point.len();
        if d == lo.len() {
            return Ok(f(point));
        }
        // Inner tolerance shrinks with remaining volume so the total error
        // stays within the caller's budget.
        let width = hi[d] - lo[d];
        let inner_tol = tol / (2.0 * width.max(1.0));
        let mut err: Option<QuadError> = None;
        let value = adaptive_simpson(
            |x| {
                point.push(x);
                let v = go(f, lo, hi, point, inner_tol);
                point.pop();
                match v {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            lo[d],
            hi[d],
            tol,
        );
        if let Some(e) = err {
            return Err(e);
        }
        value
    }
    go(f, lo, hi, &mut Vec::with_capacity(lo.len()), tol)
}
