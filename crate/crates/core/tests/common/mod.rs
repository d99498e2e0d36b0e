//! Shared test oracles, independent of the library's solver paths.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use wigner_bulk::ensemble::WignerMatrix;

/// Random dense Hermitian matrix with entries of order one.
pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> WignerMatrix {
    let mut draws: Vec<Complex64> = Vec::new();
    for l in 0..n {
        for k in l..n {
            let re = 2.0 * rng.random::<f64>() - 1.0;
            let im = if l == k {
                0.0
            } else {
                2.0 * rng.random::<f64>() - 1.0
            };
            draws.push(Complex64::new(re, im));
        }
    }
    let mut it = draws.into_iter();
    WignerMatrix::from_upper(n, |_, _| it.next().unwrap())
}

// --- characteristic-polynomial oracle -------------------------------------
//
// Eigenvalues of a small Hermitian matrix, computed without any matrix
// factorization: the characteristic polynomial det(H - x I) is expanded by
// cofactors over polynomial entries, and its (all-real) roots are isolated
// by recursive derivative interlacing plus bisection.

type Poly = Vec<Complex64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_axpy(acc: &mut Poly, scale: Complex64, p: &Poly) {
    if acc.len() < p.len() {
        acc.resize(p.len(), Complex64::new(0.0, 0.0));
    }
    for (a, &x) in acc.iter_mut().zip(p) {
        *a += scale * x;
    }
}

/// Determinant of a matrix of polynomials by Laplace expansion along the
/// first remaining row. Exponential cost; fine for n <= 6.
fn det_poly(entries: &[Vec<Poly>], cols: &[usize]) -> Poly {
    let row = entries.len() - cols.len();
    if cols.len() == 1 {
        return entries[row][cols[0]].clone();
    }
    let mut acc: Poly = vec![Complex64::new(0.0, 0.0)];
    for (pos, &c) in cols.iter().enumerate() {
        let minor_cols: Vec<usize> = cols
            .iter()
            .copied()
            .filter(|&cc| cc != c)
            .collect();
        let minor = det_poly(entries, &minor_cols);
        let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
        let term = poly_mul(&entries[row][c], &minor);
        poly_axpy(&mut acc, Complex64::new(sign, 0.0), &term);
    }
    acc
}

/// Coefficients (ascending, real) of det(H - x I).
pub fn char_poly(h: &WignerMatrix) -> Vec<f64> {
    let n = h.n();
    let entries: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        vec![h.entry(i, j), Complex64::new(-1.0, 0.0)]
                    } else {
                        vec![h.entry(i, j)]
                    }
                })
                .collect()
        })
        .collect();
    let cols: Vec<usize> = (0..n).collect();
    let poly = det_poly(&entries, &cols);
    // Hermitian => real coefficients; the imaginary parts are rounding dust
    poly.iter().map(|c| c.re).collect()
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| i as f64 * c)
        .collect()
}

fn bisect_root(coeffs: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let flo = poly_eval(coeffs, lo);
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = poly_eval(coeffs, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    // Newton polish
    let deriv = poly_derivative(coeffs);
    for _ in 0..4 {
        let d = poly_eval(&deriv, x);
        if d == 0.0 {
            break;
        }
        x -= poly_eval(coeffs, x) / d;
    }
    x
}

/// All real roots of a polynomial known to have only real roots (as the
/// characteristic polynomial of a Hermitian matrix does). Roots of the
/// derivative interlace the roots, so each is bracketed by consecutive
/// critical points.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    if deg == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }
    // Cauchy bound on root magnitude
    let bound = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max);
    let crit = real_roots(&poly_derivative(coeffs));
    let mut cuts = Vec::with_capacity(crit.len() + 2);
    cuts.push(-bound);
    cuts.extend(crit.iter().copied().filter(|c| c.abs() < bound));
    cuts.push(bound);
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (poly_eval(coeffs, a), poly_eval(coeffs, b));
        if fa == 0.0 {
            roots.push(a);
        }
        if (fa > 0.0) != (fb > 0.0) && fa != 0.0 && fb != 0.0 {
            roots.push(bisect_root(coeffs, a, b));
        }
    }
    // a critical point can itself be a (double) root
    for &c in &crit {
        if poly_eval(coeffs, c).abs() < 1e-13 && roots.iter().all(|&r| (r - c).abs() > 1e-9) {
            roots.push(c);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    roots
}

/// Eigenvalues of a small Hermitian matrix via the characteristic polynomial.
pub fn charpoly_eigenvalues(h: &WignerMatrix) -> Vec<f64> {
    real_roots(&char_poly(h))
}
