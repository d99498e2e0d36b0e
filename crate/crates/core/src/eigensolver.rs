//! Dense Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix, then implicit QL iteration with Wilkinson shifts.
//!
//! Only eigenvalues are computed; nothing downstream needs eigenvectors and
//! skipping them halves the cost. The reduction keeps separate re/im planes
//! so the rank-2 update and the matrix-vector product, which carry all the
//! O(n^3) work, stay on contiguous f64 streams.

use thiserror::Error;

use crate::ensemble::WignerMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum EigenError {
    #[error("QL iteration failed to converge for eigenvalue index {index} after {sweeps} sweeps")]
    NotConverged { index: usize, sweeps: usize },
}

/// Deflation threshold factor for the off-diagonal entries.
const DEFLATE: f64 = 1e-14;
/// Iteration cap per eigenvalue.
const MAX_SWEEPS: usize = 30;

/// Sorted eigenvalues of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Wrap a set of eigenvalues; sorts ascending.
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Spectrum { values }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Ascending eigenvalues.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }
}

/// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
/// form, returning `(diag, offdiag)` with `offdiag` nonnegative (unimodular
/// phase rotations are folded into the similarity transform).
pub fn tridiagonalize(h: &WignerMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = h.n();
    let mut are = vec![0.0f64; n * n];
    let mut aim = vec![0.0f64; n * n];
    for (i, z) in h.data().iter().enumerate() {
        are[i] = z.re;
        aim[i] = z.im;
    }
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n.saturating_sub(1)];

    let mut vre = vec![0.0f64; n];
    let mut vim = vec![0.0f64; n];
    let mut pre = vec![0.0f64; n];
    let mut pim = vec![0.0f64; n];
    let mut wre = vec![0.0f64; n];
    let mut wim = vec![0.0f64; n];

    for k in 0..n.saturating_sub(2) {
        d[k] = are[k * n + k];
        let m = n - k - 1; // active column length below the diagonal
        // norm of the column under the diagonal
        let mut xnorm_sq = 0.0;
        for i in 0..m {
            let idx = (k + 1 + i) * n + k;
            xnorm_sq += are[idx] * are[idx] + aim[idx] * aim[idx];
        }
        let xnorm = xnorm_sq.sqrt();
        if xnorm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        e[k] = xnorm;

        // v = x + phase * |x| * e1, with phase = x0/|x0| (1 if x0 = 0).
        // This is the cancellation-free sign choice.
        let x0re = are[(k + 1) * n + k];
        let x0im = aim[(k + 1) * n + k];
        let x0abs = (x0re * x0re + x0im * x0im).sqrt();
        let (phre, phim) = if x0abs == 0.0 {
            (1.0, 0.0)
        } else {
            (x0re / x0abs, x0im / x0abs)
        };
        for i in 0..m {
            let idx = (k + 1 + i) * n + k;
            vre[i] = are[idx];
            vim[i] = aim[idx];
        }
        vre[0] += phre * xnorm;
        vim[0] += phim * xnorm;
        let sigma: f64 = (0..m).map(|i| vre[i] * vre[i] + vim[i] * vim[i]).sum();
        if sigma == 0.0 {
            continue;
        }

        // p = (2/sigma) * A22 * v
        let base = (k + 1) * n + (k + 1);
        let two_over_sigma = 2.0 / sigma;
        for i in 0..m {
            let row = base + i * n;
            let (ar, ai) = (&are[row..row + m], &aim[row..row + m]);
            let mut sr = 0.0;
            let mut si = 0.0;
            for j in 0..m {
                sr += ar[j] * vre[j] - ai[j] * vim[j];
                si += ar[j] * vim[j] + ai[j] * vre[j];
            }
            pre[i] = two_over_sigma * sr;
            pim[i] = two_over_sigma * si;
        }

        // w = p - (v^H p / sigma) v, so that A' = A - v w^H - w v^H
        let mut kre = 0.0;
        let mut kim = 0.0;
        for i in 0..m {
            kre += vre[i] * pre[i] + vim[i] * pim[i];
            kim += vre[i] * pim[i] - vim[i] * pre[i];
        }
        kre /= sigma;
        kim /= sigma;
        for i in 0..m {
            wre[i] = pre[i] - (kre * vre[i] - kim * vim[i]);
            wim[i] = pim[i] - (kre * vim[i] + kim * vre[i]);
        }

        // rank-2 update of the trailing block
        for i in 0..m {
            let (vir, vii) = (vre[i], vim[i]);
            let (wir, wii) = (wre[i], wim[i]);
            let row = base + i * n;
            let ar = &mut are[row..row + m];
            let ai = &mut aim[row..row + m];
            for j in 0..m {
                let re = vir * wre[j] + vii * wim[j] + wir * vre[j] + wii * vim[j];
                let im = vii * wre[j] - vir * wim[j] + wii * vre[j] - wir * vim[j];
                ar[j] -= re;
                ai[j] -= im;
            }
        }
    }

    if n >= 2 {
        d[n - 2] = are[(n - 2) * n + (n - 2)];
        let idx = (n - 1) * n + (n - 2);
        e[n - 2] = (are[idx] * are[idx] + aim[idx] * aim[idx]).sqrt();
    }
    d[n - 1] = are[(n - 1) * n + (n - 1)];

    (d, e)
}

/// Eigenvalues of the real symmetric tridiagonal matrix `(diag, offdiag)` by
/// implicit QL with Wilkinson shifts. On success `diag` holds the (unsorted)
/// eigenvalues.
pub fn tridiagonal_eigenvalues(diag: &mut [f64], offdiag: &[f64]) -> Result<(), EigenError> {
    let n = diag.len();
    assert_eq!(offdiag.len(), n.saturating_sub(1));
    if n <= 1 {
        return Ok(());
    }
    // working copy with one scratch slot at the end
    let mut e = vec![0.0f64; n];
    e[..n - 1].copy_from_slice(offdiag);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if e[m].abs() <= DEFLATE * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(EigenError::NotConverged {
                    index: l,
                    sweeps: MAX_SWEEPS,
                });
            }
            // Wilkinson shift from the leading 2x2
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut early = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                f = (diag[i] - g) * s + 2.0 * c * b;
                p = s * f;
                diag[i + 1] = g + p;
                g = c * f - b;
            }
            if early {
                continue;
            }
            diag[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenvalues of a Hermitian matrix, sorted ascending.
pub fn eigenvalues(h: &WignerMatrix) -> Result<Spectrum, EigenError> {
    let (mut d, e) = tridiagonalize(h);
    tridiagonal_eigenvalues(&mut d, &e)?;
    Ok(Spectrum::from_values(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn diagonal_matrix_passes_through() {
        let h = WignerMatrix::from_upper(4, |l, k| {
            if l == k {
                Complex64::new(l as f64 + 1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let (d, e) = tridiagonalize(&h);
        assert_eq!(d, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_by_two_single_phase_rotation() {
        let c = Complex64::new(0.3, -0.4);
        let h = WignerMatrix::from_upper(2, |l, k| {
            if l == k {
                Complex64::new(if l == 0 { 1.5 } else { -0.5 }, 0.0)
            } else {
                c
            }
        });
        let (d, e) = tridiagonalize(&h);
        assert_eq!(d, vec![1.5, -0.5]);
        assert_abs_diff_eq!(e[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn identity_eigenvalues() {
        let h = WignerMatrix::from_upper(5, |l, k| {
            Complex64::new(if l == k { 1.0 } else { 0.0 }, 0.0)
        });
        let s = eigenvalues(&h).unwrap();
        for &v in s.values() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn off_diagonal_pair() {
        // a = b = 0, |c| = 1/sqrt(2) -> eigenvalues -+ 1/sqrt(2)
        let c = Complex64::new(0.5, 0.5); // |c| = 1/sqrt(2)
        let h = WignerMatrix::from_upper(2, |l, k| {
            if l == k {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        });
        let s = eigenvalues(&h).unwrap();
        let r = 0.5f64.sqrt();
        assert_abs_diff_eq!(s.values()[0], -r, epsilon = 1e-14);
        assert_abs_diff_eq!(s.values()[1], r, epsilon = 1e-14);
    }

    #[test]
    fn n1_matrix() {
        let h = WignerMatrix::from_upper(1, |_, _| Complex64::new(2.5, 0.0));
        let s = eigenvalues(&h).unwrap();
        assert_eq!(s.values(), &[2.5]);
    }

    #[test]
    fn tridiagonal_known_2x2() {
        let mut d = vec![0.0, 0.0];
        tridiagonal_eigenvalues(&mut d, &[1.0]).unwrap();
        d.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(d[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn spectrum_sorts() {
        let s = Spectrum::from_values(vec![2.0, -1.0, 0.5]);
        assert_eq!(s.values(), &[-1.0, 0.5, 2.0]);
    }
}
