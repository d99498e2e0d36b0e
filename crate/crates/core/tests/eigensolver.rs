//! Eigensolver verification against an independent characteristic-polynomial
//! oracle, plus the similarity and symmetry invariants.

mod common;

use common::{charpoly_eigenvalues, random_hermitian};
use num_complex::Complex64;
use proptest::prelude::*;
use wigner_bulk::eigensolver::{eigenvalues, tridiagonalize};
use wigner_bulk::ensemble::{gue_atoms, sample_wigner, WignerMatrix};
use wigner_bulk::rng::StreamKey;

#[test]
fn matches_charpoly_oracle_on_small_matrices() {
    let key = StreamKey::new(123, 6);
    let mut worst = 0.0f64;
    for idx in 0..100u64 {
        let mut rng = key.stream(idx);
        let n = 1 + (idx % 6) as usize;
        let h = random_hermitian(n, &mut rng);
        let got = eigenvalues(&h).unwrap();
        let want = charpoly_eigenvalues(&h);
        assert_eq!(want.len(), n, "oracle lost a root on sample {idx}");
        for (g, w) in got.values().iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    assert!(worst <= 1e-10, "worst oracle deviation {worst}");
}

#[test]
fn tridiagonal_similarity_at_n6_matches_oracle() {
    let key = StreamKey::new(77, 6);
    for idx in 0..10u64 {
        let mut rng = key.stream(idx);
        let h = random_hermitian(6, &mut rng);
        let (mut d, e) = tridiagonalize(&h);
        wigner_bulk::eigensolver::tridiagonal_eigenvalues(&mut d, &e).unwrap();
        d.sort_by(f64::total_cmp);
        let want = charpoly_eigenvalues(&h);
        for (g, w) in d.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-10, "{g} vs {w}");
        }
    }
}

#[test]
fn trace_and_frobenius_preserved_under_tridiagonalization() {
    let mut rng = StreamKey::new(5, 6).stream(0);
    let h = random_hermitian(120, &mut rng);
    let (d, e) = tridiagonalize(&h);
    let trace_t: f64 = d.iter().sum();
    let frob_t: f64 =
        d.iter().map(|x| x * x).sum::<f64>() + 2.0 * e.iter().map(|x| x * x).sum::<f64>();
    let frob_h = h.frobenius_norm_sq();
    assert!((trace_t - h.trace()).abs() <= 1e-12 * frob_h.sqrt() * 120.0);
    assert!((frob_t - frob_h).abs() <= 1e-11 * frob_h);
}

#[test]
fn spectrum_similarity_invariants_at_n500() {
    let (off, diag) = gue_atoms();
    let mut rng = StreamKey::new(5, 6).stream(1);
    let n = 500;
    let h = sample_wigner(n, &off, &diag, &mut rng).unwrap();
    let s = eigenvalues(&h).unwrap();
    let frob = h.frobenius_norm_sq();
    assert!((s.sum() - h.trace()).abs() <= n as f64 * 1e-12 * frob.sqrt());
    assert!((s.sum_sq() - frob).abs() <= n as f64 * 1e-11 * frob);
}

#[test]
fn permutation_and_phase_conjugation_leave_spectrum_unchanged() {
    let n = 40;
    let key = StreamKey::new(9, 6);
    let mut rng = key.stream(0);
    let h = random_hermitian(n, &mut rng);
    let base = eigenvalues(&h).unwrap();

    // random permutation
    use rand::Rng;
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let hp = WignerMatrix::from_upper(n, |l, k| {
        let (pl, pk) = (perm[l], perm[k]);
        if pl <= pk {
            h.entry(pl, pk)
        } else {
            h.entry(pk, pl).conj()
        }
    });
    let sp = eigenvalues(&hp).unwrap();
    for (a, b) in base.values().iter().zip(sp.values()) {
        assert!((a - b).abs() <= 1e-10);
    }

    // random diagonal unitary: D H D^*
    let phases: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0, 2.7 * i as f64 + 0.3))
        .collect();
    let hu = WignerMatrix::from_upper(n, |l, k| phases[l] * h.entry(l, k) * phases[k].conj());
    let su = eigenvalues(&hu).unwrap();
    for (a, b) in base.values().iter().zip(su.values()) {
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn cauchy_interlacing_of_leading_principal_submatrix() {
    let key = StreamKey::new(31, 6);
    for idx in 0..5u64 {
        let mut rng = key.stream(idx);
        let n = 60;
        let h = random_hermitian(n, &mut rng);
        let sub = WignerMatrix::from_upper(n - 1, |l, k| h.entry(l, k));
        let lam = eigenvalues(&h).unwrap();
        let mu = eigenvalues(&sub).unwrap();
        let tol = 1e-11;
        for i in 0..n - 1 {
            assert!(
                lam.values()[i] <= mu.values()[i] + tol
                    && mu.values()[i] <= lam.values()[i + 1] + tol,
                "interlacing violated at {i}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectra_are_sorted_and_similarity_invariant(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = StreamKey::new(seed, 6).stream(0);
        let h = random_hermitian(n, &mut rng);
        let s = eigenvalues(&h).unwrap();
        prop_assert_eq!(s.n(), n);
        for w in s.values().windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        let frob = h.frobenius_norm_sq();
        prop_assert!((s.sum() - h.trace()).abs() <= 1e-10 * (1.0 + frob.sqrt()));
        prop_assert!((s.sum_sq() - frob).abs() <= 1e-10 * (1.0 + frob));
    }
}
