//! Semicircle reference functions against independent quadrature oracles,
//! Herglotz/mass properties of the Stieltjes transforms, and the local-law
//! sweep on synthetic spectra.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use wigner_bulk::eigensolver::Spectrum;
use wigner_bulk::quad::adaptive_simpson;
use wigner_bulk::rng::StreamKey;
use wigner_bulk::spectral::{
    classical_location, local_law_check, rho_sc, semicircle_cdf, stieltjes_empirical,
    stieltjes_sc,
};

#[test]
fn density_integrates_to_one() {
    let mass = adaptive_simpson(rho_sc, -2.0, 2.0, 1e-12).unwrap();
    assert!((mass - 1.0).abs() <= 1e-10, "mass {mass}");
}

#[test]
fn cdf_matches_quadrature_of_density() {
    for &x in &[-1.7, -1.0, -0.3, 0.4, 1.0, 1.6] {
        let want = adaptive_simpson(rho_sc, -2.0, x, 1e-13).unwrap();
        assert!(
            (semicircle_cdf(x) - want).abs() <= 1e-12,
            "cdf({x}) = {} vs quadrature {want}",
            semicircle_cdf(x)
        );
    }
}

#[test]
fn cdf_derivative_is_the_density() {
    let h = 1e-5;
    for i in 0..39 {
        let x = -1.9 + i as f64 * 0.1;
        let deriv = (semicircle_cdf(x + h) - semicircle_cdf(x - h)) / (2.0 * h);
        assert!((deriv - rho_sc(x)).abs() <= 1e-6, "at {x}");
    }
}

#[test]
fn classical_location_against_bisection_on_quadrature_cdf() {
    // independent oracle: bisect the quadrature CDF, no closed forms involved
    let a = 0.25;
    let (mut lo, mut hi) = (-2.0f64, 2.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let f = adaptive_simpson(rho_sc, -2.0, mid, 1e-13).unwrap();
        if f < a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let got = classical_location(a).unwrap();
    assert!((got - oracle).abs() <= 1e-10, "{got} vs oracle {oracle}");
}

#[test]
fn stieltjes_sc_matches_defining_integral() {
    // substitute s = 2 sin(theta) to remove the sqrt endpoint singularity:
    // m_sc(z) = (1/2pi) int (2 cos t)^2 / (2 sin t - z) dt over [-pi/2, pi/2]
    for &z in &[
        Complex64::new(0.0, 1.0),
        Complex64::new(0.7, 0.3),
        Complex64::new(-1.2, 2.0),
    ] {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let re = adaptive_simpson(
            |t| {
                let c = 2.0 * t.cos();
                let d = Complex64::new(2.0 * t.sin(), 0.0) - z;
                (c * c * d.inv().re) / (2.0 * std::f64::consts::PI)
            },
            -half_pi,
            half_pi,
            1e-12,
        )
        .unwrap();
        let im = adaptive_simpson(
            |t| {
                let c = 2.0 * t.cos();
                let d = Complex64::new(2.0 * t.sin(), 0.0) - z;
                (c * c * d.inv().im) / (2.0 * std::f64::consts::PI)
            },
            -half_pi,
            half_pi,
            1e-12,
        )
        .unwrap();
        let got = stieltjes_sc(z).unwrap();
        assert!(
            (got - Complex64::new(re, im)).norm() <= 1e-10,
            "z = {z}: {got} vs integral {re}+{im}i"
        );
    }
}

#[test]
fn stieltjes_empirical_matches_compensated_summation() {
    let mut rng = StreamKey::new(21, 3).stream(0);
    let values: Vec<f64> = (0..500).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect();
    let s = Spectrum::from_values(values.clone());
    let z = Complex64::new(0.0, 2.0);
    // Kahan-compensated oracle
    let mut sum = Complex64::new(0.0, 0.0);
    let mut c = Complex64::new(0.0, 0.0);
    for &l in s.values() {
        let term = (Complex64::new(l, 0.0) - z).inv();
        let y = term - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    let oracle = sum / 500.0;
    let got = stieltjes_empirical(&s, z).unwrap();
    assert!((got - oracle).norm() <= 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn empirical_transform_is_herglotz_and_mass_normalized(seed in any::<u64>()) {
        let mut rng = StreamKey::new(seed, 3).stream(0);
        let n = 1 + (seed % 64) as usize;
        let values: Vec<f64> = (0..n).map(|_| 6.0 * rng.random::<f64>() - 3.0).collect();
        let s = Spectrum::from_values(values);
        for &(re, im) in &[(0.0, 0.5), (1.0, 1e-3), (-2.5, 2.0)] {
            let m = stieltjes_empirical(&s, Complex64::new(re, im)).unwrap();
            prop_assert!(m.im > 0.0);
        }
        // m(iy) * iy -> -1 as y -> infinity: the real part converges at
        // O((max|lambda|/y)^2), the imaginary part at mean(lambda)/y
        let y = 1e6;
        let m = stieltjes_empirical(&s, Complex64::new(0.0, y)).unwrap();
        let prod = m * Complex64::new(0.0, y);
        let max_abs = s.values().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        prop_assert!((prod.re + 1.0).abs() <= 1e-9);
        prop_assert!(prod.im.abs() <= max_abs / y + 1e-12);
    }
}

/// Rejection-sample n points from the semicircle density.
fn iid_semicircle(n: usize, rng: &mut impl Rng) -> Spectrum {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = 4.0 * rng.random::<f64>() - 2.0;
        let y = rng.random::<f64>() / std::f64::consts::PI;
        if y <= rho_sc(x) {
            out.push(x);
        }
    }
    Spectrum::from_values(out)
}

#[test]
fn local_law_iid_semicircle_fixture_at_eta_one() {
    let mut rng = StreamKey::new(8, 3).stream(0);
    let s = iid_semicircle(2000, &mut rng);
    let rep = local_law_check(&[s], 0.5, 0.5, 0.1, 2, 0.25).unwrap();
    let sup_at_one = rep.sup_dev.last().unwrap()[0];
    assert!(sup_at_one <= 0.05, "sup dev {sup_at_one} at eta = 1");
}

#[test]
fn local_law_sup_decreases_in_eta_for_iid_semicircle() {
    let key = StreamKey::new(9, 3);
    let spectra: Vec<Spectrum> = (0..8)
        .map(|i| iid_semicircle(1000, &mut key.stream(i)))
        .collect();
    let rep = local_law_check(&spectra, 0.5, 0.3, 0.1, 5, 0.25).unwrap();
    let q50 = &rep.sup_dev_quantiles.q50;
    for w in q50.windows(2) {
        assert!(
            w[1] < w[0],
            "medians should decrease with eta: {:?}",
            q50
        );
    }
    assert_eq!(rep.etas.len(), 5);
    assert!(rep.etas.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn report_serializes_with_the_expected_shape() {
    let mut rng = StreamKey::new(10, 3).stream(0);
    let s = iid_semicircle(200, &mut rng);
    let rep = local_law_check(&[s], 0.5, 0.5, 0.1, 3, 0.25).unwrap();
    let json = serde_json::to_value(&rep).unwrap();
    for field in ["kappa", "delta", "etas", "sup_dev_quantiles", "exceed_rate"] {
        assert!(json.get(field).is_some(), "missing {field}");
    }
    assert!(json["sup_dev_quantiles"].get("q50").is_some());
    assert!(json["sup_dev_quantiles"].get("q90").is_some());
    assert!(json["sup_dev_quantiles"].get("max").is_some());
    assert!(json["exceed_rate"].get("eps0").is_some());
    assert!(json["exceed_rate"].get("per_eta").is_some());
}
