mod common;

use approx::{assert_abs_diff_eq, assert_relative_eq};
use common::{am_oracle, bessel_integral_oracle, bessel_series_oracle, e_oracle, f_oracle};
use hmf_core::elliptic::{
    bessel_i, bessel_i_prime, complete_e, complete_k, incomplete_e, incomplete_f, jacobi,
    jacobi_am, nome, series, Modulus,
};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

fn modulus(k: f64) -> Modulus {
    Modulus::new(k).unwrap()
}

#[test]
fn complete_integrals_match_quadrature() {
    // Frozen values of the quadrature oracle at k = 0.5.
    const K_HALF: f64 = 1.685_750_354_812_596;
    const E_HALF: f64 = 1.467_462_209_339_427_2;
    assert_relative_eq!(f_oracle(FRAC_PI_2, 0.5), K_HALF, max_relative = 1e-14);
    assert_relative_eq!(e_oracle(FRAC_PI_2, 0.5), E_HALF, max_relative = 1e-14);
    assert_abs_diff_eq!(complete_k(modulus(0.5)).unwrap(), K_HALF, epsilon = 1e-12);
    assert_abs_diff_eq!(complete_e(modulus(0.5)).unwrap(), E_HALF, epsilon = 1e-12);
}

#[test]
fn k_has_logarithmic_singularity() {
    let mut k = 0.9;
    let mut prev: Option<f64> = None;
    while 1.0 - k > 1e-12 {
        let value = complete_k(modulus(k)).unwrap() + 0.5 * (1.0 - k).ln();
        assert!(value.abs() < 2.0, "K + log(1-k)/2 = {value} at k = {k}");
        if let Some(p) = prev {
            assert!((value - p).abs() < 0.1);
        }
        prev = Some(value);
        k = 1.0 - 0.5 * (1.0 - k);
    }
    // The limit is log 4 - log 2 / 2.
    let kc = 1e-9;
    let big_k = complete_k(Modulus::from_complement(kc).unwrap()).unwrap();
    assert_abs_diff_eq!(big_k - (4.0 / kc).ln(), 0.0, epsilon = 1e-15);
}

#[test]
fn e_limits() {
    assert_eq!(complete_e(modulus(1.0)).unwrap(), 1.0);
    let near = complete_e(Modulus::from_complement(1e-7).unwrap()).unwrap();
    assert_abs_diff_eq!(near, 1.0, epsilon = 1e-12);
}

#[test]
fn incomplete_integrals() {
    assert_abs_diff_eq!(incomplete_f(0.7, modulus(0.0)).unwrap(), 0.7, epsilon = 1e-15);
    assert_abs_diff_eq!(
        incomplete_f(FRAC_PI_2, modulus(0.6)).unwrap(),
        complete_k(modulus(0.6)).unwrap(),
        epsilon = 1e-14
    );
    const F_QUARTER: f64 = 0.791_958_690_486_926_3;
    assert_relative_eq!(f_oracle(FRAC_PI_4, 0.3), F_QUARTER, max_relative = 1e-14);
    assert_abs_diff_eq!(incomplete_f(FRAC_PI_4, modulus(0.3)).unwrap(), F_QUARTER, epsilon = 1e-12);
    for &phi in &[-1.2, 0.3, 1.5] {
        assert_abs_diff_eq!(incomplete_e(phi, modulus(0.8)).unwrap(), e_oracle(phi, 0.8), epsilon = 1e-12);
        assert_abs_diff_eq!(
            incomplete_f(-phi, modulus(0.8)).unwrap(),
            -incomplete_f(phi, modulus(0.8)).unwrap(),
            epsilon = 1e-15
        );
    }
}

#[test]
fn nome_small_modulus_and_composition() {
    for &k in &[1e-2, 1e-3] {
        let q = nome(modulus(k)).unwrap();
        assert_relative_eq!(q / (k * k / 16.0), 1.0, max_relative = 1e-4);
    }
    assert_eq!(nome(modulus(0.0)).unwrap(), 0.0);
    // Oracle: exp(-pi K(k') / K(k)) from the quadrature integrals.
    let kc = (1.0f64 - 0.64).sqrt();
    let oracle = (-PI * f_oracle(FRAC_PI_2, kc) / f_oracle(FRAC_PI_2, 0.8)).exp();
    const Q_08: f64 = 0.063_510_393_400_745_83;
    assert_relative_eq!(oracle, Q_08, max_relative = 1e-13);
    assert_abs_diff_eq!(nome(modulus(0.8)).unwrap(), Q_08, epsilon = 1e-12);
}

#[test]
fn amplitude_and_jacobi_values() {
    let m = modulus(0.6);
    assert_eq!(jacobi_am(0.0, m).unwrap(), 0.0);
    assert_abs_diff_eq!(jacobi_am(complete_k(m).unwrap(), m).unwrap(), FRAC_PI_2, epsilon = 1e-14);
    const AM: f64 = 0.951_162_931_828_722_4;
    assert_abs_diff_eq!(am_oracle(1.0, 0.6), AM, epsilon = 1e-13);
    assert_abs_diff_eq!(series::am_series(1.0, m, 1e-14).unwrap(), AM, epsilon = 1e-10);
    assert_abs_diff_eq!(jacobi_am(1.0, m).unwrap(), AM, epsilon = 1e-12);

    const SN: f64 = 0.803_801_720_058_993_6;
    assert_abs_diff_eq!(am_oracle(1.0, 0.7).sin(), SN, epsilon = 1e-13);
    assert_abs_diff_eq!(jacobi(1.0, modulus(0.7)).unwrap().sn, SN, epsilon = 1e-10);

    let tiny = jacobi(1.2, modulus(1e-9)).unwrap();
    assert_abs_diff_eq!(tiny.sn, 1.2f64.sin(), epsilon = 1e-12);

    let e = jacobi(0.9, modulus(0.7)).unwrap();
    assert_abs_diff_eq!(e.sn * e.sn + e.cn * e.cn, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(e.dn * e.dn + 0.49 * e.sn * e.sn, 1.0, epsilon = 1e-12);
}

#[test]
fn shift_identities() {
    for &k in &[0.1, 0.5, 0.9, 0.99] {
        let m = modulus(k);
        let big_k = complete_k(m).unwrap();
        for i in 0..40 {
            let u = -3.0 + 6.0 * i as f64 / 39.0;
            let plus = jacobi(u + big_k, m).unwrap();
            let minus = jacobi(u - big_k, m).unwrap();
            assert_abs_diff_eq!(plus.sn, -minus.sn, epsilon = 1e-10);
            assert_abs_diff_eq!(plus.cn, -minus.cn, epsilon = 1e-10);
        }
    }
}

#[test]
fn monotonicity_of_complete_integrals() {
    let mut prev_k = 0.0;
    let mut prev_e = f64::INFINITY;
    for i in 0..200 {
        let k = i as f64 / 200.0;
        let m = modulus(k);
        let (big_k, big_e) = (complete_k(m).unwrap(), complete_e(m).unwrap());
        assert!(big_e <= big_k);
        if i > 0 {
            assert!(big_e < big_k);
            assert!(big_k > prev_k);
            assert!(big_e < prev_e);
        }
        prev_k = big_k;
        prev_e = big_e;
    }
}

#[test]
fn bessel_values_and_expansions() {
    assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
    let z = 1e-2;
    assert_relative_eq!(bessel_i(1, z).unwrap() / (0.5 * z), 1.0, max_relative = 1e-4);

    const I1_2: f64 = 1.590_636_854_637_329;
    let (oracle, remainder) = bessel_series_oracle(1, 2.0);
    assert!(remainder < 1e-15);
    assert_relative_eq!(oracle, I1_2, max_relative = 1e-15);
    assert_abs_diff_eq!(bessel_i(1, 2.0).unwrap(), I1_2, epsilon = 1e-12);

    // Small-argument expansion with its second term.
    for n in 0..=5u32 {
        let z: f64 = 1e-3;
        let fact = |m: u32| (1..=m).map(|j| j as f64).product::<f64>();
        let approx = (0.5 * z).powi(n as i32) * (1.0 / fact(n) + z * z / (4.0 * fact(n + 1)));
        assert_relative_eq!(bessel_i(n, z).unwrap(), approx, max_relative = 1e-10);
    }
    // Large-argument expansion with its first correction.
    for n in 0..=3u32 {
        let z: f64 = 400.0;
        let approx = z.exp() / (2.0 * PI * z).sqrt() * (1.0 - (4.0 * (n * n) as f64 - 1.0) / (8.0 * z));
        assert_relative_eq!(bessel_i(n, z).unwrap(), approx, max_relative = 1e-4);
    }
}

#[test]
fn bessel_matches_integral_representation() {
    for n in 0..=10u32 {
        for &z in &[0.3, 4.0, 15.0, 16.0, 35.0, 49.0, 51.0, 80.0] {
            let oracle = bessel_integral_oracle(n, z);
            assert_relative_eq!(bessel_i(n, z).unwrap(), oracle, max_relative = 1e-11);
        }
    }
}

#[test]
fn bessel_inequalities() {
    for n in 0..=5u32 {
        for i in 0..500 {
            let z = 1e-3 * (50.0f64 / 1e-3).powf((i as f64 + 1.0) / 500.0);
            let nf = n as f64;
            let i_n = bessel_i(n, z).unwrap();
            let ratio_prime = z * bessel_i_prime(n, z).unwrap() / i_n;
            assert!(ratio_prime < (z * z + nf * nf).sqrt(), "n={n} z={z}");
            let ratio_next = bessel_i(n + 1, z).unwrap() / i_n;
            // (sqrt(a^2 + z^2) - a) / z written without cancellation.
            let bound = z / (((nf + 1.0).powi(2) + z * z).sqrt() + nf + 1.0);
            assert!(ratio_next > bound, "n={n} z={z}");
        }
    }
}

proptest! {
    #[test]
    fn pythagorean_identities(k in 0.001f64..0.999, s in -3.0f64..3.0) {
        let m = modulus(k);
        let u = s * complete_k(m).unwrap();
        let e = jacobi(u, m).unwrap();
        prop_assert!((e.sn * e.sn + e.cn * e.cn - 1.0).abs() < 1e-11);
        prop_assert!((e.dn * e.dn + k * k * e.sn * e.sn - 1.0).abs() < 1e-11);
        prop_assert!((e.sn - e.am.sin()).abs() < 1e-15);
    }

    #[test]
    fn series_agree_with_inversion(k in 0.01f64..0.95, u in -6.0f64..6.0) {
        let m = modulus(k);
        let e = jacobi(u, m).unwrap();
        prop_assert!((series::am_series(u, m, 1e-12).unwrap() - e.am).abs() < 1e-9);
        prop_assert!((series::sn_series(u, m, 1e-12).unwrap() - e.sn).abs() < 1e-9);
        prop_assert!((series::cn_series(u, m, 1e-12).unwrap() - e.cn).abs() < 1e-9);
        prop_assert!((series::dn_series(u, m, 1e-12).unwrap() - e.dn).abs() < 1e-9);
    }

    #[test]
    fn am_is_increasing(k in 0.0f64..0.9999, u in -10.0f64..10.0, du in 1e-6f64..1.0) {
        let m = modulus(k);
        prop_assert!(jacobi_am(u + du, m).unwrap() > jacobi_am(u, m).unwrap());
    }

    #[test]
    fn nome_is_increasing(k in 0.01f64..0.98, dk in 1e-4f64..0.01) {
        let q1 = nome(modulus(k)).unwrap();
        let q2 = nome(modulus(k + dk)).unwrap();
        prop_assert!(q1 > 0.0 && q2 < 1.0 && q2 > q1);
    }
}
