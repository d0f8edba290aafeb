mod common;

use approx::{assert_abs_diff_eq, assert_relative_eq};
use common::{bessel_series_oracle, bisect};
use hmf_core::actionangle::{SpectralTable, TableConfig};
use hmf_core::equilibria::{
    derivative_moments, derivative_moments_quadrature, existence_conditions, gaussian_sufficient_bessel,
    magnetization_map, magnetization_map_quadrature, solve_magnetization, stability_indicator,
    stability_sufficient, Profile, StationaryState,
};
use hmf_core::error::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Self-consistent magnetization of the (0.3, 4) Gaussian from bisection on
/// the power-series Bessel function.
const M0_PRESET: f64 = 0.386_373_759_756_034;

fn preset() -> Profile {
    Profile::gaussian(0.3, 4.0).unwrap()
}

/// A table that only needs static integrals, so the time horizon is short.
fn static_table(state: &StationaryState) -> SpectralTable {
    let config = TableConfig {
        horizon: 1.0,
        ..TableConfig::default()
    };
    SpectralTable::build(state, &[], &config).unwrap()
}

#[test]
fn preset_root_matches_series_oracle() {
    let (alpha, beta) = (0.3, 4.0);
    let excess = |z: f64| alpha * (2.0 * PI / beta).sqrt() * bessel_series_oracle(1, beta * z).0 - z;
    let root = bisect(excess, 0.05, 2.0);
    assert_abs_diff_eq!(root, M0_PRESET, epsilon = 1e-13);

    let state = solve_magnetization(&preset(), None).unwrap();
    assert_abs_diff_eq!(state.m0, M0_PRESET, epsilon = 1e-12);
    assert!(state.residual.abs() < 1e-10);
    assert!(state.conditions.first && state.conditions.second);
}

#[test]
fn map_values() {
    let p = preset();
    assert_eq!(magnetization_map(&p, 0.0).unwrap(), 0.0);
    let z = 1e-3;
    let small = 0.3 * (2.0 * PI / 4.0f64).sqrt() * 4.0 * z / 2.0;
    assert_relative_eq!(magnetization_map(&p, z).unwrap(), small, max_relative = 1e-5);
    assert_abs_diff_eq!(
        magnetization_map_quadrature(&p, 0.5).unwrap(),
        magnetization_map(&p, 0.5).unwrap(),
        epsilon = 1e-9
    );
    assert!(magnetization_map(&p, -1.0).is_err());
}

#[test]
fn closed_form_and_quadrature_agree_on_a_range() {
    let p = preset();
    for i in 0..=40 {
        let z = 10.0 * i as f64 / 40.0;
        let a = magnetization_map(&p, z).unwrap();
        let b = magnetization_map_quadrature(&p, z).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "z={z}: {a} vs {b}");
    }
}

#[test]
fn existence_conditions_for_the_preset() {
    let report = existence_conditions(&preset(), 5.0).unwrap();
    assert!(report.first);
    let expected = 1.0 - 0.3 * 2.0 * (2.0 * PI).sqrt() / 2.0;
    assert_abs_diff_eq!(report.second_value, expected, epsilon = 1e-15);
    assert!(report.second);
}

#[test]
fn supercritical_gaussian_reports_failed_second_condition() {
    // alpha sqrt(beta) = 0.9 > 2 / sqrt(2 pi).
    let p = Profile::gaussian(0.45, 4.0).unwrap();
    let report = existence_conditions(&p, 5.0).unwrap();
    assert!(!report.second);
    match solve_magnetization(&p, Some(5.0)) {
        Err(Error::NoPositiveRoot { .. }) => {}
        Ok(state) => assert!(!state.conditions.second),
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn second_condition_vanishes_linearly_at_the_threshold() {
    let beta: f64 = 4.0;
    let critical = 2.0 / (2.0 * PI).sqrt() / beta.sqrt();
    let values: Vec<f64> = [1e-2, 2e-2, 4e-2]
        .iter()
        .map(|d| {
            let p = Profile::gaussian(critical * (1.0 - d), beta).unwrap();
            existence_conditions(&p, 1.0).unwrap().second_value
        })
        .collect();
    assert_relative_eq!(values[1] / values[0], 2.0, max_relative = 1e-10);
    assert_relative_eq!(values[2] / values[1], 2.0, max_relative = 1e-10);
}

#[test]
fn zero_profile_never_meets_the_first_condition() {
    // The map is linear in alpha, so a vanishing amplitude gives map = 0 < zeta.
    let p = Profile::gaussian(1e-300, 4.0).unwrap();
    for zeta in [0.1, 1.0, 10.0] {
        assert!(!existence_conditions(&p, zeta).unwrap().first);
    }
}

#[test]
fn stability_functionals_for_the_preset() {
    let state = solve_magnetization(&preset(), None).unwrap();
    let table = static_table(&state);
    let indicator = stability_indicator(&state, &table).unwrap();
    let sufficient = stability_sufficient(&state).unwrap();
    let bessel = gaussian_sufficient_bessel(&state).unwrap();
    assert!(indicator > 0.0);
    assert!(bessel > 0.0);
    assert_abs_diff_eq!(sufficient, bessel, epsilon = 1e-12);
    assert!(sufficient <= indicator);
    // Without the C_0 subtraction the indicator is strictly smaller.
    let moments = derivative_moments(&state).unwrap();
    assert!(1.0 + moments.cos2 < indicator);
    // The subtracted Cauchy-Schwarz term raises the value.
    assert!(sufficient > 1.0 + moments.cos2);
}

#[test]
fn moments_agree_between_paths() {
    let state = solve_magnetization(&preset(), None).unwrap();
    let a = derivative_moments(&state).unwrap();
    let b = derivative_moments_quadrature(&state);
    assert_abs_diff_eq!(a.cos2, b.cos2, epsilon = 1e-10);
    assert_abs_diff_eq!(a.cos, b.cos, epsilon = 1e-10);
    assert_abs_diff_eq!(a.one, b.one, epsilon = 1e-10);
}

#[test]
fn sufficient_implies_indicator_on_a_sweep() {
    for beta in [1.0, 2.5, 4.0, 8.0] {
        let alpha = 0.6 / f64::sqrt(beta);
        let state = solve_magnetization(&Profile::gaussian(alpha, beta).unwrap(), None).unwrap();
        let sufficient = stability_sufficient(&state).unwrap();
        let indicator = stability_indicator(&state, &static_table(&state)).unwrap();
        assert!(sufficient > 0.0, "beta={beta}");
        assert!(indicator > 0.0 && indicator >= sufficient - 1e-9, "beta={beta}");
    }
}

#[test]
fn fermi_profile_without_a_magnetized_branch() {
    // The map of a Fermi profile grows like sqrt(z), so with a slope below one
    // at the origin it never catches up with the diagonal.
    let p = Profile::fermi(0.5, 4.0).unwrap();
    let report = existence_conditions(&p, 1.0).unwrap();
    // Adaptive quadrature of 1 + (1/2) int G'(v^2/2) dv over the real line.
    assert_abs_diff_eq!(report.second_value, 0.523_609_264_694_624, epsilon = 1e-9);
    assert!(!report.first);
    assert!(matches!(solve_magnetization(&p, None), Err(Error::NoPositiveRoot { .. })));

    let state = StationaryState::with_magnetization(p, 0.4).unwrap();
    assert!(gaussian_sufficient_bessel(&state).is_err());
    assert!(stability_sufficient(&state).unwrap().is_finite());
}

#[test]
fn table_for_another_state_is_rejected() {
    let state = solve_magnetization(&preset(), None).unwrap();
    let other = StationaryState::with_magnetization(preset(), 0.5).unwrap();
    let table = static_table(&other);
    assert!(matches!(stability_indicator(&state, &table), Err(Error::Misuse(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn returned_states_are_self_consistent(scale in 0.2f64..0.75, beta in 0.5f64..10.0) {
        let alpha = scale / beta.sqrt();
        let state = solve_magnetization(&Profile::gaussian(alpha, beta).unwrap(), None).unwrap();
        let map = magnetization_map(&state.profile, state.m0).unwrap();
        prop_assert!((map - state.m0).abs() < 1e-10 * state.m0.max(1.0));
    }
}
