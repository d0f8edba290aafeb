mod common;

use approx::assert_abs_diff_eq;
use common::phase_space_integral;
use hmf_core::actionangle::{Observable, SpectralTable, TableConfig};
use hmf_core::equilibria::{solve_magnetization, stability_indicator, Profile, StationaryState};
use hmf_core::error::Error;
use hmf_core::volterra::{
    hat_kernel, kernel_series, penrose_scan, reconstruct_with_resolvent, resolvent_kernel, solve_volterra,
    source_series, HatKernel, KernelSeries, PenroseConfig, PenroseScan, Series, TimeGrid,
};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

struct Fixture {
    state: StationaryState,
    table: SpectralTable,
    kernels: KernelSeries,
}

fn bump() -> Observable {
    Observable::gaussian_bump("r0", 0.5, 0.3, 0.4, 1.0)
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let state = solve_magnetization(&Profile::gaussian(0.3, 4.0).unwrap(), None).unwrap();
        let table = SpectralTable::build(&state, &[bump()], &TableConfig::default()).unwrap();
        let kernels = kernel_series(&state, &table, &TimeGrid::new(0.05, 200.0).unwrap()).unwrap();
        Fixture { state, table, kernels }
    })
}

fn scan() -> &'static PenroseScan {
    static SCAN: OnceLock<PenroseScan> = OnceLock::new();
    SCAN.get_or_init(|| {
        let f = fixture();
        penrose_scan(&f.state, &f.table, &PenroseConfig::default()).unwrap()
    })
}

/// Pendulum flow by RK4 with step near 0.005.
fn flow(m0: f64, (mut x, mut v): (f64, f64), t: f64) -> (f64, f64) {
    let steps = (t / 0.005).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let f = |x: f64, v: f64| (v, -m0 * x.sin());
    for _ in 0..steps {
        let (k1x, k1v) = f(x, v);
        let (k2x, k2v) = f(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
        let (k3x, k3v) = f(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
        let (k4x, k4v) = f(x + dt * k3x, v + dt * k3v);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (x, v)
}

fn at(series: &[f64], grid_dt: f64, t: f64) -> f64 {
    series[(t / grid_dt).round() as usize]
}

// Solver on closed-form problems.

#[test]
fn zero_kernel_returns_the_source() {
    let grid = TimeGrid::new(0.01, 2.0).unwrap();
    let f = Series::from_fn(grid, |t| (3.0 * t).sin() + 0.5);
    let sol = solve_volterra(&Series::zeros(grid), &f).unwrap();
    assert_eq!(sol.y, f.values);
    let r = resolvent_kernel(&Series::zeros(grid)).unwrap();
    assert!(r.values.iter().all(|v| *v == 0.0));
}

#[test]
fn exponential_kernel_gives_linear_growth() {
    // The trapezoid error grows with t; at T = 5 it is 2.3e-6.
    let grid = TimeGrid::new(1e-3, 2.0).unwrap();
    let k = Series::from_fn(grid, |t| (-t).exp());
    let f = Series::from_fn(grid, |_| 1.0);
    let sol = solve_volterra(&k, &f).unwrap();
    let err = grid.times().zip(&sol.y).map(|(t, y)| (y - 1.0 - t).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "max error {err}");
    assert!(sol.max_residual() < 1e-12);

    let r = resolvent_kernel(&k).unwrap();
    let y = reconstruct_with_resolvent(&r, &f).unwrap();
    let err = grid.times().zip(&y.values).map(|(t, y)| (y - 1.0 - t).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "resolvent path error {err}");
}

#[test]
fn trapezoid_stepping_is_second_order() {
    let errors: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| {
            let grid = TimeGrid::new(dt, 4.0).unwrap();
            let k = Series::from_fn(grid, |t| (-t).exp());
            let f = Series::from_fn(grid, |_| 1.0);
            let sol = solve_volterra(&k, &f).unwrap();
            grid.times().zip(&sol.y).map(|(t, y)| (y - 1.0 - t).abs()).fold(0.0, f64::max)
        })
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn singular_diagonal_is_reported() {
    let grid = TimeGrid::new(0.1, 1.0).unwrap();
    let k = Series::from_fn(grid, |_| 20.0);
    let f = Series::from_fn(grid, |_| 1.0);
    assert!(matches!(solve_volterra(&k, &f), Err(Error::Stability { .. })));
}

#[test]
fn mismatched_grids_are_rejected() {
    let a = TimeGrid::new(0.1, 1.0).unwrap();
    let b = TimeGrid::new(0.05, 1.0).unwrap();
    assert!(matches!(
        solve_volterra(&Series::zeros(a), &Series::zeros(b)),
        Err(Error::Misuse(_))
    ));
    assert!(TimeGrid::new(0.3, 1.0).is_err());
    assert!(TimeGrid::new(-0.1, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exponential_kernels_match_closed_form(a in -1.5f64..1.5, b in 0.2f64..3.0) {
        prop_assume!((a - b).abs() > 0.05);
        let grid = TimeGrid::new(1e-3, 2.0).unwrap();
        let k = Series::from_fn(grid, |t| a * (-b * t).exp());
        let f = Series::from_fn(grid, |_| 1.0);
        let sol = solve_volterra(&k, &f).unwrap();
        prop_assert!(sol.max_residual() < 1e-12);
        for (t, y) in grid.times().zip(&sol.y) {
            let exact = (a * ((a - b) * t).exp() - b) / (a - b);
            prop_assert!((y - exact).abs() < 1e-5 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn solution_is_linear_in_the_source(scale in -3.0f64..3.0, w in 0.5f64..4.0) {
        let grid = TimeGrid::new(0.01, 1.0).unwrap();
        let k = Series::from_fn(grid, |t| (w * t).cos() * (-t).exp());
        let f = Series::from_fn(grid, |t| (2.0 * t).sin() + 1.0);
        let g = Series::from_fn(grid, |t| scale * ((2.0 * t).sin() + 1.0));
        let y = solve_volterra(&k, &f).unwrap();
        let z = solve_volterra(&k, &g).unwrap();
        for (a, b) in y.y.iter().zip(&z.y) {
            prop_assert!((scale * a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }
}

// Kernels of the Gaussian preset.

#[test]
fn kernels_vanish_at_time_zero() {
    let k = &fixture().kernels;
    assert!(k.k_c[0].abs() < 1e-15);
    assert!(k.k_s[0].abs() < 1e-15);
}

#[test]
fn sine_companion_starts_at_one() {
    // Integrating by parts in x, the integral of G'(h0) sin^2 x is -1 for
    // any self-consistent state.
    assert_abs_diff_eq!(fixture().kernels.q_s[0], 1.0, epsilon = 1e-9);
}

#[test]
fn cos_companion_at_zero_matches_indicator() {
    let f = fixture();
    let indicator = stability_indicator(&f.state, &f.table).unwrap();
    assert!((1.0 + f.kernels.q_c[0] - indicator).abs() < 1e-6);
}

#[test]
fn kernel_is_derivative_of_companion() {
    // Centered differences of Q_C on two grids; the error must drop by four.
    let f = fixture();
    let errors: Vec<f64> = [0.05, 0.025]
        .iter()
        .map(|&dt| {
            let grid = TimeGrid::new(dt, 2.0).unwrap();
            let k = kernel_series(&f.state, &f.table, &grid).unwrap();
            let n = (1.0 / dt).round() as usize;
            let fd = (k.q_c[n + 1] - k.q_c[n - 1]) / (2.0 * dt);
            (k.k_c[n] - fd).abs()
        })
        .collect();
    assert!(errors[0] < 1e-2 * at(&fixture().kernels.k_c, 0.05, 1.0).abs());
    let ratio = errors[0] / errors[1];
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn kernels_match_phase_space_quadrature() {
    let f = fixture();
    let m0 = f.state.m0;
    let state = f.state;
    for t in [0.1, 0.2, 1.0] {
        // K_C = int {eta, cos X} cos(X o psi_t), K_S = -int {eta, sin X} sin(X o psi_t)
        // with {eta, cos X} = G' v sin x and {eta, sin X} = -G' v cos x.
        let kc = phase_space_integral(
            &|x, v| {
                let (y, _) = flow(m0, (x, v), t);
                state.g_prime_at(state.energy(x, v)) * v * x.sin() * y.cos()
            },
            96,
            5.0,
        );
        let ks = phase_space_integral(
            &|x, v| {
                let (y, _) = flow(m0, (x, v), t);
                state.g_prime_at(state.energy(x, v)) * v * x.cos() * y.sin()
            },
            96,
            5.0,
        );
        assert_abs_diff_eq!(at(&f.kernels.k_c, 0.05, t), kc, epsilon = 1e-8);
        assert_abs_diff_eq!(at(&f.kernels.k_s, 0.05, t), ks, epsilon = 1e-8);
    }
}

#[test]
fn kernels_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kernels.csv");
    let k = &fixture().kernels;
    k.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("t,K_C,K_S,Q_C,Q_S"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), k.grid.len());
    assert_eq!(rows[20], vec![k.grid.t(20), k.k_c[20], k.k_s[20], k.q_c[20], k.q_s[20]]);
}

#[test]
fn grid_past_the_horizon_is_refused() {
    let f = fixture();
    let grid = TimeGrid::new(0.05, 400.0).unwrap();
    assert!(matches!(kernel_series(&f.state, &f.table, &grid), Err(Error::Misuse(_))));
}

// Sources.

#[test]
fn sources_match_phase_space_quadrature() {
    let f = fixture();
    let m0 = f.state.m0;
    let grid = TimeGrid::new(0.05, 2.0).unwrap();
    let rows = f.table.rows("r0").unwrap();
    let src = source_series(&f.state, &f.table, &rows, &grid).unwrap();
    let r0 = bump();
    for t in [0.0, 1.0] {
        let fc = phase_space_integral(
            &|x, v| {
                let (y, _) = flow(m0, (x, v), t);
                r0.eval(x, v) * y.cos()
            },
            128,
            4.0,
        );
        let fs = phase_space_integral(
            &|x, v| {
                let (y, _) = flow(m0, (x, v), t);
                r0.eval(x, v) * y.sin()
            },
            128,
            4.0,
        );
        assert_abs_diff_eq!(at(&src.f_c, 0.05, t), fc, epsilon = 1e-6);
        assert_abs_diff_eq!(at(&src.f_s, 0.05, t), fs, epsilon = 1e-6);
    }
}

#[test]
fn resolvent_reproduces_the_physical_solution() {
    let f = fixture();
    let grid = f.kernels.grid;
    let rows = f.table.rows("r0").unwrap();
    let src = source_series(&f.state, &f.table, &rows, &grid).unwrap();
    for (k, s) in [
        (f.kernels.kernel_c(), src.source_c()),
        (f.kernels.kernel_s(), src.source_s()),
    ] {
        let direct = solve_volterra(&k, &s).unwrap();
        assert!(direct.max_residual() < 1e-12);
        let r = resolvent_kernel(&k).unwrap();
        let via = reconstruct_with_resolvent(&r, &s).unwrap();
        let diff = direct.y.iter().zip(&via.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "difference {diff}");
    }
}

// Transforms.

#[test]
fn transform_at_zero_matches_companion() {
    let f = fixture();
    let v = hat_kernel(&f.state, &f.table, Complex64::new(0.0, 0.0)).unwrap();
    assert!(((1.0 - v.c.re) - (1.0 + f.kernels.q_c[0])).abs() < 1e-8);
    assert!(((1.0 - v.s.re) - (1.0 + f.kernels.q_s[0])).abs() < 1e-8);
}

#[test]
fn transform_decays_far_down() {
    let f = fixture();
    let v = hat_kernel(&f.state, &f.table, Complex64::new(0.0, -1e4)).unwrap();
    assert!(v.c.norm() < 1e-2);
    assert!(v.s.norm() < 1e-2);
}

#[test]
fn transform_matches_time_domain_quadrature() {
    let f = fixture();
    let dt = 0.005;
    let grid = TimeGrid::new(dt, 50.0).unwrap();
    let k = kernel_series(&f.state, &f.table, &grid).unwrap();
    let xi = Complex64::new(1.0, -0.5);
    // Composite Simpson on [0, 50]; the remainder is below exp(-25).
    let simpson = |y: &[f64]| -> Complex64 {
        let n = y.len() - 1;
        (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * y[i] * (Complex64::new(0.0, -(i as f64) * dt) * xi).exp()
            })
            .sum::<Complex64>()
            * (dt / 3.0)
    };
    let v = hat_kernel(&f.state, &f.table, xi).unwrap();
    assert!((v.c - simpson(&k.k_c)).norm() < 1e-4);
    assert!((v.s - simpson(&k.k_s)).norm() < 1e-4);
}

#[test]
fn transform_is_real_on_the_imaginary_axis() {
    let f = fixture();
    let hat = HatKernel::new(&f.state, &f.table).unwrap();
    for tau in [1e-3, 0.1, 2.0] {
        let v = hat.eval(Complex64::new(0.0, -tau)).unwrap();
        assert!(v.c.im.abs() < 1e-14 && v.s.im.abs() < 1e-14);
    }
}

#[test]
fn cos_transform_has_negative_imaginary_part_in_fourth_quadrant() {
    let f = fixture();
    let hat = HatKernel::new(&f.state, &f.table).unwrap();
    for gamma in [0.05, 0.3, 0.6, 1.0, 2.0, 4.0] {
        for tau in [1e-3, 0.05, 0.5, 1.0] {
            let v = hat.eval(Complex64::new(gamma, -tau)).unwrap();
            assert!(v.c.im < 0.0, "gamma={gamma} tau={tau}: {}", v.c);
        }
    }
}

#[test]
fn real_axis_resonance_is_refused() {
    let f = fixture();
    let hat = HatKernel::new(&f.state, &f.table).unwrap();
    let node = f.table.charts()[0].nodes.iter().find(|n| n.g_prime.abs() > 1e-3).unwrap();
    assert!(matches!(
        hat.eval(Complex64::new(node.omega, 0.0)),
        Err(Error::Resonance { harmonic: 1, .. })
    ));
    assert!(matches!(
        hat.eval(Complex64::new(-node.omega, 0.0)),
        Err(Error::Resonance { harmonic: -1, .. })
    ));
    assert!(matches!(hat.eval(Complex64::new(0.5, 0.1)), Err(Error::Domain(_))));
}

// Penrose scan.

#[test]
fn stable_preset_passes_the_scan() {
    let s = scan();
    assert!(s.pass);
    assert!(s.one_minus_c_at_zero > 0.0 && s.one_minus_s_at_zero > 0.0);
    assert!(s.min_c > 0.0 && s.min_s > 0.0);
    assert!(s.outer_ok);
    assert!(s.failures.is_empty());
    let on_grid = s.points.iter().map(|p| p.hat.margin_c()).fold(f64::INFINITY, f64::min);
    assert!(s.min_c <= on_grid);
    assert!(s.real_axis_min > 0.0);
}

#[test]
fn scan_minimum_is_stable_under_refinement() {
    let f = fixture();
    let fine = penrose_scan(&f.state, &f.table, &PenroseConfig::default().refined(2)).unwrap();
    let coarse = scan();
    assert!(((fine.min_c - coarse.min_c) / coarse.min_c).abs() < 0.05);
    assert!(((fine.min_s - coarse.min_s) / coarse.min_s).abs() < 0.05);
}

#[test]
fn penrose_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("penrose.csv");
    let s = scan();
    s.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re_xi,im_xi,abs_one_minus_KC,abs_one_minus_KS"));
    assert_eq!(lines.count(), s.points.len());
    let json = serde_json::to_value(s.summary()).unwrap();
    for key in ["min_KC", "min_KS", "at_xi", "pass"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}
