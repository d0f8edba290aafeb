//! Identity and inequality suites over parameter grids.

use super::{bessel_i, bessel_i_prime, complete_k, jacobi, series, Modulus};
use crate::error::Result;
use serde::{Deserialize, Serialize};

/// One row of a check table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Largest violation found; for inequalities the number of failures.
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            worst,
            tolerance,
            pass: worst < tolerance,
        }
    }
}

/// Pythagorean identities, shift identities and series-against-inversion
/// agreement on an `n x n` grid with `u` in `[-3K, 3K]` and `k` in `(0, 0.95]`.
pub fn identity_suite(n: usize) -> Result<Vec<Check>> {
    let mut pythagoras: f64 = 0.0;
    let mut modular: f64 = 0.0;
    let mut shift: f64 = 0.0;
    let mut series_gap: f64 = 0.0;
    let n = n.max(2);
    for i in 0..n {
        let k = 0.95 * (i + 1) as f64 / n as f64;
        let m = Modulus::new(k)?;
        let big_k = complete_k(m)?;
        for j in 0..n {
            let u = big_k * (-3.0 + 6.0 * j as f64 / (n - 1) as f64);
            let e = jacobi(u, m)?;
            pythagoras = pythagoras.max((e.sn * e.sn + e.cn * e.cn - 1.0).abs());
            modular = modular.max((e.dn * e.dn + k * k * e.sn * e.sn - 1.0).abs());
            let (plus, minus) = (jacobi(u + big_k, m)?, jacobi(u - big_k, m)?);
            shift = shift.max((plus.sn + minus.sn).abs()).max((plus.cn + minus.cn).abs());
            for (s, exact) in [
                (series::am_series(u, m, 1e-12)?, e.am),
                (series::sn_series(u, m, 1e-12)?, e.sn),
                (series::cn_series(u, m, 1e-12)?, e.cn),
                (series::dn_series(u, m, 1e-12)?, e.dn),
            ] {
                series_gap = series_gap.max((s - exact).abs());
            }
        }
    }
    Ok(vec![
        Check::new("sn^2+cn^2-1", pythagoras, 1e-11),
        Check::new("dn^2+k^2 sn^2-1", modular, 1e-11),
        Check::new("shift by K", shift, 1e-10),
        Check::new("series vs inversion", series_gap, 1e-9),
    ])
}

/// The two ratio bounds for `I_n`, `n <= n_max`, at `samples` log-spaced
/// points of `(1e-3, 50]`.
pub fn bessel_inequality_suite(n_max: u32, samples: usize) -> Result<Vec<Check>> {
    let mut derivative_failures = 0usize;
    let mut ratio_failures = 0usize;
    for n in 0..=n_max {
        let nf = n as f64;
        for i in 0..samples {
            let z = 1e-3 * (50.0f64 / 1e-3).powf((i as f64 + 1.0) / samples as f64);
            let i_n = bessel_i(n, z)?;
            if z * bessel_i_prime(n, z)? / i_n >= (z * z + nf * nf).sqrt() {
                derivative_failures += 1;
            }
            // (sqrt(a^2 + z^2) - a) / z without cancellation.
            let bound = z / (((nf + 1.0).powi(2) + z * z).sqrt() + nf + 1.0);
            if bessel_i(n + 1, z)? / i_n <= bound {
                ratio_failures += 1;
            }
        }
    }
    Ok(vec![
        Check::new("z I_n'/I_n < sqrt(z^2+n^2)", derivative_failures as f64, 0.5),
        Check::new("I_(n+1)/I_n lower bound", ratio_failures as f64, 0.5),
    ])
}
