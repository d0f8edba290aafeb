//! Nome-based Fourier series of the Jacobi functions.
//!
//! These are the classical expansions in `q`; they serve as seeds for the
//! amplitude inversion and as independent cross-checks of it.

use super::{complete_e, complete_k, nome, Modulus};
use crate::error::Result;
use std::f64::consts::PI;

/// Smallest number of terms `n` with `q^(n+1) / (1 - q) < tol`.
pub fn terms_for(q: f64, tol: f64) -> usize {
    if q <= 0.0 {
        return 1;
    }
    let mut n = 1usize;
    while q.powi(n as i32 + 1) / (1.0 - q) >= tol && n < 10_000 {
        n += 1;
    }
    n
}

/// am(u) from the series with a fixed number of terms, given `q` and `K`.
pub fn am_series_with(u: f64, q: f64, big_k: f64, terms: usize) -> f64 {
    let w = PI * u / big_k;
    let mut sum = 0.5 * w;
    let mut qm = 1.0;
    for m in 1..=terms {
        qm *= q;
        let mf = m as f64;
        sum += 2.0 * qm / (mf * (1.0 + qm * qm)) * (mf * w).sin();
    }
    sum
}

struct SeriesSetup {
    k: f64,
    big_k: f64,
    q: f64,
    tol: f64,
}

fn setup(m: Modulus, tol: f64) -> Result<SeriesSetup> {
    Ok(SeriesSetup {
        k: m.k(),
        big_k: complete_k(m)?,
        q: nome(m)?,
        tol,
    })
}

impl SeriesSetup {
    /// Sums `term(j)` for `j = 1, 2, ...` where `coef(j)` bounds the j-th
    /// term including prefactors; stops once the geometric tail from that
    /// point on is below the tolerance.
    fn sum(&self, coef: impl Fn(usize) -> f64, basis: impl Fn(usize) -> f64) -> f64 {
        let mut total = 0.0;
        for j in 1..100_000 {
            let c = coef(j);
            total += c * basis(j);
            if c.abs() * self.q / (1.0 - self.q) < self.tol || c == 0.0 {
                break;
            }
        }
        total
    }
}

/// am(u, k) truncated so the geometric tail is below `tol`.
pub fn am_series(u: f64, m: Modulus, tol: f64) -> Result<f64> {
    let s = setup(m, tol)?;
    Ok(am_series_with(u, s.q, s.big_k, terms_for(s.q, tol)))
}

/// sn(u, k) = 2 pi / (k K) sum q^(m-1/2) / (1 - q^(2m-1)) sin((2m-1) pi u / (2K)).
pub fn sn_series(u: f64, m: Modulus, tol: f64) -> Result<f64> {
    let s = setup(m, tol)?;
    let w = PI * u / (2.0 * s.big_k);
    let pre = 2.0 * PI / (s.k * s.big_k);
    Ok(s.sum(
        |j| pre * s.q.powf(j as f64 - 0.5) / (1.0 - s.q.powi(2 * j as i32 - 1)),
        |j| ((2 * j - 1) as f64 * w).sin(),
    ))
}

/// cn(u, k), same form as sn with `1 + q^(2m-1)` and cosines.
pub fn cn_series(u: f64, m: Modulus, tol: f64) -> Result<f64> {
    let s = setup(m, tol)?;
    let w = PI * u / (2.0 * s.big_k);
    let pre = 2.0 * PI / (s.k * s.big_k);
    Ok(s.sum(
        |j| pre * s.q.powf(j as f64 - 0.5) / (1.0 + s.q.powi(2 * j as i32 - 1)),
        |j| ((2 * j - 1) as f64 * w).cos(),
    ))
}

/// dn(u, k) = pi / (2K) + 2 pi / K sum q^m / (1 + q^(2m)) cos(m pi u / K).
pub fn dn_series(u: f64, m: Modulus, tol: f64) -> Result<f64> {
    let s = setup(m, tol)?;
    let w = PI * u / s.big_k;
    let pre = 2.0 * PI / s.big_k;
    let tail = s.sum(
        |j| pre * s.q.powi(j as i32) / (1.0 + s.q.powi(2 * j as i32)),
        |j| (j as f64 * w).cos(),
    );
    Ok(PI / (2.0 * s.big_k) + tail)
}

/// sn^2(u, k) from Milne's expansion.
pub fn sn2_series(u: f64, m: Modulus, tol: f64) -> Result<f64> {
    let s = setup(m, tol)?;
    let e = complete_e(m)?;
    let k2 = s.k * s.k;
    let w = PI * u / s.big_k;
    let pre = 2.0 * PI * PI / (k2 * s.big_k * s.big_k);
    let tail = s.sum(
        |j| pre * j as f64 * s.q.powi(j as i32) / (1.0 - s.q.powi(2 * j as i32)),
        |j| (j as f64 * w).cos(),
    );
    Ok((s.big_k - e) / (k2 * s.big_k) - tail)
}

/// sn(u, k) cn(u, k) from Milne's expansion.
pub fn sncn_series(u: f64, m: Modulus, tol: f64) -> Result<f64> {
    let s = setup(m, tol)?;
    let k2 = s.k * s.k;
    let w = PI * u / s.big_k;
    let pre = 2.0 * PI * PI / (k2 * s.big_k * s.big_k);
    Ok(s.sum(
        |j| pre * j as f64 * s.q.powi(j as i32) / (1.0 + s.q.powi(2 * j as i32)),
        |j| (j as f64 * w).sin(),
    ))
}

/// sn(u, k) dn(u, k) from Milne's expansion.
pub fn sndn_series(u: f64, m: Modulus, tol: f64) -> Result<f64> {
    let s = setup(m, tol)?;
    let w = PI * u / (2.0 * s.big_k);
    let pre = PI * PI / (s.k * s.big_k * s.big_k);
    Ok(s.sum(
        |j| {
            let odd = (2 * j - 1) as f64;
            pre * odd * s.q.powf(j as f64 - 0.5) / (1.0 + s.q.powi(2 * j as i32 - 1))
        },
        |j| ((2 * j - 1) as f64 * w).sin(),
    ))
}
