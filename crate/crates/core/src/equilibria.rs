//! Stationary states eta = G(v^2/2 - M0 cos x) and their stability functionals.

use crate::actionangle::SpectralTable;
use crate::elliptic::{bessel_i, bessel_i_prime};
use crate::error::{Error, Result};
use crate::quad::GaussRule;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Energy profile G with G' < 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// Maxwell-Boltzmann profile `alpha * exp(-beta * y)`.
    Gaussian { alpha: f64, beta: f64 },
    /// Fermi-Dirac-like profile `alpha / (1 + exp(beta * y))`.
    Fermi { alpha: f64, beta: f64 },
}

impl Profile {
    pub fn gaussian(alpha: f64, beta: f64) -> Result<Self> {
        check_params(alpha, beta)?;
        Ok(Profile::Gaussian { alpha, beta })
    }

    pub fn fermi(alpha: f64, beta: f64) -> Result<Self> {
        check_params(alpha, beta)?;
        Ok(Profile::Fermi { alpha, beta })
    }

    pub fn g(&self, y: f64) -> f64 {
        match *self {
            Profile::Gaussian { alpha, beta } => alpha * (-beta * y).exp(),
            Profile::Fermi { alpha, beta } => {
                if y > 0.0 {
                    let e = (-beta * y).exp();
                    alpha * e / (1.0 + e)
                } else {
                    alpha / (1.0 + (beta * y).exp())
                }
            }
        }
    }

    pub fn g_prime(&self, y: f64) -> f64 {
        match *self {
            Profile::Gaussian { alpha, beta } => -alpha * beta * (-beta * y).exp(),
            Profile::Fermi { alpha, beta } => {
                // Even in y, so evaluate on the decaying side.
                let e = (-beta * y.abs()).exp();
                -alpha * beta * e / ((1.0 + e) * (1.0 + e))
            }
        }
    }

    /// Exponential decay rate of G and G' for large energies.
    pub fn decay_rate(&self) -> f64 {
        match *self {
            Profile::Gaussian { beta, .. } | Profile::Fermi { beta, .. } => beta,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Profile::Gaussian { alpha, beta } => format!("gaussian(alpha={alpha}, beta={beta})"),
            Profile::Fermi { alpha, beta } => format!("fermi(alpha={alpha}, beta={beta})"),
        }
    }

    /// Velocity cutoff beyond which G(v^2/2 - z cos x) is negligible.
    fn v_cutoff(&self, z: f64) -> f64 {
        (2.0 * (z + 40.0 / self.decay_rate())).sqrt()
    }
}

fn check_params(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::Domain(format!("profile parameters must be positive (alpha={alpha}, beta={beta})")));
    }
    Ok(())
}

/// Integral of `f(x, v)` against dx/(2 pi) dv, with `f` negligible past `vmax`.
pub fn phase_space_integral<F: Fn(f64, f64) -> f64>(f: F, vmax: f64, nx: usize) -> f64 {
    let rule = GaussRule::new(16);
    let mut total = 0.0;
    for i in 0..nx {
        let x = -PI + 2.0 * PI * (i as f64 + 0.5) / nx as f64;
        total += rule.integrate(|v| f(x, v) + f(x, -v), 0.0, vmax, 12);
    }
    total / nx as f64
}

fn x_points(beta_z: f64) -> usize {
    // The periodic midpoint rule converges like I_N(beta z) / I_0(beta z).
    (128.0 + 4.0 * beta_z).ceil() as usize
}

/// Magnetization map z -> integral of G(v^2/2 - z cos x) cos x.
///
/// Gaussian profiles use the closed form in terms of I_1.
pub fn magnetization_map(profile: &Profile, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("magnetization argument {z} must be >= 0")));
    }
    match *profile {
        Profile::Gaussian { alpha, beta } => Ok(alpha * (2.0 * PI / beta).sqrt() * bessel_i(1, beta * z)?),
        _ => magnetization_map_quadrature(profile, z),
    }
}

/// Magnetization map by direct phase-space quadrature, for any profile.
pub fn magnetization_map_quadrature(profile: &Profile, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("magnetization argument {z} must be >= 0")));
    }
    let value = phase_space_integral(
        |x, v| profile.g(0.5 * v * v - z * x.cos()) * x.cos(),
        profile.v_cutoff(z),
        x_points(profile.decay_rate() * z),
    );
    if !value.is_finite() {
        return Err(Error::NonConvergence {
            what: "magnetization quadrature",
            iterations: 1,
            residual: value,
        });
    }
    Ok(value)
}

/// The two sufficient conditions for a nontrivial magnetization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub zeta: f64,
    /// map(zeta) - zeta; the first condition asks for a value >= 0.
    pub first_value: f64,
    pub first: bool,
    /// 1 + integral of G'(v^2/2) cos^2 x; the second condition asks for > 0.
    pub second_value: f64,
    pub second: bool,
}

pub fn existence_conditions(profile: &Profile, zeta: f64) -> Result<ExistenceReport> {
    let first_value = magnetization_map(profile, zeta)? - zeta;
    let second_value = match *profile {
        Profile::Gaussian { alpha, beta } => 1.0 - alpha * beta.sqrt() * (2.0 * PI).sqrt() / 2.0,
        _ => {
            let rule = GaussRule::new(16);
            let vmax = profile.v_cutoff(0.0);
            // The x-average of cos^2 is 1/2.
            1.0 + 0.5 * rule.integrate(|v| 2.0 * profile.g_prime(0.5 * v * v), 0.0, vmax, 12)
        }
    };
    Ok(ExistenceReport {
        zeta,
        first_value,
        first: first_value >= 0.0,
        second_value,
        second: second_value > 0.0,
    })
}

/// Default bracket end for Gaussian-type profiles, doubled until the first
/// condition holds.
pub fn default_zeta(profile: &Profile) -> Result<f64> {
    let mut zeta = match *profile {
        Profile::Gaussian { alpha, beta } | Profile::Fermi { alpha, beta } => {
            5.0 / beta * (1.0f64).max((1.0 / (alpha * beta.sqrt())).ln())
        }
    };
    for _ in 0..12 {
        if magnetization_map(profile, zeta)? >= zeta {
            return Ok(zeta);
        }
        zeta *= 2.0;
    }
    Err(Error::NoPositiveRoot { zeta })
}

/// A self-consistent stationary state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryState {
    pub profile: Profile,
    pub m0: f64,
    pub residual: f64,
    pub conditions: ExistenceReport,
}

impl StationaryState {
    /// A state with a prescribed magnetization, not checked for self-consistency.
    pub fn with_magnetization(profile: Profile, m0: f64) -> Result<Self> {
        if !(m0 > 0.0) {
            return Err(Error::Domain(format!("magnetization {m0} must be positive")));
        }
        let residual = magnetization_map(&profile, m0)? - m0;
        let conditions = existence_conditions(&profile, m0)?;
        Ok(Self {
            profile,
            m0,
            residual,
            conditions,
        })
    }

    pub fn energy(&self, x: f64, v: f64) -> f64 {
        0.5 * v * v - self.m0 * x.cos()
    }

    /// Density eta(x, v).
    pub fn density(&self, x: f64, v: f64) -> f64 {
        self.profile.g(self.energy(x, v))
    }

    pub fn g_prime_at(&self, h: f64) -> f64 {
        self.profile.g_prime(h)
    }

    pub fn fingerprint(&self) -> String {
        format!("{} M0={}", self.profile.label(), self.m0)
    }
}

/// Smallest positive root of map(z) = z in `(0, zeta]`.
pub fn solve_magnetization(profile: &Profile, zeta: Option<f64>) -> Result<StationaryState> {
    let zeta = match zeta {
        Some(z) => z,
        None => default_zeta(profile).map_err(|_| Error::NoPositiveRoot { zeta: f64::NAN })?,
    };
    let conditions = existence_conditions(profile, zeta)?;
    let excess = |z: f64| -> Result<f64> { Ok(magnetization_map(profile, z)? - z) };

    // Scan outward for the first change from negative to non-negative.
    const SCAN: usize = 400;
    let mut lo = zeta * 1e-6;
    let mut f_lo = excess(lo)?;
    let mut bracket = None;
    for i in 1..=SCAN {
        let hi = zeta * 1e-6 + (zeta - zeta * 1e-6) * i as f64 / SCAN as f64;
        let f_hi = excess(hi)?;
        if f_lo < 0.0 && f_hi >= 0.0 {
            bracket = Some((lo, hi));
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    let (mut a, mut b) = bracket.ok_or(Error::NoPositiveRoot { zeta })?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if excess(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 1e-15 * b {
            break;
        }
    }
    // Newton polish on the bracketed root.
    let mut m0 = 0.5 * (a + b);
    let step = 1e-7 * m0;
    for _ in 0..3 {
        let f = excess(m0)?;
        let df = (excess(m0 + step)? - excess(m0 - step)?) / (2.0 * step);
        let next = m0 - f / df;
        if next > a && next < b {
            m0 = next;
        }
    }
    let residual = excess(m0)?;
    if residual.abs() >= 1e-10 * m0.max(1.0) {
        return Err(Error::NonConvergence {
            what: "magnetization root",
            iterations: 200,
            residual,
        });
    }
    Ok(StationaryState {
        profile: *profile,
        m0,
        residual,
        conditions,
    })
}

/// Phase-space integrals of G'(h0) against cos^2 x, cos x and 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeMoments {
    pub cos2: f64,
    pub cos: f64,
    pub one: f64,
}

/// Moments from Bessel closed forms for Gaussian profiles, quadrature otherwise.
pub fn derivative_moments(state: &StationaryState) -> Result<DerivativeMoments> {
    match state.profile {
        Profile::Gaussian { alpha, beta } => {
            let z = beta * state.m0;
            let c = alpha * beta.sqrt() * (2.0 * PI).sqrt();
            Ok(DerivativeMoments {
                cos2: -c * (bessel_i(0, z)? + bessel_i(2, z)?) / 2.0,
                cos: -c * bessel_i(1, z)?,
                one: -c * bessel_i(0, z)?,
            })
        }
        _ => Ok(derivative_moments_quadrature(state)),
    }
}

/// Moments by direct quadrature, for any profile.
pub fn derivative_moments_quadrature(state: &StationaryState) -> DerivativeMoments {
    let vmax = state.profile.v_cutoff(state.m0);
    let nx = x_points(state.profile.decay_rate() * state.m0);
    let gp = |x: f64, v: f64| state.profile.g_prime(state.energy(x, v));
    DerivativeMoments {
        cos2: phase_space_integral(|x, v| gp(x, v) * x.cos().powi(2), vmax, nx),
        cos: phase_space_integral(|x, v| gp(x, v) * x.cos(), vmax, nx),
        one: phase_space_integral(gp, vmax, nx),
    }
}

fn check_table(state: &StationaryState, table: &SpectralTable) -> Result<()> {
    if table.fingerprint() != state.fingerprint() {
        return Err(Error::Misuse(format!(
            "table built for '{}' used with state '{}'",
            table.fingerprint(),
            state.fingerprint()
        )));
    }
    Ok(())
}

/// 1 + integral of G' cos^2 x minus the angle-averaged part sum of int G' C_0^2 da.
pub fn stability_indicator(state: &StationaryState, table: &SpectralTable) -> Result<f64> {
    check_table(state, table)?;
    let moments = derivative_moments(state)?;
    Ok(1.0 + moments.cos2 - table.mean_cos_term())
}

/// Cauchy-Schwarz lower bound 1 + int G' cos^2 - (int G' cos)^2 / int G'.
pub fn stability_sufficient(state: &StationaryState) -> Result<f64> {
    let m = derivative_moments(state)?;
    Ok(1.0 + m.cos2 - m.cos * m.cos / m.one)
}

/// The Gaussian form 1 - z I_1'/I_1 + z I_1/I_0 with z = beta M0, valid at
/// a self-consistent magnetization.
pub fn gaussian_sufficient_bessel(state: &StationaryState) -> Result<f64> {
    match state.profile {
        Profile::Gaussian { beta, .. } => {
            let z = beta * state.m0;
            let i0 = bessel_i(0, z)?;
            let i1 = bessel_i(1, z)?;
            Ok(1.0 - z * bessel_i_prime(1, z)? / i1 + z * i1 / i0)
        }
        _ => Err(Error::Misuse("Bessel form only applies to Gaussian profiles".into())),
    }
}
