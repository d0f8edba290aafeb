use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Highest order accepted by [`bessel_i`].
pub const BESSEL_MAX_ORDER: u32 = 10;

/// Above this argument the asymptotic expansion replaces the power series.
/// At 50 the optimally truncated expansion is accurate to machine precision
/// for every order up to `BESSEL_MAX_ORDER + 1`.
const ASYMPTOTIC_FROM: f64 = 50.0;

/// e^z overflows past this point.
const OVERFLOW_Z: f64 = 700.0;

/// Modified Bessel function of the first kind I_n(z), `n <= 10`, `z >= 0`.
pub fn bessel_i(n: u32, z: f64) -> Result<f64> {
    if n > BESSEL_MAX_ORDER {
        return Err(Error::Domain(format!("Bessel order {n} above {BESSEL_MAX_ORDER}")));
    }
    eval(n, z)
}

/// Derivative I_n'(z) = (I_{n-1}(z) + I_{n+1}(z)) / 2.
pub fn bessel_i_prime(n: u32, z: f64) -> Result<f64> {
    if n > BESSEL_MAX_ORDER {
        return Err(Error::Domain(format!("Bessel order {n} above {BESSEL_MAX_ORDER}")));
    }
    let below = if n == 0 { eval(1, z)? } else { eval(n - 1, z)? };
    Ok(0.5 * (below + eval(n + 1, z)?))
}

fn eval(n: u32, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("Bessel argument {z} must be >= 0")));
    }
    if z > OVERFLOW_Z {
        return Err(Error::Range(format!("I_{n}({z}) overflows")));
    }
    if z <= ASYMPTOTIC_FROM {
        Ok(power_series(n, z))
    } else {
        Ok(asymptotic(n, z))
    }
}

fn power_series(n: u32, z: f64) -> f64 {
    // All terms are positive, so the sum carries no cancellation.
    let half = 0.5 * z;
    let mut term = 1.0;
    for j in 1..=n {
        term *= half / j as f64;
    }
    let quarter = half * half;
    let mut sum = term;
    let mut j = 1.0;
    loop {
        term *= quarter / (j * (j + n as f64));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
        j += 1.0;
    }
    sum
}

fn asymptotic(n: u32, z: f64) -> f64 {
    let mu = 4.0 * (n as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for j in 1..200 {
        let odd = (2 * j - 1) as f64;
        term *= -(mu - odd * odd) / (j as f64 * 8.0 * z);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if prev <= 1e-17 * sum.abs() {
            break;
        }
    }
    z.exp() / (2.0 * PI * z).sqrt() * sum
}
