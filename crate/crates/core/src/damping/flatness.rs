use crate::actionangle::Observable;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Step of the difference stencils.
const STEP: f64 = 1e-2;

/// Derivatives below this size count as vanishing.
pub const FLATNESS_TOL: f64 = 1e-6;

/// Fourth-order central stencils for derivatives of order 0..=4, as
/// (offsets, weights, denominator power).
fn stencil(order: usize) -> (&'static [i32], &'static [f64], f64) {
    match order {
        0 => (&[0], &[1.0], 1.0),
        1 => (&[-2, -1, 1, 2], &[1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0], STEP),
        2 => (
            &[-2, -1, 0, 1, 2],
            &[-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
            STEP * STEP,
        ),
        3 => (
            &[-3, -2, -1, 1, 2, 3],
            &[1.0 / 8.0, -1.0, 13.0 / 8.0, -13.0 / 8.0, 1.0, -1.0 / 8.0],
            STEP.powi(3),
        ),
        4 => (
            &[-3, -2, -1, 0, 1, 2, 3],
            &[
                -1.0 / 6.0,
                2.0,
                -39.0 / 6.0,
                56.0 / 6.0,
                -39.0 / 6.0,
                2.0,
                -1.0 / 6.0,
            ],
            STEP.powi(4),
        ),
        _ => unreachable!("stencils exist up to order 4"),
    }
}

/// Highest order the stencils support.
pub const MAX_FLATNESS: u32 = 4;

/// Finite-difference estimate of `d^i/dx^i d^j/dv^j f` at the eye center.
pub fn partial_at_center(f: &Observable, i: usize, j: usize) -> f64 {
    let (ox, wx, dx) = stencil(i);
    let (ov, wv, dv) = stencil(j);
    let mut sum = 0.0;
    for (a, wa) in ox.iter().zip(wx) {
        for (b, wb) in ov.iter().zip(wv) {
            sum += wa * wb * f.eval(*a as f64 * STEP, *b as f64 * STEP);
        }
    }
    sum / (dx * dv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessCheck {
    pub order: u32,
    /// Largest derivative of orders `1..=order` at the eye center.
    pub max_derivative: f64,
}

/// Checks that every derivative of `f` of order `1..=order` vanishes at the
/// eye center.
pub fn verify_flatness(f: &Observable, order: u32) -> Result<FlatnessCheck> {
    if order > MAX_FLATNESS {
        return Err(Error::Domain(format!(
            "flatness can be verified up to order {MAX_FLATNESS}, not {order}"
        )));
    }
    let mut max_derivative: f64 = 0.0;
    for k in 1..=order as usize {
        for i in 0..=k {
            max_derivative = max_derivative.max(partial_at_center(f, i, k - i).abs());
        }
    }
    if max_derivative > FLATNESS_TOL {
        return Err(Error::Precondition(format!(
            "'{}' is declared flat to order {order} but a derivative of size {max_derivative:e} remains",
            f.name()
        )));
    }
    Ok(FlatnessCheck { order, max_derivative })
}
