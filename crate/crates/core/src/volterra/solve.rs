use super::{same_grid, Series, TimeGrid};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smallest accepted `|1 - dt K(0) / 2|`.
const MIN_DENOMINATOR: f64 = 1e-8;

/// Solution of `y(t) = F(t) + int_0^t K(t - s) y(s) ds` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraSolution {
    pub grid: TimeGrid,
    pub y: Vec<f64>,
    pub source: Vec<f64>,
    /// Resolvent kernel, when requested.
    pub resolvent: Option<Vec<f64>>,
    /// Relative defect of the discrete equation at every step.
    pub residuals: Vec<f64>,
}

impl VolterraSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(*r))
    }

    pub fn series(&self) -> Series {
        Series {
            grid: self.grid,
            values: self.y.clone(),
        }
    }
}

/// Product-trapezoid stepping for `y = f + k * y`. Returns the solution and
/// the per-step relative residuals.
fn march(k: &[f64], f: &[f64], dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n_total = f.len();
    let denominator = 1.0 - 0.5 * dt * k[0];
    if denominator.abs() < MIN_DENOMINATOR {
        return Err(Error::Stability { step: 0, denominator });
    }
    let mut y = Vec::with_capacity(n_total);
    let mut residuals = Vec::with_capacity(n_total);
    y.push(f[0]);
    residuals.push(0.0);
    for n in 1..n_total {
        // Explicit part: w_{n0} = dt/2, w_{nj} = dt for 0 < j < n.
        let mut history = 0.5 * k[n] * y[0];
        for j in 1..n {
            history += k[n - j] * y[j];
        }
        history *= dt;
        let value = (f[n] + history) / denominator;
        let defect = value - f[n] - history - 0.5 * dt * k[0] * value;
        let scale = value.abs().max(f[n].abs()).max(history.abs()).max(f64::MIN_POSITIVE);
        if !value.is_finite() {
            return Err(Error::Divergence(format!("Volterra solution blew up at step {n}")));
        }
        y.push(value);
        residuals.push(defect.abs() / scale);
    }
    Ok((y, residuals))
}

/// Solves `y(t) = F(t) + int_0^t y(s) K(t - s) ds` by product trapezoid.
pub fn solve_volterra(kernel: &Series, source: &Series) -> Result<VolterraSolution> {
    same_grid(&kernel.grid, &source.grid)?;
    let (y, residuals) = march(&kernel.values, &source.values, kernel.grid.dt())?;
    Ok(VolterraSolution {
        grid: kernel.grid,
        y,
        source: source.values.clone(),
        resolvent: None,
        residuals,
    })
}

/// The resolvent `R = -K + K * R`, so that `y = F - R * F`.
pub fn resolvent_kernel(kernel: &Series) -> Result<Series> {
    let minus_k: Vec<f64> = kernel.values.iter().map(|k| -k).collect();
    let (r, _) = march(&kernel.values, &minus_k, kernel.grid.dt())?;
    Ok(Series {
        grid: kernel.grid,
        values: r,
    })
}

/// `F - R * F` with the trapezoid rule for the convolution.
pub fn reconstruct_with_resolvent(resolvent: &Series, source: &Series) -> Result<Series> {
    same_grid(&resolvent.grid, &source.grid)?;
    let dt = source.grid.dt();
    let (r, f) = (&resolvent.values, &source.values);
    let values = (0..f.len())
        .map(|n| {
            if n == 0 {
                return f[0];
            }
            let mut conv = 0.5 * (r[n] * f[0] + r[0] * f[n]);
            for j in 1..n {
                conv += r[n - j] * f[j];
            }
            f[n] - dt * conv
        })
        .collect();
    Ok(Series {
        grid: source.grid,
        values,
    })
}

impl VolterraSolution {
    /// Attaches the resolvent of `kernel` to the solution.
    pub fn with_resolvent(mut self, kernel: &Series) -> Result<Self> {
        same_grid(&kernel.grid, &self.grid)?;
        self.resolvent = Some(resolvent_kernel(kernel)?.values);
        Ok(self)
    }
}
