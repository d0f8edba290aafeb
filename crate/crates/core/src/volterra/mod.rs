//! Kernels and sources of the linearized dynamics, the Volterra equations
//! they feed, and the Penrose criterion on their Fourier-Laplace transforms.
//!
//! Transforms follow `F^(xi) = int F(t) exp(-i t xi) dt` with no `1/(2 pi)`
//! prefactor, for every quantity in this module.

pub(crate) mod nufft;
mod penrose;
mod solve;
mod spectral;

pub use penrose::{penrose_scan, PenroseConfig, PenroseScan, PenroseSummary};
pub use solve::{reconstruct_with_resolvent, resolvent_kernel, solve_volterra, VolterraSolution};
pub(crate) use spectral::{check_table, harmonic_sums, kernel_harmonics, Harmonics};
pub use spectral::{hat_kernel, kernel_series, source_series, HatKernel, HatValue, KernelSeries, SourceSeries};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest number of time steps accepted on a grid.
pub const MAX_STEPS: usize = 4_000_000;

/// Uniform time grid `t_n = n dt`, `n = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    /// Grid with step `dt` reaching `t_final` (rounded to a whole number of steps).
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite() && t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Domain(format!("time grid needs dt > 0 and T > 0 (dt={dt}, T={t_final})")));
        }
        let ratio = t_final / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::Domain(format!("T={t_final} is not a multiple of dt={dt}")));
        }
        if steps as usize > MAX_STEPS {
            return Err(Error::Domain(format!("{steps} steps exceed the limit {MAX_STEPS}")));
        }
        Ok(Self {
            dt,
            steps: steps as usize,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of nodes, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_final(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|n| self.t(n))
    }
}

/// Real samples on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Misuse(format!(
                "series has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: TimeGrid, f: F) -> Self {
        Self {
            grid,
            values: grid.times().map(f).collect(),
        }
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn same_grid(a: &TimeGrid, b: &TimeGrid) -> Result<()> {
    if a != b {
        return Err(Error::Misuse("series live on different time grids".into()));
    }
    Ok(())
}
