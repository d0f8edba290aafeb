use super::fit::{fit_algebraic_rate, FitWindow, RateFit};
use crate::actionangle::{Observable, SpectralTable};
use crate::error::{Error, Result};
use crate::volterra::{harmonic_sums, Harmonics, TimeGrid};
use serde::{Deserialize, Serialize};

/// Largest tolerated weight of the last stored harmonic in a pairing.
const TRUNCATION_TOL: f64 = 1e-9;

/// Pairing of `f` with `phi` transported by the flow for a time `t`.
pub fn dispersion_pairing(table: &SpectralTable, f: &str, phi: &str, t: f64) -> Result<f64> {
    check_truncation(table, f, phi)?;
    table.pairing(f, phi, t)
}

fn check_truncation(table: &SpectralTable, f: &str, phi: &str) -> Result<()> {
    let (i, j) = (table.row_index(f)?, table.row_index(phi)?);
    let l = table.l_max();
    let tail: f64 = table
        .nodes()
        .map(|(_, n)| n.da * (n.rows[i][l] * n.rows[j][l]).norm())
        .sum();
    if tail > TRUNCATION_TOL {
        return Err(Error::Truncation {
            tail,
            tol: TRUNCATION_TOL,
        });
    }
    Ok(())
}

/// The pairing on every time of `grid`.
pub fn dispersion_series(table: &SpectralTable, f: &str, phi: &str, grid: &TimeGrid) -> Result<Vec<f64>> {
    check_truncation(table, f, phi)?;
    let (i, j) = (table.row_index(f)?, table.row_index(phi)?);
    let items: Vec<Harmonics<1>> = table
        .nodes()
        .map(|(_, n)| Harmonics {
            omega: n.omega,
            coeffs: (0..=n.l_eff)
                .map(|l| {
                    let factor = if l == 0 { n.da } else { 2.0 * n.da };
                    [n.rows[i][l] * n.rows[j][l].conj() * factor]
                })
                .collect(),
        })
        .collect();
    let [values] = harmonic_sums(grid, &items);
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub window: FitWindow,
    pub tolerance: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            t_final: 200.0,
            window: FitWindow::default(),
            tolerance: 0.3,
        }
    }
}

/// Decay of `pairing(t) - limit` for one pair of observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub f: String,
    pub phi: String,
    pub p: u32,
    pub q: u32,
    pub grid: TimeGrid,
    pub pairing: Vec<f64>,
    pub limit: f64,
    pub fit: RateFit,
    pub target: f64,
    /// Maxima of `|pairing - limit|` over consecutive blocks of the window
    /// never increase.
    pub envelope_monotone: bool,
    pub pass: bool,
}

/// Block length, in time units, of the envelope monotonicity check.
const ENVELOPE_BLOCK: f64 = 20.0;

pub fn dispersion_run(
    table: &SpectralTable,
    f: &Observable,
    phi: &Observable,
    config: &DispersionConfig,
) -> Result<DispersionReport> {
    config.window.validate()?;
    let grid = TimeGrid::new(config.dt, config.t_final)?;
    let pairing = dispersion_series(table, f.name(), phi.name(), &grid)?;
    let limit = table.limit_functional(f.name(), phi.name())?;
    let times: Vec<f64> = grid.times().collect();
    let gap: Vec<f64> = pairing.iter().map(|v| v - limit).collect();
    let fit = fit_algebraic_rate(&times, &gap, config.window)?;
    let (p, q) = (f.meta().flatness, phi.meta().flatness);
    let target = -((p + q) as f64 / 2.0 + 2.0);

    let mut maxima = Vec::new();
    let mut start = config.window.start;
    while start < config.window.end {
        let end = (start + ENVELOPE_BLOCK).min(config.window.end);
        let block = times
            .iter()
            .zip(&gap)
            .filter(|(t, _)| **t >= start && **t < end)
            .map(|(_, g)| g.abs())
            .fold(0.0, f64::max);
        maxima.push(block);
        start = end;
    }
    let envelope_monotone = maxima.windows(2).all(|w| w[1] <= w[0]);
    Ok(DispersionReport {
        f: f.name().to_string(),
        phi: phi.name().to_string(),
        p,
        q,
        grid,
        pass: fit.within(target, config.tolerance),
        pairing,
        limit,
        fit,
        target,
        envelope_monotone,
    })
}

impl DispersionReport {
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# pairing of {} with {} along the flow, limit={}", self.f, self.phi, self.limit)?;
        writeln!(out, "t,pairing,gap")?;
        for (n, v) in self.pairing.iter().enumerate() {
            writeln!(out, "{},{},{}", self.grid.t(n), v, v - self.limit)?;
        }
        out.flush()?;
        Ok(())
    }
}
