use crate::actionangle::{Chart, CoefficientRows, SpectralTable};
use crate::equilibria::StationaryState;
use crate::error::{Error, Result};
use crate::volterra::check_table;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Overlaps below this size leave the projection undefined.
const DEGENERATE_OVERLAP: f64 = 1e-12;

/// Bump in the energy supported on `(-0.9 M0, -0.1 M0)`, inside the eye and
/// away from both its center and the separatrix.
pub fn projection_profile(m0: f64, h: f64) -> f64 {
    let s = (h + 0.5 * m0) / (0.4 * m0);
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// `sum over charts of int C_0 f_0 da`, which must vanish for damping.
pub fn orthogonality_defect(table: &SpectralTable, rows: &CoefficientRows) -> f64 {
    let mut total = 0.0;
    for (chart_rows, chart) in rows.charts.iter().zip(table.charts()) {
        for (row, node) in chart_rows.iter().zip(&chart.nodes) {
            total += node.da * node.cos[0] * row[0].re;
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub rows: CoefficientRows,
    /// Multiple of the profile removed from the angle averages.
    pub coefficient: f64,
    pub defect_before: f64,
    pub defect_after: f64,
}

/// Removes from the angle averages of the data the multiple of
/// [`projection_profile`] that cancels the orthogonality defect.
pub fn orthogonal_projection(
    state: &StationaryState,
    table: &SpectralTable,
    rows: &CoefficientRows,
) -> Result<Projection> {
    check_table(state, table, None)?;
    let m0 = state.m0;
    let defect_before = orthogonality_defect(table, rows);
    let mut overlap = 0.0;
    for chart in table.charts().iter().filter(|c| c.chart == Chart::Eye) {
        for node in &chart.nodes {
            overlap += node.da * node.cos[0] * projection_profile(m0, node.h);
        }
    }
    if overlap.abs() < DEGENERATE_OVERLAP {
        return Err(Error::Projection { overlap });
    }
    let coefficient = defect_before / overlap;
    let mut projected = rows.clone();
    if coefficient != 0.0 {
        for (chart_rows, chart) in projected.charts.iter_mut().zip(table.charts()) {
            if chart.chart != Chart::Eye {
                continue;
            }
            for (row, node) in chart_rows.iter_mut().zip(&chart.nodes) {
                row[0] -= Complex64::new(coefficient * projection_profile(m0, node.h), 0.0);
            }
        }
    }
    let defect_after = orthogonality_defect(table, &projected);
    Ok(Projection {
        rows: projected,
        coefficient,
        defect_before,
        defect_after,
    })
}

/// Summary of a projection for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSummary {
    pub coefficient: f64,
    pub defect_before: f64,
    pub defect_after: f64,
}

impl Projection {
    pub fn summary(&self) -> ProjectionSummary {
        ProjectionSummary {
            coefficient: self.coefficient,
            defect_before: self.defect_before,
            defect_after: self.defect_after,
        }
    }
}
