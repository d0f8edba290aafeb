use super::evolution::Evolution;
use super::fit::{fit_algebraic_rate, FitWindow, RateFit};
use super::flatness::{verify_flatness, FlatnessCheck};
use super::projection::{orthogonal_projection, orthogonality_defect, ProjectionSummary};
use crate::actionangle::{CoefficientRows, Observable, SpectralTable};
use crate::equilibria::StationaryState;
use crate::error::{Error, Result};
use crate::volterra::{
    kernel_series, solve_volterra, source_series, PenroseSummary, Series, TimeGrid, VolterraSolution,
};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Largest orthogonality defect accepted before and along a run.
pub const DEFECT_TOL: f64 = 1e-8;

/// Time at which conservation of the defect is checked besides the final time.
const EARLY_CHECK: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DampingConfig {
    pub dt: f64,
    pub t_final: f64,
    pub window: FitWindow,
    /// Remove the component along the projection profile first.
    pub project: bool,
    /// Accepted distance of the fitted slopes of `C` and `S` from their targets.
    pub tol_c: f64,
    pub tol_s: f64,
}

impl Default for DampingConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            t_final: 200.0,
            window: FitWindow::default(),
            project: true,
            tol_c: 0.5,
            tol_s: 0.3,
        }
    }
}

impl DampingConfig {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if self.window.end > self.t_final * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "fit window ends at {} after the final time {}",
                self.window.end, self.t_final
            )));
        }
        if !(self.tol_c > 0.0 && self.tol_s > 0.0) {
            return Err(Error::Config("damping tolerances must be positive".into()));
        }
        TimeGrid::new(self.dt, self.t_final).map(|_| ())
    }
}

/// Per-series values keyed like the report JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates<T> {
    #[serde(rename = "C")]
    pub c: T,
    #[serde(rename = "S")]
    pub s: T,
    #[serde(rename = "FC")]
    pub fc: T,
    #[serde(rename = "FS")]
    pub fs: T,
}

/// Decay exponents predicted for data of flatness `p`, as negative slopes.
pub fn rate_targets(p: u32) -> Rates<f64> {
    let p = p as f64;
    Rates {
        c: -(3f64).max((p + 5.0) / 2.0),
        s: -2.0,
        fc: -(p + 5.0) / 2.0,
        fs: -(p / 2.0 + 2.0),
    }
}

/// Outcome of a linear damping run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingReport {
    pub grid: TimeGrid,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub f_c: Vec<f64>,
    pub f_s: Vec<f64>,
    pub p: u32,
    pub flatness: FlatnessCheck,
    /// `None` for a series that vanishes identically on the window.
    pub slopes: Rates<Option<RateFit>>,
    pub targets: Rates<f64>,
    pub projection: ProjectionSummary,
    /// Largest defect of the evolved coefficients at the checked times.
    pub defect_along_run: f64,
    pub max_residual: f64,
    pub penrose: PenroseSummary,
    /// Fitted `|C|` decays at least as fast as fitted `|S|`.
    pub hierarchy: bool,
    pub pass: bool,
}

/// JSON form of a damping report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingSummary {
    pub p: u32,
    pub slopes: Rates<Option<RateFit>>,
    pub targets: Rates<f64>,
    pub tolerances: [f64; 2],
    pub pass: bool,
    pub penrose_ref: PenroseSummary,
    pub ortho_defect_before: f64,
    pub ortho_defect_after: f64,
    pub ortho_defect_along_run: f64,
    pub projection_coefficient: f64,
    pub max_flat_derivative: f64,
    pub max_residual: f64,
    pub hierarchy: bool,
}

impl DampingReport {
    pub fn summary(&self, config: &DampingConfig) -> DampingSummary {
        DampingSummary {
            p: self.p,
            slopes: self.slopes,
            targets: self.targets,
            tolerances: [config.tol_c, config.tol_s],
            pass: self.pass,
            penrose_ref: self.penrose.clone(),
            ortho_defect_before: self.projection.defect_before,
            ortho_defect_after: self.projection.defect_after,
            ortho_defect_along_run: self.defect_along_run,
            projection_coefficient: self.projection.coefficient,
            max_flat_derivative: self.flatness.max_derivative,
            max_residual: self.max_residual,
            hierarchy: self.hierarchy,
        }
    }

    pub fn c_series(&self) -> Series {
        Series {
            grid: self.grid,
            values: self.c.clone(),
        }
    }

    pub fn s_series(&self) -> Series {
        Series {
            grid: self.grid,
            values: self.s.clone(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# field components and sources, p={}", self.p)?;
        writeln!(out, "t,C,S,F_C,F_S")?;
        for n in 0..self.grid.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.grid.t(n),
                self.c[n],
                self.s[n],
                self.f_c[n],
                self.f_s[n]
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

fn fit_or_zero(grid: &TimeGrid, y: &[f64], window: FitWindow) -> Result<Option<RateFit>> {
    let times: Vec<f64> = grid.times().collect();
    let vanishes = times.iter().zip(y).all(|(t, v)| !window.contains(*t) || *v == 0.0);
    if vanishes {
        return Ok(None);
    }
    fit_algebraic_rate(&times, y, window).map(Some)
}

/// Solves the linearized dynamics for the data `r0`, a row of `table`, and
/// fits the decay of the field components.
pub fn linear_damping_run(
    state: &StationaryState,
    table: &SpectralTable,
    r0: &Observable,
    penrose: &PenroseSummary,
    config: &DampingConfig,
) -> Result<DampingReport> {
    config.validate()?;
    if !penrose.pass {
        return Err(Error::Precondition(
            "the Penrose scan of this state failed; damping is not expected".into(),
        ));
    }
    let p = r0.meta().flatness;
    let flatness = verify_flatness(r0, p)?;
    let grid = TimeGrid::new(config.dt, config.t_final)?;
    let raw = table.rows(r0.name())?;
    let (rows, projection) = if config.project {
        let proj = orthogonal_projection(state, table, &raw)?;
        let summary = proj.summary();
        (proj.rows, summary)
    } else {
        let defect = orthogonality_defect(table, &raw);
        (
            raw,
            ProjectionSummary {
                coefficient: 0.0,
                defect_before: defect,
                defect_after: defect,
            },
        )
    };
    let kernels = kernel_series(state, table, &grid)?;
    let sources = source_series(state, table, &rows, &grid)?;
    let c_run = solve_volterra(&kernels.kernel_c(), &sources.source_c())?;
    let s_run = solve_volterra(&kernels.kernel_s(), &sources.source_s())?;
    let defect_along_run = defect_along(table, &rows, &c_run, &s_run, config.t_final)?;

    let slopes = Rates {
        c: fit_or_zero(&grid, &c_run.y, config.window)?,
        s: fit_or_zero(&grid, &s_run.y, config.window)?,
        fc: fit_or_zero(&grid, &sources.f_c, config.window)?,
        fs: fit_or_zero(&grid, &sources.f_s, config.window)?,
    };
    let targets = rate_targets(p);
    let ok = |fit: &Option<RateFit>, target: f64, tol: f64| fit.is_none_or(|f| f.within(target, tol));
    let hierarchy = match (slopes.c, slopes.s) {
        (Some(c), Some(s)) => c.slope <= s.slope,
        _ => true,
    };
    let pass = ok(&slopes.c, targets.c, config.tol_c)
        && ok(&slopes.s, targets.s, config.tol_s)
        && projection.defect_after.abs() < DEFECT_TOL
        && defect_along_run < DEFECT_TOL;
    Ok(DampingReport {
        grid,
        max_residual: c_run.max_residual().max(s_run.max_residual()),
        c: c_run.y,
        s: s_run.y,
        f_c: sources.f_c,
        f_s: sources.f_s,
        p,
        flatness,
        slopes,
        targets,
        projection,
        defect_along_run,
        penrose: penrose.clone(),
        hierarchy,
        pass,
    })
}

fn defect_along(
    table: &SpectralTable,
    rows: &CoefficientRows,
    c: &VolterraSolution,
    s: &VolterraSolution,
    t_final: f64,
) -> Result<f64> {
    let (c, s) = (c.series(), s.series());
    let evolution = Evolution::new(table, rows, &c, &s)?;
    let dt = c.grid.dt();
    let early = ((EARLY_CHECK / dt).round() * dt).min(t_final);
    let mut worst: f64 = 0.0;
    for t in [early, t_final] {
        let g = evolution.coefficients_at(t)?;
        worst = worst.max(orthogonality_defect(table, &g).abs());
    }
    Ok(worst)
}
