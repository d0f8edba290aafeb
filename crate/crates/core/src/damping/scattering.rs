use super::evolution::Evolution;
use super::fit::{fit_algebraic_rate, FitWindow, RateFit};
use super::projection::{orthogonality_defect, projection_profile};
use super::run::DampingReport;
use crate::actionangle::{Chart, CoefficientRows, Observable, SpectralTable};
use crate::equilibria::StationaryState;
use crate::error::{Error, Result};
use crate::volterra::check_table;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

/// Field components below this size count as absent.
const NEGLIGIBLE_FIELD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringConfig {
    /// Log-spaced times of the distance fit inside the window.
    pub samples: usize,
    pub window: FitWindow,
    pub target: f64,
    pub tolerance: f64,
    /// Angles per orbit and orbit stride of the sampled scattering state.
    pub n_theta: usize,
    pub node_stride: usize,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        Self {
            samples: 20,
            window: FitWindow::default(),
            target: -1.0,
            tolerance: 0.3,
            n_theta: 32,
            node_stride: 16,
        }
    }
}

/// The scattering state on a sampled `(theta, a)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSample {
    pub chart: Chart,
    pub h: f64,
    pub a: f64,
    pub theta: f64,
    pub g_inf: f64,
    pub r_inf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    pub samples: Vec<StateSample>,
    /// Largest variance over the angle of the weak limit on a sampled orbit.
    pub theta_variance: f64,
    /// Largest gap between the angle average of the sampled scattering state
    /// and the angle average of the data.
    pub average_defect: f64,
    /// Weak limit tested against `cos x`; zero for orthogonal data.
    pub weak_limit_cos: f64,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub fit: RateFit,
    pub target: f64,
    pub pass: bool,
}

/// JSON form of a scattering result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSummary {
    pub slope: RateFit,
    pub target: f64,
    pub theta_variance: f64,
    pub average_defect: f64,
    pub weak_limit_cos: f64,
    pub pass: bool,
}

impl ScatteringResult {
    pub fn summary(&self) -> ScatteringSummary {
        ScatteringSummary {
            slope: self.fit,
            target: self.target,
            theta_variance: self.theta_variance,
            average_defect: self.average_defect,
            weak_limit_cos: self.weak_limit_cos,
            pass: self.pass,
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "chart,h,a,theta,g_inf,r_inf")?;
        for s in &self.samples {
            writeln!(out, "{},{},{},{},{},{}", s.chart, s.h, s.a, s.theta, s.g_inf, s.r_inf)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_distance_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "t,l1_distance")?;
        for (t, d) in self.times.iter().zip(&self.distances) {
            writeln!(out, "{t},{d}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Data rows as used by a damping run, including its projection.
pub fn projected_rows(
    state: &StationaryState,
    table: &SpectralTable,
    r0: &Observable,
    coefficient: f64,
) -> Result<CoefficientRows> {
    let mut rows = table.rows(r0.name())?;
    if coefficient != 0.0 {
        for (chart_rows, chart) in rows.charts.iter_mut().zip(table.charts()) {
            if chart.chart != Chart::Eye {
                continue;
            }
            for (row, node) in chart_rows.iter_mut().zip(&chart.nodes) {
                row[0] -= Complex64::new(coefficient * projection_profile(state.m0, node.h), 0.0);
            }
        }
    }
    Ok(rows)
}

fn decays(report: &DampingReport) -> Result<[f64; 2]> {
    let window = |fit: Option<crate::damping::RateFit>, y: &[f64]| -> Result<f64> {
        let size = report
            .grid
            .times()
            .zip(y)
            .filter(|(t, _)| *t >= report.grid.t_final() / 10.0)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max);
        match fit {
            Some(f) if f.slope < -1.0 => Ok(-f.slope),
            _ if size <= NEGLIGIBLE_FIELD => Ok(f64::INFINITY),
            Some(f) => Err(Error::Precondition(format!(
                "field decays like t^{:.2}, which is not integrable",
                f.slope
            ))),
            None => Ok(f64::INFINITY),
        }
    };
    Ok([window(report.slopes.c, &report.c)?, window(report.slopes.s, &report.s)?])
}

/// Scattering state and weak limit of the perturbation of a damping run.
pub fn scattering_state(
    state: &StationaryState,
    report: &DampingReport,
    r0: &Observable,
    table: &SpectralTable,
    config: &ScatteringConfig,
) -> Result<ScatteringResult> {
    check_table(state, table, None)?;
    config.window.validate()?;
    if config.samples < 3 || config.n_theta < 2 || config.node_stride == 0 {
        return Err(Error::Config("scattering needs samples >= 3, n_theta >= 2, node_stride >= 1".into()));
    }
    let decay = decays(report)?;
    let rows = projected_rows(state, table, r0, report.projection.coefficient)?;
    let (c, s) = (report.c_series(), report.s_series());
    let evolution = Evolution::new(table, &rows, &c, &s)?;
    let limit = evolution.scattering_coefficients(decay);

    let mut samples = Vec::new();
    let mut theta_variance: f64 = 0.0;
    let mut average_defect: f64 = 0.0;
    for (pos, chart) in table.charts().iter().enumerate() {
        for (i, node) in chart.nodes.iter().enumerate().step_by(config.node_stride) {
            let g = &limit.charts[pos][i];
            let values: Vec<f64> = (0..config.n_theta)
                .map(|j| {
                    let theta = -PI + 2.0 * PI * j as f64 / config.n_theta as f64;
                    let mut value = g[0].re;
                    for (l, gl) in g.iter().enumerate().skip(1) {
                        value += 2.0 * (gl * Complex64::from_polar(1.0, l as f64 * theta)).re;
                    }
                    value
                })
                .collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            // The weak limit is the angle average, constant along the orbit.
            let r_inf = vec![mean; values.len()];
            let variance = r_inf.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / r_inf.len() as f64;
            theta_variance = theta_variance.max(variance);
            average_defect = average_defect.max((mean - rows.charts[pos][i][0].re).abs());
            for (j, value) in values.iter().enumerate() {
                samples.push(StateSample {
                    chart: chart.chart,
                    h: node.h,
                    a: node.action,
                    theta: -PI + 2.0 * PI * j as f64 / config.n_theta as f64,
                    g_inf: *value,
                    r_inf: r_inf[j],
                });
            }
        }
    }

    let dt = report.grid.dt();
    let span = config.window.end / config.window.start;
    let mut times: Vec<f64> = (0..config.samples)
        .map(|k| {
            let t = config.window.start * span.powf(k as f64 / (config.samples - 1) as f64);
            ((t / dt).round() * dt).min(report.grid.t_final())
        })
        .collect();
    times.dedup();
    let distances = evolution.l1_distances(&times, decay)?;
    let fit = fit_algebraic_rate(&times, &distances, config.window)?;
    Ok(ScatteringResult {
        samples,
        theta_variance,
        average_defect,
        weak_limit_cos: orthogonality_defect(table, &rows),
        pass: fit.within(config.target, config.tolerance),
        times,
        distances,
        fit,
        target: config.target,
    })
}
