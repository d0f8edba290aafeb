//! The experiments behind the `hmf` subcommands: each one writes its files
//! into an output directory and returns a JSON report.

use crate::actionangle::{Observable, SpectralTable};
use crate::config::{DispersionCase, RunConfig};
use crate::damping::{
    dispersion_run, kernel_decay, linear_damping_run, presets, scattering_state, DampingReport, RateFit,
};
use crate::elliptic::checks::{bessel_inequality_suite, identity_suite, Check};
use crate::equilibria::{
    gaussian_sufficient_bessel, solve_magnetization, stability_indicator, stability_sufficient, Profile,
    StationaryState,
};
use crate::error::{Error, Result};
use crate::volterra::{kernel_series, penrose_scan, PenroseSummary, TimeGrid};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Largest accepted self-consistency residual of the magnetization.
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Ellcheck,
    Equilibrium,
    Spectral,
    Kernels,
    Penrose,
    Damp,
    Dispersion,
    Scatter,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Ellcheck,
        Experiment::Equilibrium,
        Experiment::Spectral,
        Experiment::Kernels,
        Experiment::Penrose,
        Experiment::Damp,
        Experiment::Dispersion,
        Experiment::Scatter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Ellcheck => "ellcheck",
            Experiment::Equilibrium => "equilibrium",
            Experiment::Spectral => "spectral",
            Experiment::Kernels => "kernels",
            Experiment::Penrose => "penrose",
            Experiment::Damp => "damp",
            Experiment::Dispersion => "dispersion",
            Experiment::Scatter => "scatter",
        }
    }

    /// Stem of the JSON report file.
    pub fn report_name(self) -> &'static str {
        match self {
            Experiment::Damp => "damping",
            Experiment::Scatter => "scattering",
            other => other.name(),
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Result of one experiment.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    /// Files written, the JSON report last.
    pub files: Vec<PathBuf>,
    /// The JSON report, including the resolved configuration under `config`.
    pub report: Value,
}

pub fn run_experiment(experiment: Experiment, config: &RunConfig, out: &Path) -> Result<Outcome> {
    config.validate()?;
    std::fs::create_dir_all(out)?;
    let mut files = Vec::new();
    let (pass, body) = match experiment {
        Experiment::Ellcheck => ellcheck(config)?,
        Experiment::Equilibrium => equilibrium(config)?,
        Experiment::Spectral => spectral(config, out, &mut files)?,
        Experiment::Kernels => kernels(config, out, &mut files)?,
        Experiment::Penrose => penrose(config, out, &mut files)?,
        Experiment::Damp => damp(config, out, &mut files)?,
        Experiment::Dispersion => dispersion(config, out, &mut files)?,
        Experiment::Scatter => scatter(config, out, &mut files)?,
    };
    let mut report = match body {
        Value::Object(map) => map,
        other => [("result".to_string(), other)].into_iter().collect(),
    };
    report.insert("pass".into(), Value::Bool(pass));
    report.insert("config".into(), serde_json::to_value(config).map_err(json_error)?);
    let report = Value::Object(report);
    let path = out.join(format!("{}.json", experiment.report_name()));
    let text = serde_json::to_string_pretty(&report).map_err(json_error)?;
    std::fs::write(&path, text + "\n")?;
    files.push(path);
    Ok(Outcome { pass, files, report })
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Io(e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(json_error)
}

pub fn stationary_state(config: &RunConfig) -> Result<StationaryState> {
    solve_magnetization(&config.state.profile()?, config.state.zeta)
}

pub fn spectral_table(config: &RunConfig, state: &StationaryState, observables: &[Observable]) -> Result<SpectralTable> {
    SpectralTable::build(state, observables, &config.grid)
}

fn ellcheck(config: &RunConfig) -> Result<(bool, Value)> {
    let e = &config.ellcheck;
    let mut checks = identity_suite(e.grid)?;
    checks.extend(bessel_inequality_suite(e.bessel_order, e.bessel_samples)?);
    Ok((checks.iter().all(|c| c.pass), json!({ "checks": checks })))
}

/// Plain-text table of the `ellcheck` report.
pub fn check_table(checks: &[Check]) -> String {
    let mut text = format!("{:<30} {:>12} {:>12}  result\n", "check", "worst", "tolerance");
    for c in checks {
        text += &format!(
            "{:<30} {:>12.3e} {:>12.3e}  {}\n",
            c.name,
            c.worst,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    text
}

fn equilibrium(config: &RunConfig) -> Result<(bool, Value)> {
    let state = stationary_state(config)?;
    let table = spectral_table(config, &state, &[])?;
    let indicator = stability_indicator(&state, &table)?;
    let sufficient = stability_sufficient(&state)?;
    let bessel = match state.profile {
        Profile::Gaussian { .. } => Some(gaussian_sufficient_bessel(&state)?),
        Profile::Fermi { .. } => None,
    };
    let pass = state.residual.abs() < RESIDUAL_TOL && indicator > 0.0 && sufficient > 0.0;
    Ok((
        pass,
        json!({
            "M0": state.m0,
            "residual": state.residual,
            "indicator": indicator,
            "sufficient": sufficient,
            "sufficient_bessel": bessel,
            "conditions": state.conditions,
            "profile": state.profile.label(),
        }),
    ))
}

fn spectral(config: &RunConfig, out: &Path, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let state = stationary_state(config)?;
    let table = spectral_table(config, &state, &[])?;
    files.extend(table.write_csv(out)?);
    let defect = table.max_parseval_defect();
    Ok((
        defect < config.grid.parseval_tol,
        json!({
            "M0": state.m0,
            "nodes": table.node_count(),
            "max_parseval_defect": defect,
            "fingerprint": table.fingerprint(),
        }),
    ))
}

fn time_grid(config: &RunConfig) -> Result<TimeGrid> {
    TimeGrid::new(config.time.dt, config.time.t_final)
}

fn kernels(config: &RunConfig, out: &Path, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let state = stationary_state(config)?;
    let table = spectral_table(config, &state, &[])?;
    let series = kernel_series(&state, &table, &time_grid(config)?)?;
    let path = out.join("kernels.csv");
    series.write_csv(&path)?;
    files.push(path);
    let decay = kernel_decay(&series, config.time.window, [config.kernels.tol_c, config.kernels.tol_s])?;
    let mut body = to_json(&decay)?;
    body["q0"] = json!(series.q0);
    body["tail"] = json!(series.tail);
    Ok((decay.pass, body))
}

fn scan(config: &RunConfig, state: &StationaryState, table: &SpectralTable) -> Result<PenroseSummary> {
    Ok(penrose_scan(state, table, &config.penrose)?.summary())
}

fn penrose(config: &RunConfig, out: &Path, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let state = stationary_state(config)?;
    let table = spectral_table(config, &state, &[])?;
    let scan = penrose_scan(&state, &table, &config.penrose)?;
    let path = out.join("penrose.csv");
    scan.write_csv(&path)?;
    files.push(path);
    let summary = scan.summary();
    Ok((summary.pass, to_json(&summary)?))
}

fn damping_run(config: &RunConfig) -> Result<(StationaryState, SpectralTable, Observable, DampingReport)> {
    let state = stationary_state(config)?;
    let r0 = presets::damping_bump();
    let table = spectral_table(config, &state, std::slice::from_ref(&r0))?;
    let penrose = scan(config, &state, &table)?;
    let report = linear_damping_run(&state, &table, &r0, &penrose, &config.damping_config())?;
    Ok((state, table, r0, report))
}

fn damp(config: &RunConfig, out: &Path, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let (_, _, _, report) = damping_run(config)?;
    let path = out.join("damping.csv");
    report.write_csv(&path)?;
    files.push(path);
    Ok((report.pass, to_json(&report.summary(&config.damping_config()))?))
}

#[derive(Serialize)]
struct DispersionSummary<'a> {
    f: &'a str,
    phi: &'a str,
    p: u32,
    q: u32,
    limit: f64,
    slope: RateFit,
    target: f64,
    tolerance: f64,
    envelope_monotone: bool,
}

fn dispersion(config: &RunConfig, out: &Path, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let state = stationary_state(config)?;
    let (f, phi) = match config.dispersion.case {
        DispersionCase::Bumps => presets::bump_pair(),
        DispersionCase::FlatCos => (presets::flat_quadratic(), Observable::cos_x()),
    };
    crate::damping::verify_flatness(&f, f.meta().flatness)?;
    let table = spectral_table(config, &state, &[f.clone(), phi.clone()])?;
    let report = dispersion_run(&table, &f, &phi, &config.dispersion_config())?;
    let path = out.join("dispersion.csv");
    report.write_csv(&path)?;
    files.push(path);
    let summary = DispersionSummary {
        f: &report.f,
        phi: &report.phi,
        p: report.p,
        q: report.q,
        limit: report.limit,
        slope: report.fit,
        target: report.target,
        tolerance: config.dispersion.tolerance,
        envelope_monotone: report.envelope_monotone,
    };
    Ok((report.pass, to_json(&summary)?))
}

fn scatter(config: &RunConfig, out: &Path, files: &mut Vec<PathBuf>) -> Result<(bool, Value)> {
    let (state, table, r0, report) = damping_run(config)?;
    let result = scattering_state(&state, &report, &r0, &table, &config.scattering_config())?;
    for (name, write) in [
        ("scattering.csv", crate::damping::ScatteringResult::write_csv as fn(&_, &Path) -> Result<()>),
        ("scattering_distance.csv", crate::damping::ScatteringResult::write_distance_csv),
    ] {
        let path = out.join(name);
        write(&result, &path)?;
        files.push(path);
    }
    let summary = result.summary();
    Ok((summary.pass, to_json(&summary)?))
}
