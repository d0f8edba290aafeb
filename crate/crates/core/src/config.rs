//! Configuration of command-line runs.
//!
//! Files use TOML with section-prefixed keys (`state.alpha = 0.3`); every
//! key is optional and unknown keys are rejected. The accepted keys are
//! listed in `config/schema.toml`.

use crate::actionangle::TableConfig;
use crate::damping::{DampingConfig, DispersionConfig, FitWindow, ScatteringConfig};
use crate::equilibria::Profile;
use crate::error::{Error, Result};
use crate::volterra::{PenroseConfig, TimeGrid};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Documented schema, with every key at its default value.
pub const SCHEMA: &str = include_str!("../config/schema.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Gaussian,
    Fermi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StateConfig {
    pub profile: ProfileKind,
    pub alpha: f64,
    pub beta: f64,
    /// End of the root bracket; chosen from the profile when absent.
    pub zeta: Option<f64>,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            profile: ProfileKind::Gaussian,
            alpha: 0.3,
            beta: 4.0,
            zeta: None,
        }
    }
}

impl StateConfig {
    pub fn profile(&self) -> Result<Profile> {
        match self.profile {
            ProfileKind::Gaussian => Profile::gaussian(self.alpha, self.beta),
            ProfileKind::Fermi => Profile::fermi(self.alpha, self.beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_final: f64,
    pub window: FitWindow,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            t_final: 200.0,
            window: FitWindow::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelsConfig {
    pub tol_c: f64,
    pub tol_s: f64,
}

impl Default for KernelsConfig {
    fn default() -> Self {
        Self { tol_c: 0.4, tol_s: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DampSection {
    pub project: bool,
    pub tol_c: f64,
    pub tol_s: f64,
}

impl Default for DampSection {
    fn default() -> Self {
        let d = DampingConfig::default();
        Self {
            project: d.project,
            tol_c: d.tol_c,
            tol_s: d.tol_s,
        }
    }
}

/// Pair of observables of a dispersion run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionCase {
    /// Two generic bumps.
    Bumps,
    /// A function flat to second order against `cos x`.
    FlatCos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionSection {
    pub case: DispersionCase,
    pub tolerance: f64,
}

impl Default for DispersionSection {
    fn default() -> Self {
        Self {
            case: DispersionCase::Bumps,
            tolerance: DispersionConfig::default().tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterSection {
    pub samples: usize,
    pub target: f64,
    pub tolerance: f64,
    pub n_theta: usize,
    pub node_stride: usize,
}

impl Default for ScatterSection {
    fn default() -> Self {
        let s = ScatteringConfig::default();
        Self {
            samples: s.samples,
            target: s.target,
            tolerance: s.tolerance,
            n_theta: s.n_theta,
            node_stride: s.node_stride,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EllcheckConfig {
    /// Side of the `(u, k)` grid.
    pub grid: usize,
    pub bessel_order: u32,
    pub bessel_samples: usize,
}

impl Default for EllcheckConfig {
    fn default() -> Self {
        Self {
            grid: 50,
            bessel_order: 5,
            bessel_samples: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

/// Every setting of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub state: StateConfig,
    pub grid: TableConfig,
    pub time: TimeConfig,
    pub penrose: PenroseConfig,
    pub kernels: KernelsConfig,
    pub damping: DampSection,
    pub dispersion: DispersionSection,
    pub scatter: ScatterSection,
    pub ellcheck: EllcheckConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parses a configuration and applies `key=value` overrides on top.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let config: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("{}\nvalid keys:\n{SCHEMA}", e.message())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::parse(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.state.profile()?;
        if self.state.zeta.is_some_and(|z| !(z > 0.0)) {
            return Err(Error::Config("state.zeta must be positive".into()));
        }
        self.grid.validate()?;
        TimeGrid::new(self.time.dt, self.time.t_final)?;
        self.time.window.validate()?;
        if self.time.window.end > self.time.t_final * (1.0 + 1e-12) {
            return Err(Error::Config("time.window must lie inside (0, time.t_final]".into()));
        }
        self.penrose.validate()?;
        let positive = [
            ("kernels.tol_c", self.kernels.tol_c),
            ("kernels.tol_s", self.kernels.tol_s),
            ("damping.tol_c", self.damping.tol_c),
            ("damping.tol_s", self.damping.tol_s),
            ("dispersion.tolerance", self.dispersion.tolerance),
            ("scatter.tolerance", self.scatter.tolerance),
        ];
        if let Some((key, _)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::Config(format!("{key} must be positive")));
        }
        if self.ellcheck.grid < 2 || self.ellcheck.bessel_samples == 0 || self.ellcheck.bessel_order > 9 {
            return Err(Error::Config("ellcheck: need grid >= 2, bessel_samples >= 1, bessel_order <= 9".into()));
        }
        self.damping_config().validate()?;
        Ok(())
    }

    pub fn damping_config(&self) -> DampingConfig {
        DampingConfig {
            dt: self.time.dt,
            t_final: self.time.t_final,
            window: self.time.window,
            project: self.damping.project,
            tol_c: self.damping.tol_c,
            tol_s: self.damping.tol_s,
        }
    }

    pub fn dispersion_config(&self) -> DispersionConfig {
        DispersionConfig {
            dt: self.time.dt,
            t_final: self.time.t_final,
            window: self.time.window,
            tolerance: self.dispersion.tolerance,
        }
    }

    pub fn scattering_config(&self) -> ScatteringConfig {
        ScatteringConfig {
            samples: self.scatter.samples,
            window: self.time.window,
            target: self.scatter.target,
            tolerance: self.scatter.tolerance,
            n_theta: self.scatter.n_theta,
            node_stride: self.scatter.node_stride,
        }
    }
}

/// Sets a dotted key; the value is read as a TOML value and taken as a
/// plain string when that fails.
fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{item}' is not of the form key=value")))?;
    let (key, raw) = (key.trim(), raw.trim());
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key '{key}' is malformed")));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override key '{key}' passes through a value")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
