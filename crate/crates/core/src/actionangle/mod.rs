//! Action-angle atlas of the pendulum `h0 = v^2/2 - M0 cos x`.
//!
//! Phase space minus the separatrix splits into three charts: the rotating
//! orbits above and below the separatrix and the librating orbits inside the
//! eye. Each chart carries an angle `theta` in `(-pi, pi)` and an action `a`
//! in which the pendulum flow is `theta -> theta + t omega(a)`.

mod observable;
mod orbit;
mod table;

pub use observable::{Observable, ObservableMeta};
pub use orbit::{Orbit, OrbitSamples};
pub use table::{ChartTable, CoefficientRows, Panel, Segment, SpectralTable, TableConfig, TableNode};

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One of the three charts of the atlas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    OuterUpper,
    OuterLower,
    Eye,
}

impl Chart {
    pub const ALL: [Chart; 3] = [Chart::OuterUpper, Chart::OuterLower, Chart::Eye];

    /// Velocity sign of an outer chart; `+1` for the eye.
    pub fn sign(self) -> f64 {
        match self {
            Chart::OuterLower => -1.0,
            _ => 1.0,
        }
    }

    pub fn is_outer(self) -> bool {
        self != Chart::Eye
    }

    pub fn label(self) -> &'static str {
        match self {
            Chart::OuterUpper => "outer_upper",
            Chart::OuterLower => "outer_lower",
            Chart::Eye => "eye",
        }
    }
}

impl std::fmt::Display for Chart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A point `(x, v)` of the phase space, with `x` on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub v: f64,
}

impl PhasePoint {
    pub fn new(x: f64, v: f64) -> Self {
        Self { x, v }
    }
}

/// A point given in action-angle coordinates of one chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartCoordinates {
    pub chart: Chart,
    pub h: f64,
    pub theta: f64,
    pub action: f64,
    /// Energy modulus `sqrt((h + M0) / (2 M0))`.
    pub k: f64,
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// The pendulum with magnetization `M0` and a separatrix exclusion band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pendulum {
    m0: f64,
    separatrix_cutoff: f64,
}

impl Pendulum {
    /// Relative half-width of the excluded band around the separatrix.
    pub const DEFAULT_SEPARATRIX_CUTOFF: f64 = 1e-10;

    pub fn new(m0: f64) -> Result<Self> {
        if !(m0 > 0.0 && m0.is_finite()) {
            return Err(Error::Domain(format!("magnetization {m0} must be positive")));
        }
        Ok(Self {
            m0,
            separatrix_cutoff: Self::DEFAULT_SEPARATRIX_CUTOFF,
        })
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff < 1.0) {
            return Err(Error::Domain(format!("separatrix cutoff {cutoff} not in (0, 1)")));
        }
        self.separatrix_cutoff = cutoff;
        Ok(self)
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn separatrix_cutoff(&self) -> f64 {
        self.separatrix_cutoff
    }

    pub fn energy(&self, pt: PhasePoint) -> f64 {
        0.5 * pt.v * pt.v - self.m0 * pt.x.cos()
    }

    /// Chart containing `pt` and its energy.
    pub fn classify(&self, pt: PhasePoint) -> Result<(Chart, f64)> {
        let h = self.energy(pt);
        let distance = (h - self.m0).abs();
        if distance <= self.separatrix_cutoff * self.m0 {
            return Err(Error::Separatrix { distance });
        }
        let chart = if h < self.m0 {
            Chart::Eye
        } else if pt.v > 0.0 {
            Chart::OuterUpper
        } else {
            Chart::OuterLower
        };
        Ok((chart, h))
    }

    fn check_energy(&self, h: f64) -> Result<()> {
        let distance = (h - self.m0).abs();
        if distance <= self.separatrix_cutoff * self.m0 {
            return Err(Error::Separatrix { distance });
        }
        Ok(())
    }

    pub fn orbit(&self, chart: Chart, h: f64) -> Result<Orbit> {
        self.check_energy(h)?;
        Orbit::new(chart, self.m0, h)
    }

    pub fn frequency(&self, chart: Chart, h: f64) -> Result<f64> {
        Ok(self.orbit(chart, h)?.omega())
    }

    pub fn action(&self, chart: Chart, h: f64) -> Result<f64> {
        Ok(self.orbit(chart, h)?.action())
    }

    pub fn coordinates(&self, chart: Chart, h: f64, theta: f64) -> Result<ChartCoordinates> {
        let orbit = self.orbit(chart, h)?;
        Ok(ChartCoordinates {
            chart,
            h,
            theta,
            action: orbit.action(),
            k: orbit.energy_modulus(),
        })
    }

    pub fn to_cartesian(&self, c: &ChartCoordinates) -> Result<PhasePoint> {
        if !(c.theta.abs() <= PI) {
            return Err(Error::Domain(format!("angle {} outside [-pi, pi]", c.theta)));
        }
        self.orbit(c.chart, c.h)?.point(c.theta)
    }

    /// Inverse of [`Pendulum::to_cartesian`].
    pub fn to_action_angle(&self, pt: PhasePoint) -> Result<ChartCoordinates> {
        let (chart, h) = self.classify(pt)?;
        let orbit = Orbit::new(chart, self.m0, h)?;
        Ok(ChartCoordinates {
            chart,
            h,
            theta: orbit.angle_of(pt)?,
            action: orbit.action(),
            k: orbit.energy_modulus(),
        })
    }

    /// Angle-Fourier coefficient of `f` on the orbit `(chart, h)`.
    pub fn fourier_coefficient(&self, f: &Observable, chart: Chart, l: i64, h: f64) -> Result<Complex64> {
        self.orbit(chart, h)?.fourier_coefficient(f, l)
    }
}
