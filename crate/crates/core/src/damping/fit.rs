use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Closed time interval on which an algebraic rate is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitWindow {
    pub start: f64,
    pub end: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            start: 20.0,
            end: 200.0,
        }
    }
}

impl FitWindow {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        let w = Self { start, end };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.end > self.start && self.end.is_finite()) {
            return Err(Error::Config(format!(
                "fit window needs 0 < start < end (got [{}, {}])",
                self.start, self.end
            )));
        }
        Ok(())
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

/// Least-squares slope of `log|y|` against `log t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    /// Two standard errors of the slope.
    pub halfwidth: f64,
    pub window: FitWindow,
    pub points: usize,
}

impl RateFit {
    /// Whether `slope` lies within `tol` of `target`.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.slope - target).abs() <= tol
    }
}

/// Fits `|y| ~ t^slope` on the samples with `t` inside `window`.
pub fn fit_algebraic_rate(t: &[f64], y: &[f64], window: FitWindow) -> Result<RateFit> {
    window.validate()?;
    if t.len() != y.len() {
        return Err(Error::Misuse(format!("{} times for {} values", t.len(), y.len())));
    }
    let mut pts = Vec::new();
    for (&t, &y) in t.iter().zip(y) {
        if !window.contains(t) {
            continue;
        }
        let magnitude = y.abs();
        if !(magnitude > 0.0 && magnitude.is_finite()) {
            return Err(Error::Windowing { t });
        }
        pts.push((t.ln(), magnitude.ln()));
    }
    if pts.len() < 3 {
        return Err(Error::Misuse(format!(
            "only {} samples inside [{}, {}]",
            pts.len(),
            window.start,
            window.end
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(RateFit {
        slope,
        halfwidth: 2.0 * stderr,
        window,
        points: pts.len(),
    })
}
