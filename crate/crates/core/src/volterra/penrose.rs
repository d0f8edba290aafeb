use super::spectral::{HatKernel, HatValue};
use crate::actionangle::SpectralTable;
use crate::equilibria::StationaryState;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Grid of the Penrose scan over `xi = gamma + i tau`, `tau < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenroseConfig {
    /// Half-width `B` of the scanned `gamma` range; chosen from the kernel
    /// moments when absent.
    pub gamma_max: Option<f64>,
    /// Depth of the scanned `tau` range; chosen from the kernel moments when absent.
    pub tau_max: Option<f64>,
    /// Distance of the row closest to the real axis.
    pub tau_min: f64,
    pub n_gamma: usize,
    pub n_tau: usize,
    /// Samples along the row nearest to the real axis, where the minima sit;
    /// each local minimum found there is then polished by golden section.
    pub n_line: usize,
}

impl Default for PenroseConfig {
    fn default() -> Self {
        Self {
            gamma_max: None,
            tau_max: None,
            tau_min: 1e-3,
            n_gamma: 41,
            n_tau: 12,
            n_line: 401,
        }
    }
}

impl PenroseConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: Option<f64>| v.is_none_or(|v| v > 0.0 && v.is_finite());
        if !(positive(self.gamma_max) && positive(self.tau_max)) {
            return Err(Error::Config("penrose: gamma_max and tau_max must be positive".into()));
        }
        if !(self.tau_min > 0.0 && self.tau_max.is_none_or(|t| t > self.tau_min)) {
            return Err(Error::Config("penrose: need 0 < tau_min < tau_max".into()));
        }
        if self.n_gamma < 3 || self.n_tau < 2 || self.n_line < 3 {
            return Err(Error::Config("penrose: need n_gamma >= 3, n_tau >= 2 and n_line >= 3".into()));
        }
        Ok(())
    }

    /// The same region with `factor` times the resolution in both directions.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_gamma: (self.n_gamma - 1) * factor + 1,
            n_tau: (self.n_tau - 1) * factor + 1,
            n_line: (self.n_line - 1) * factor + 1,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenrosePoint {
    pub xi: Complex64,
    pub hat: HatValue,
}

/// Margins `|1 - K^|` over the scanned region and the bounds covering the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenroseScan {
    pub points: Vec<PenrosePoint>,
    pub gamma_max: f64,
    pub tau_max: f64,
    pub min_c: f64,
    pub argmin_c: Complex64,
    pub min_s: f64,
    pub argmin_s: Complex64,
    /// `1 - K^_C(0)` and `1 - K^_S(0)`, both real.
    pub one_minus_c_at_zero: f64,
    pub one_minus_s_at_zero: f64,
    /// Real-axis margins extrapolated linearly from the two rows nearest to it.
    pub real_axis_min: f64,
    /// Upper bound on `|K^|` outside the scanned region.
    pub outer_bound: f64,
    pub outer_ok: bool,
    /// Lower bound on `|1 - K^|` over the closed lower half-plane.
    pub kappa: f64,
    /// Grid points that could not be evaluated.
    pub failures: Vec<String>,
    pub pass: bool,
}

/// JSON summary of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenroseSummary {
    #[serde(rename = "min_KC")]
    pub min_kc: f64,
    #[serde(rename = "min_KS")]
    pub min_ks: f64,
    /// Location `[re, im]` of the smaller of the two minima.
    pub at_xi: [f64; 2],
    pub pass: bool,
    pub kappa: f64,
    pub one_minus_kc_at_zero: f64,
    pub one_minus_ks_at_zero: f64,
    pub real_axis_min: f64,
    pub gamma_max: f64,
    pub tau_max: f64,
    pub outer_bound: f64,
    pub failures: usize,
}

impl PenroseScan {
    pub fn summary(&self) -> PenroseSummary {
        let at = if self.min_c <= self.min_s {
            self.argmin_c
        } else {
            self.argmin_s
        };
        PenroseSummary {
            min_kc: self.min_c,
            min_ks: self.min_s,
            at_xi: [at.re, at.im],
            pass: self.pass,
            kappa: self.kappa,
            one_minus_kc_at_zero: self.one_minus_c_at_zero,
            one_minus_ks_at_zero: self.one_minus_s_at_zero,
            real_axis_min: self.real_axis_min,
            gamma_max: self.gamma_max,
            tau_max: self.tau_max,
            outer_bound: self.outer_bound,
            failures: self.failures.len(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "re_xi,im_xi,abs_one_minus_KC,abs_one_minus_KS")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{}",
                p.xi.re,
                p.xi.im,
                p.hat.margin_c(),
                p.hat.margin_s()
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`, seeded with the
/// best sample so far; points where `f` fails are skipped.
fn golden_minimum<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64, seed: f64, seed_value: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut best, mut best_value) = (seed, seed_value);
    let probe = |g: f64, best: &mut f64, best_value: &mut f64| -> f64 {
        let v = f(g).unwrap_or(f64::INFINITY);
        if v < *best_value {
            *best = g;
            *best_value = v;
        }
        v
    };
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let mut fa = probe(a, &mut best, &mut best_value);
    let mut fb = probe(b, &mut best, &mut best_value);
    for _ in 0..30 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = probe(a, &mut best, &mut best_value);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = probe(b, &mut best, &mut best_value);
        }
    }
    (best, best_value)
}

/// Scans `|1 - K^_C|` and `|1 - K^_S|` over the lower half-plane.
pub fn penrose_scan(state: &StationaryState, table: &SpectralTable, config: &PenroseConfig) -> Result<PenroseScan> {
    config.validate()?;
    let hat = HatKernel::new(state, table)?;
    let moment = hat.first_moment_c.max(hat.first_moment_s);
    // Outside the grid every resonance is at least min(B - max l omega, tau_max)
    // away, so |K^| <= moment / that distance.
    let gamma_max = config.gamma_max.unwrap_or(hat.max_frequency + 2.5 * moment);
    let tau_max = config.tau_max.unwrap_or((2.5 * moment).max(4.0 * config.tau_min));
    let reach = (gamma_max - hat.max_frequency).min(tau_max);
    let outer_bound = if reach > 0.0 { moment / reach } else { f64::INFINITY };
    let outer_ok = outer_bound < 0.5;

    let gammas: Vec<f64> = (0..config.n_gamma)
        .map(|i| gamma_max * (2 * i as i64 - (config.n_gamma as i64 - 1)) as f64 / (config.n_gamma - 1) as f64)
        .collect();
    let taus: Vec<f64> = (0..config.n_tau)
        .map(|j| -(config.tau_min + (tau_max - config.tau_min) * j as f64 / (config.n_tau - 1) as f64))
        .collect();
    // K^(-conj xi) = conj K^(xi), so only gamma >= 0 is evaluated.
    let mut jobs: Vec<Complex64> = Vec::new();
    for &tau in taus.iter().chain(std::iter::once(&(-2.0 * config.tau_min))) {
        for &gamma in gammas.iter().filter(|g| **g >= 0.0) {
            jobs.push(Complex64::new(gamma, tau));
        }
        if !gammas.iter().any(|g| *g == 0.0) {
            jobs.push(Complex64::new(0.0, tau));
        }
    }
    let values: Vec<(Complex64, Result<HatValue>)> = jobs.par_iter().map(|&xi| (xi, hat.eval(xi))).collect();
    let lookup = |xi: Complex64| -> Option<&Result<HatValue>> {
        values
            .iter()
            .find(|(z, _)| z.re == xi.re.abs() && z.im == xi.im)
            .map(|(_, v)| v)
    };

    let mut points = Vec::new();
    let mut failures = Vec::new();
    for &tau in &taus {
        for &gamma in &gammas {
            let xi = Complex64::new(gamma, tau);
            match lookup(xi).expect("every |gamma| was evaluated") {
                Ok(v) if gamma >= 0.0 => points.push(PenrosePoint { xi, hat: *v }),
                Ok(v) => points.push(PenrosePoint {
                    xi,
                    hat: HatValue {
                        c: v.c.conj(),
                        s: v.s.conj(),
                    },
                }),
                Err(e) => failures.push(format!("xi={xi}: {e}")),
            }
        }
    }
    let (mut min_c, mut argmin_c) = (f64::INFINITY, Complex64::new(0.0, 0.0));
    let (mut min_s, mut argmin_s) = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for p in &points {
        if p.hat.margin_c() < min_c {
            min_c = p.hat.margin_c();
            argmin_c = p.xi;
        }
        if p.hat.margin_s() < min_s {
            min_s = p.hat.margin_s();
            argmin_s = p.xi;
        }
    }

    // |1 - K^| has no zeros below the axis in a stable state, so its minimum
    // is approached on the axis; resolve the nearest row finely.
    let row = -config.tau_min;
    let line: Vec<f64> = (0..config.n_line)
        .map(|i| gamma_max * i as f64 / (config.n_line - 1) as f64)
        .collect();
    let line_values: Vec<Result<HatValue>> = line.par_iter().map(|&g| hat.eval(Complex64::new(g, row))).collect();
    let mut real_axis_min = f64::INFINITY;
    for (is_c, margin) in [(true, HatValue::margin_c as fn(&HatValue) -> f64), (false, HatValue::margin_s)] {
        let samples: Vec<Option<f64>> = line_values.iter().map(|v| v.as_ref().ok().map(margin)).collect();
        for i in 0..line.len() {
            let Some(mid) = samples[i] else { continue };
            let left = if i == 0 { Some(f64::INFINITY) } else { samples[i - 1] };
            let right = samples.get(i + 1).copied().unwrap_or(Some(f64::INFINITY));
            let (Some(left), Some(right)) = (left, right) else { continue };
            if mid > left || mid > right {
                continue;
            }
            let lo = line[i.saturating_sub(1)];
            let hi = line[(i + 1).min(line.len() - 1)];
            let (gamma, value) = golden_minimum(|g| hat.eval(Complex64::new(g, row)).map(|v| margin(&v)), lo, hi, line[i], mid);
            let xi = Complex64::new(gamma, row);
            let (best, at) = if is_c { (&mut min_c, &mut argmin_c) } else { (&mut min_s, &mut argmin_s) };
            if value < *best {
                *best = value;
                *at = xi;
            }
            if let Ok(far) = hat.eval(Complex64::new(gamma, 2.0 * row)) {
                real_axis_min = real_axis_min.min(2.0 * value - margin(&far));
            }
        }
    }

    let zero = hat.eval(Complex64::new(0.0, 0.0))?;
    let one_minus_c_at_zero = 1.0 - zero.c.re;
    let one_minus_s_at_zero = 1.0 - zero.s.re;
    let kappa = min_c.min(min_s).min(1.0 - outer_bound);
    let pass = failures.is_empty()
        && min_c > 0.0
        && min_s > 0.0
        && outer_ok
        && one_minus_c_at_zero > 0.0
        && one_minus_s_at_zero > 0.0;
    Ok(PenroseScan {
        points,
        gamma_max,
        tau_max,
        min_c,
        argmin_c,
        min_s,
        argmin_s,
        one_minus_c_at_zero,
        one_minus_s_at_zero,
        real_axis_min,
        outer_bound,
        outer_ok,
        kappa,
        failures,
        pass,
    })
}
