use super::{Series, TimeGrid};
use crate::actionangle::{Chart, CoefficientRows, Segment, SpectralTable, TableNode};
use crate::equilibria::StationaryState;
use crate::error::{Error, Result};
use crate::quad::GaussRule;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::ops::Range;
use std::path::Path;

/// Terms below this weight are dropped from the kernel sums.
const NEGLIGIBLE: f64 = 1e-17;

/// Largest tolerated weight of the first harmonic past the table's range.
const TAIL_TOL: f64 = 1e-9;

/// Closest approach of a real-axis argument to a resonance before it is refused.
const RESONANCE_GUARD: f64 = 1e-6;

/// The kernels `K_C`, `K_S` of the Volterra equations and the companions
/// `Q_C`, `Q_S` with `K = dQ/dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSeries {
    pub grid: TimeGrid,
    pub k_c: Vec<f64>,
    pub k_s: Vec<f64>,
    pub q_c: Vec<f64>,
    pub q_s: Vec<f64>,
    /// Integral of `G' C_0^2` in the action, removed from `Q_C`.
    pub q0: f64,
    /// Weight of the harmonics at the truncation order.
    pub tail: f64,
}

impl KernelSeries {
    pub fn kernel_c(&self) -> Series {
        Series {
            grid: self.grid,
            values: self.k_c.clone(),
        }
    }

    pub fn kernel_s(&self) -> Series {
        Series {
            grid: self.grid,
            values: self.k_s.clone(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# kernels of the linearized dynamics, dt={}", self.grid.dt())?;
        writeln!(out, "t,K_C,K_S,Q_C,Q_S")?;
        for n in 0..self.grid.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.grid.t(n),
                self.k_c[n],
                self.k_s[n],
                self.q_c[n],
                self.q_s[n]
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// The sources `F_C`, `F_S` generated by an initial perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSeries {
    pub grid: TimeGrid,
    pub f_c: Vec<f64>,
    pub f_s: Vec<f64>,
}

impl SourceSeries {
    pub fn source_c(&self) -> Series {
        Series {
            grid: self.grid,
            values: self.f_c.clone(),
        }
    }

    pub fn source_s(&self) -> Series {
        Series {
            grid: self.grid,
            values: self.f_s.clone(),
        }
    }
}

/// One orbit's contribution: `sum_j Re(coeffs[l][j] exp(-i l omega t))`.
pub(crate) struct Harmonics<const K: usize> {
    pub(crate) omega: f64,
    pub(crate) coeffs: Vec<[Complex64; K]>,
}

pub(crate) fn harmonic_sums<const K: usize>(grid: &TimeGrid, items: &[Harmonics<K>]) -> [Vec<f64>; K] {
    let dt = grid.dt();
    let points: Vec<(f64, [Complex64; K])> = items
        .iter()
        .flat_map(|item| {
            item.coeffs
                .iter()
                .enumerate()
                .map(move |(l, c)| (l as f64 * item.omega * dt, *c))
        })
        .collect();
    super::nufft::type1(&points, grid.len()).map(|v| v.into_iter().map(|z| z.re).collect())
}

pub(crate) fn check_table(state: &StationaryState, table: &SpectralTable, grid: Option<&TimeGrid>) -> Result<()> {
    if table.fingerprint() != state.fingerprint() {
        return Err(Error::Misuse(format!(
            "table built for {} used with {}",
            table.fingerprint(),
            state.fingerprint()
        )));
    }
    if let Some(grid) = grid {
        let horizon = table.config().horizon;
        if grid.t_final() > horizon * (1.0 + 1e-9) {
            return Err(Error::Misuse(format!(
                "time grid reaches {} beyond the table horizon {horizon}",
                grid.t_final()
            )));
        }
    }
    Ok(())
}

/// `|G'| (C_l^2 + |S_l|^2)` weight of one harmonic at a node.
fn kernel_weight(node: &TableNode, l: usize) -> f64 {
    node.da * node.g_prime.abs() * (node.cos[l] * node.cos[l] + node.sin[l].norm_sqr())
}

/// Largest harmonic of a node that matters for the kernels.
pub(crate) fn kernel_harmonics(node: &TableNode) -> usize {
    (1..node.cos.len())
        .rev()
        .find(|&l| kernel_weight(node, l) * (1.0 + l as f64 * node.omega) > NEGLIGIBLE)
        .unwrap_or(0)
}

/// Kernels and companions of the linearized dynamics on `grid`.
pub fn kernel_series(state: &StationaryState, table: &SpectralTable, grid: &TimeGrid) -> Result<KernelSeries> {
    check_table(state, table, Some(grid))?;
    let l_max = table.l_max();
    let tail: f64 = table
        .nodes()
        .map(|(_, n)| kernel_weight(n, l_max) * (1.0 + l_max as f64 * n.omega))
        .sum();
    if tail > TAIL_TOL {
        return Err(Error::Truncation { tail, tol: TAIL_TOL });
    }
    let items: Vec<Harmonics<4>> = table
        .nodes()
        .filter_map(|(_, n)| {
            let top = kernel_harmonics(n);
            if top == 0 {
                return None;
            }
            let coeffs = (0..=top)
                .map(|l| {
                    if l == 0 {
                        return [Complex64::new(0.0, 0.0); 4];
                    }
                    let c2 = n.da * n.g_prime * n.cos[l] * n.cos[l];
                    let s2 = n.da * n.g_prime * n.sin[l].norm_sqr();
                    let freq = l as f64 * n.omega;
                    [
                        Complex64::new(0.0, -2.0 * freq * c2),
                        Complex64::new(0.0, 2.0 * freq * s2),
                        Complex64::new(2.0 * c2, 0.0),
                        Complex64::new(-2.0 * s2, 0.0),
                    ]
                })
                .collect();
            Some(Harmonics { omega: n.omega, coeffs })
        })
        .collect();
    let [k_c, k_s, q_c, q_s] = harmonic_sums(grid, &items);
    Ok(KernelSeries {
        grid: *grid,
        k_c,
        k_s,
        q_c,
        q_s,
        q0: table.mean_cos_term(),
        tail,
    })
}

/// `F_C(t)` and `F_S(t)`: pairings of the data with `cos X` and `sin X`
/// transported by the flow.
pub fn source_series(
    state: &StationaryState,
    table: &SpectralTable,
    rows: &CoefficientRows,
    grid: &TimeGrid,
) -> Result<SourceSeries> {
    check_table(state, table, Some(grid))?;
    if rows.charts.len() != table.charts().len()
        || rows
            .charts
            .iter()
            .zip(table.charts())
            .any(|(r, c)| r.len() != c.nodes.len())
    {
        return Err(Error::Misuse(format!("rows '{}' do not match the table layout", rows.name)));
    }
    let mut items = Vec::new();
    for (chart_rows, chart) in rows.charts.iter().zip(table.charts()) {
        for (row, n) in chart_rows.iter().zip(&chart.nodes) {
            let coeffs = row
                .iter()
                .enumerate()
                .map(|(l, f)| {
                    let factor = if l == 0 { n.da } else { 2.0 * n.da };
                    [f * n.cos[l] * factor, f * n.sin[l].conj() * factor]
                })
                .collect();
            items.push(Harmonics { omega: n.omega, coeffs });
        }
    }
    let [f_c, f_s] = harmonic_sums(grid, &items);
    Ok(SourceSeries { grid: *grid, f_c, f_s })
}

/// Transforms of both kernels at one point of the closed lower half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatValue {
    pub c: Complex64,
    pub s: Complex64,
}

impl HatValue {
    pub fn margin_c(&self) -> f64 {
        (1.0 - self.c).norm()
    }

    pub fn margin_s(&self) -> f64 {
        (1.0 - self.s).norm()
    }
}

struct PanelSpan {
    chart: Chart,
    chart_pos: usize,
    segment: Segment,
    lo: f64,
    hi: f64,
    omega_lo: f64,
    omega_hi: f64,
    nodes: Range<usize>,
    /// Kernel weight of each harmonic on the panel, cut after the last one that matters.
    weights: Vec<f64>,
}

/// Evaluator of the kernel transforms, refining panels adaptively where a
/// resonance `xi = +-l omega` comes close.
pub struct HatKernel<'a> {
    table: &'a SpectralTable,
    spans: Vec<PanelSpan>,
    rule: GaussRule,
    /// `sum_{l != 0} int |G'| C_l^2 |l omega| da`, and the same with `S_l`.
    pub first_moment_c: f64,
    pub first_moment_s: f64,
    /// Largest `l omega` carrying non-negligible kernel weight.
    pub max_frequency: f64,
}

/// `l omega / (xi - l omega) - l omega / (xi + l omega)`: the `+-l` pair.
fn resonance_pair(xi: Complex64, freq: f64) -> Complex64 {
    freq / (xi - freq) - freq / (xi + freq)
}

/// Distance from `z` to the real segment `[a, b]`.
fn distance_to_segment(z: Complex64, a: f64, b: f64) -> f64 {
    let x = z.re.clamp(a.min(b), a.max(b));
    (z - x).norm()
}

impl<'a> HatKernel<'a> {
    pub fn new(state: &StationaryState, table: &'a SpectralTable) -> Result<Self> {
        check_table(state, table, None)?;
        let m0 = state.m0;
        let l_max = table.l_max();
        let mut spans = Vec::new();
        let (mut moment_c, mut moment_s, mut max_frequency) = (0.0f64, 0.0f64, 0.0f64);
        for (chart_pos, chart_table) in table.charts().iter().enumerate() {
            for panel in &chart_table.panels {
                let (a, _) = panel.segment.orbit(chart_table.chart, m0, panel.lo)?;
                let (b, _) = panel.segment.orbit(chart_table.chart, m0, panel.hi)?;
                let mut weights = vec![0.0; l_max + 1];
                for n in &chart_table.nodes[panel.nodes.clone()] {
                    for (l, w) in weights.iter_mut().enumerate().skip(1) {
                        let freq = l as f64 * n.omega;
                        *w += kernel_weight(n, l) * freq;
                        let c2 = n.da * n.g_prime.abs() * n.cos[l] * n.cos[l];
                        let s2 = n.da * n.g_prime.abs() * n.sin[l].norm_sqr();
                        moment_c += 2.0 * c2 * freq;
                        moment_s += 2.0 * s2 * freq;
                        if (c2 + s2) * (1.0 + freq) > NEGLIGIBLE {
                            max_frequency = max_frequency.max(freq);
                        }
                    }
                }
                let top = (1..=l_max).rev().find(|&l| weights[l] > NEGLIGIBLE).unwrap_or(0);
                weights.truncate(top + 1);
                spans.push(PanelSpan {
                    chart: chart_table.chart,
                    chart_pos,
                    segment: panel.segment,
                    lo: panel.lo,
                    hi: panel.hi,
                    omega_lo: a.omega(),
                    omega_hi: b.omega(),
                    nodes: panel.nodes.clone(),
                    weights,
                });
            }
        }
        Ok(Self {
            table,
            spans,
            rule: GaussRule::new(table.config().panel_order),
            first_moment_c: moment_c,
            first_moment_s: moment_s,
            max_frequency,
        })
    }

    /// `K^_C(xi)` and `K^_S(xi)` for `Im xi <= 0`.
    pub fn eval(&self, xi: Complex64) -> Result<HatValue> {
        if !(xi.im <= 0.0) || !xi.re.is_finite() {
            return Err(Error::Domain(format!("transform argument {xi} must satisfy Im xi <= 0")));
        }
        let mut c = Complex64::new(0.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for span in &self.spans {
            let nodes = &self.table.charts()[span.chart_pos].nodes[span.nodes.clone()];
            for l in 1..span.weights.len() {
                if span.weights[l] <= NEGLIGIBLE {
                    continue;
                }
                let lf = l as f64;
                let (wa, wb) = (lf * span.omega_lo, lf * span.omega_hi);
                let distance = distance_to_segment(xi, wa, wb).min(distance_to_segment(-xi, wa, wb));
                if xi.im == 0.0 && distance < RESONANCE_GUARD {
                    let node = nodes
                        .iter()
                        .min_by(|p, q| {
                            let dp = (lf * p.omega - xi.re.abs()).abs();
                            let dq = (lf * q.omega - xi.re.abs()).abs();
                            dp.total_cmp(&dq)
                        })
                        .expect("panels hold nodes");
                    return Err(Error::Resonance {
                        xi: xi.re,
                        harmonic: if xi.re < 0.0 { -(l as i32) } else { l as i32 },
                        h: node.h,
                        gap: node.gap,
                    });
                }
                if distance >= 0.5 * (wb - wa).abs() {
                    for n in nodes {
                        let pair = resonance_pair(xi, lf * n.omega);
                        c += n.da * n.g_prime * n.cos[l] * n.cos[l] * pair;
                        s -= n.da * n.g_prime * n.sin[l].norm_sqr() * pair;
                    }
                } else {
                    let (dc, ds) = self.refine(span, xi, l, span.lo, span.hi, span.omega_lo, span.omega_hi, 0)?;
                    c += dc;
                    s += ds;
                }
            }
        }
        Ok(HatValue { c, s })
    }

    /// Contribution of harmonic `l` on `[lo, hi]` from freshly built orbits,
    /// bisected until the resonance is resolved.
    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        span: &PanelSpan,
        xi: Complex64,
        l: usize,
        lo: f64,
        hi: f64,
        omega_lo: f64,
        omega_hi: f64,
        depth: u32,
    ) -> Result<(Complex64, Complex64)> {
        let m0 = self.table.state().m0;
        let lf = l as f64;
        let (wa, wb) = (lf * omega_lo, lf * omega_hi);
        let distance = distance_to_segment(xi, wa, wb).min(distance_to_segment(-xi, wa, wb));
        if distance < 0.5 * (wb - wa).abs() && depth < 60 {
            let mid = 0.5 * (lo + hi);
            let omega_mid = span.segment.orbit(span.chart, m0, mid)?.0.omega();
            let left = self.refine(span, xi, l, lo, mid, omega_lo, omega_mid, depth + 1)?;
            let right = self.refine(span, xi, l, mid, hi, omega_mid, omega_hi, depth + 1)?;
            return Ok((left.0 + right.0, left.1 + right.1));
        }
        let mut c = Complex64::new(0.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in self.rule.on(lo, hi) {
            let (orbit, dh_ds) = span.segment.orbit(span.chart, m0, x)?;
            let da = w * dh_ds / orbit.omega();
            let g_prime = self.table.state().g_prime_at(orbit.energy());
            let cl = orbit.cos_coefficient(l as i64);
            let sl = orbit.sin_coefficient(l as i64).norm_sqr();
            let pair = resonance_pair(xi, lf * orbit.omega());
            c += da * g_prime * cl * cl * pair;
            s -= da * g_prime * sl * pair;
        }
        Ok((c, s))
    }
}

/// `K^_C(xi)` and `K^_S(xi)` at a single point.
pub fn hat_kernel(state: &StationaryState, table: &SpectralTable, xi: Complex64) -> Result<HatValue> {
    HatKernel::new(state, table)?.eval(xi)
}
