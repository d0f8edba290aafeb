use super::orbit::coefficients_from_samples;
use super::{Chart, Observable, Orbit};
use crate::equilibria::StationaryState;
use crate::error::{Error, Result};
use crate::quad::GaussRule;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

/// Rows with amplitude below this do not count towards the effective
/// harmonic range of a node.
const NEGLIGIBLE: f64 = 1e-13;

/// Eye orbits with `M0 - h` below this fraction of `M0` use the logarithmic grid.
const EYE_LOG_FROM: f64 = 0.1;

/// Grid and truncation parameters of a spectral table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableConfig {
    /// Largest harmonic kept.
    pub l_max: usize,
    /// Initial number of angle samples per orbit.
    pub n_theta: usize,
    /// Upper limit for the doubling of `n_theta`.
    pub max_theta: usize,
    /// Half-width of the excluded band around the separatrix, in units of M0.
    pub separatrix_cutoff: f64,
    /// Largest energy on the outer charts, in units of M0.
    pub h_max: f64,
    /// Longest time at which oscillatory sums stay resolved.
    pub horizon: f64,
    /// Largest phase change of any kept harmonic across one panel.
    pub phase_budget: f64,
    /// Gauss-Legendre nodes per panel.
    pub panel_order: usize,
    /// Minimum number of panels per grid segment.
    pub min_panels: usize,
    /// Allowed Parseval defect at every node.
    pub parseval_tol: f64,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            l_max: 64,
            n_theta: 512,
            max_theta: 8192,
            separatrix_cutoff: 1e-10,
            h_max: 200.0,
            horizon: 200.0,
            phase_budget: 8.0,
            panel_order: 16,
            min_panels: 4,
            parseval_tol: 1e-8,
        }
    }
}

impl TableConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("grid: {what}")));
        if self.l_max == 0 {
            return bad("l_max must be positive");
        }
        if self.n_theta < 16 || self.max_theta < self.n_theta {
            return bad("need 16 <= n_theta <= max_theta");
        }
        if !(self.separatrix_cutoff > 0.0 && self.separatrix_cutoff < EYE_LOG_FROM) {
            return bad("separatrix_cutoff must lie in (0, 0.1)");
        }
        if !(self.h_max > 1.0) {
            return bad("h_max must exceed 1 (units of M0)");
        }
        if !(self.horizon > 0.0 && self.phase_budget > 0.0 && self.parseval_tol > 0.0) {
            return bad("horizon, phase_budget and parseval_tol must be positive");
        }
        if self.panel_order < 2 || self.min_panels == 0 {
            return bad("panel_order >= 2 and min_panels >= 1 required");
        }
        Ok(())
    }
}

/// A piece of the energy axis with its own integration variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    /// Eye interior in the energy modulus `s = k`, `h = -M0 + 2 M0 s^2`.
    EyeCore,
    /// Eye near the separatrix in `s = ln(M0 - h)`.
    EyeEdge,
    /// Outer charts near the separatrix in `s = ln(h - M0)`.
    OuterEdge,
    /// Outer charts far from it in `s = sqrt(h + M0)`.
    OuterFar,
}

impl Segment {
    fn for_chart(chart: Chart) -> &'static [Segment] {
        match chart {
            Chart::Eye => &[Segment::EyeCore, Segment::EyeEdge],
            _ => &[Segment::OuterEdge, Segment::OuterFar],
        }
    }

    /// Range of the integration variable.
    fn range(self, m0: f64, config: &TableConfig) -> (f64, f64) {
        let cut = config.separatrix_cutoff * m0;
        match self {
            Segment::EyeCore => (0.0, (1.0 - 0.5 * EYE_LOG_FROM).sqrt()),
            Segment::EyeEdge => (cut.ln(), (EYE_LOG_FROM * m0).ln()),
            Segment::OuterEdge => (cut.ln(), m0.ln()),
            Segment::OuterFar => ((3.0 * m0).sqrt(), (m0 + config.h_max * m0).sqrt()),
        }
    }

    fn max_width(self) -> f64 {
        match self {
            Segment::EyeCore => 0.05,
            Segment::EyeEdge | Segment::OuterEdge => 1.0,
            Segment::OuterFar => 0.5,
        }
    }

    /// Orbit at the variable value `s` and `|dh/ds|` there.
    pub fn orbit(self, chart: Chart, m0: f64, s: f64) -> Result<(Orbit, f64)> {
        match self {
            Segment::EyeCore => Ok((Orbit::eye_from_modulus(m0, s)?, 4.0 * m0 * s)),
            Segment::EyeEdge | Segment::OuterEdge => {
                let gap = s.exp();
                Ok((Orbit::from_gap(chart, m0, gap)?, gap))
            }
            Segment::OuterFar => Ok((Orbit::from_gap(chart, m0, s * s - 2.0 * m0)?, 2.0 * s)),
        }
    }
}

/// A Gauss-Legendre panel of one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub segment: Segment,
    pub lo: f64,
    pub hi: f64,
    /// Indices of the panel nodes in the chart's node list.
    pub nodes: Range<usize>,
}

/// Spectral data of one orbit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableNode {
    pub h: f64,
    /// Distance `|h - M0|` to the separatrix.
    pub gap: f64,
    /// Integration variable of the node's segment.
    pub s: f64,
    pub omega: f64,
    pub action: f64,
    pub g_prime: f64,
    /// Quadrature weight for integrals in the action.
    pub da: f64,
    /// `C_l` for `l = 0..=l_max`; `C_{-l} = C_l`.
    pub cos: Vec<f64>,
    /// `S_l` for `l = 0..=l_max`; `S_{-l}` is the conjugate.
    pub sin: Vec<Complex64>,
    /// Observable coefficients `f_l`, `l = 0..=l_max`, one row per observable.
    pub rows: Vec<Vec<Complex64>>,
    pub parseval_defect: f64,
    pub theta_samples: usize,
    /// Largest harmonic with a non-negligible contribution.
    pub l_eff: usize,
}

impl TableNode {
    /// `f_l` for any sign of `l`.
    pub fn row_coefficient(&self, row: usize, l: i64) -> Complex64 {
        let c = self.rows[row][l.unsigned_abs() as usize];
        if l < 0 {
            c.conj()
        } else {
            c
        }
    }
}

/// Nodes and panels of one chart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartTable {
    pub chart: Chart,
    pub nodes: Vec<TableNode>,
    pub panels: Vec<Panel>,
}

/// Angle-Fourier coefficients `f_l`, `l >= 0`, of one real observable at
/// every node, in the node order of the table.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRows {
    pub name: String,
    /// Indexed by chart position in the table, then node, then `l`.
    pub charts: Vec<Vec<Vec<Complex64>>>,
}

impl CoefficientRows {
    /// `f_l` for any sign of `l`; zero past the stored range.
    pub fn coefficient(&self, chart: usize, node: usize, l: i64) -> Complex64 {
        let row = &self.charts[chart][node];
        match row.get(l.unsigned_abs() as usize) {
            Some(c) if l < 0 => c.conj(),
            Some(c) => *c,
            None => Complex64::new(0.0, 0.0),
        }
    }
}

/// Frequencies, actions and angle-Fourier coefficients on quadrature grids
/// covering the three charts.
#[derive(Debug, Clone)]
pub struct SpectralTable {
    state: StationaryState,
    config: TableConfig,
    observables: Vec<Observable>,
    charts: Vec<ChartTable>,
}

struct Builder<'a> {
    state: &'a StationaryState,
    observables: &'a [Observable],
    config: &'a TableConfig,
}

impl Builder<'_> {
    fn node(&self, chart: Chart, segment: Segment, s: f64) -> Result<(TableNode, f64)> {
        let m0 = self.state.m0;
        let (orbit, dh_ds) = segment.orbit(chart, m0, s)?;
        let l_max = self.config.l_max;
        let cos: Vec<f64> = (0..=l_max as i64).map(|l| orbit.cos_coefficient(l)).collect();
        let sin: Vec<Complex64> = (0..=l_max as i64).map(|l| orbit.sin_coefficient(l)).collect();
        let sum_c2 = cos[0] * cos[0] + 2.0 * cos[1..].iter().map(|c| c * c).sum::<f64>();
        let sum_s2 = 2.0 * sin[1..].iter().map(|c| c.norm_sqr()).sum::<f64>();

        let mut n = self.config.n_theta;
        let (samples, defect) = loop {
            let attempt = orbit.sample(n);
            let samples = match attempt {
                Ok(s) => s,
                Err(Error::Truncation { .. }) if n < self.config.max_theta => {
                    n *= 2;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let count = samples.x.len() as f64;
            let mean_c2 = samples.x.iter().map(|x| x.cos().powi(2)).sum::<f64>() / count;
            let mean_s2 = samples.x.iter().map(|x| x.sin().powi(2)).sum::<f64>() / count;
            let defect = (sum_c2 - mean_c2).abs().max((sum_s2 - mean_s2).abs());
            if defect < self.config.parseval_tol {
                break (samples, defect);
            }
            if n >= self.config.max_theta {
                return Err(Error::Parseval { h: orbit.energy(), defect });
            }
            n *= 2;
        };

        let rows: Vec<Vec<Complex64>> = self
            .observables
            .iter()
            .map(|f| coefficients_from_samples(f, &samples, l_max))
            .collect();
        let g_prime = self.state.g_prime_at(orbit.energy());
        let integrable: Vec<bool> = self
            .observables
            .iter()
            .map(|f| f.meta().velocity_decay > 2.0)
            .collect();
        let l_eff = effective_harmonics(g_prime, &cos, &sin, &rows, &integrable);
        Ok((
            TableNode {
                h: orbit.energy(),
                gap: orbit.gap(),
                s,
                omega: orbit.omega(),
                action: orbit.action(),
                g_prime,
                da: 0.0,
                cos,
                sin,
                rows,
                parseval_defect: defect,
                theta_samples: n,
                l_eff,
            },
            dh_ds,
        ))
    }

    /// Panels of one segment, split until every kept harmonic changes its
    /// phase by less than the budget over the horizon.
    fn panels(&self, charts: &[Chart], segment: Segment) -> Result<Vec<(f64, f64)>> {
        let (lo, hi) = segment.range(self.state.m0, self.config);
        let mut cache: HashMap<u64, (f64, usize)> = HashMap::new();
        let mut probe = |s: f64| -> Result<(f64, usize)> {
            if let Some(p) = cache.get(&s.to_bits()) {
                return Ok(*p);
            }
            let mut omega = 0.0;
            let mut l_eff = 0;
            for &chart in charts {
                let (node, _) = self.node(chart, segment, s)?;
                omega = node.omega;
                l_eff = l_eff.max(node.l_eff);
            }
            cache.insert(s.to_bits(), (omega, l_eff));
            Ok((omega, l_eff))
        };
        let count = self.config.min_panels;
        let mut stack: Vec<(f64, f64, u32)> = (0..count)
            .rev()
            .map(|i| {
                let a = lo + (hi - lo) * i as f64 / count as f64;
                let b = lo + (hi - lo) * (i + 1) as f64 / count as f64;
                (a, b, 0)
            })
            .collect();
        let mut done = Vec::new();
        while let Some((a, b, depth)) = stack.pop() {
            let (wa, la) = probe(a)?;
            let (wb, lb) = probe(b)?;
            let phase = self.config.horizon * la.max(lb) as f64 * (wb - wa).abs();
            let too_wide = (b - a) > segment.max_width();
            if (phase > self.config.phase_budget || too_wide) && depth < 40 {
                let mid = 0.5 * (a + b);
                stack.push((mid, b, depth + 1));
                stack.push((a, mid, depth + 1));
            } else {
                done.push((a, b));
            }
        }
        Ok(done)
    }

    fn chart_table(&self, chart: Chart, layout: &[(Segment, Vec<(f64, f64)>)]) -> Result<ChartTable> {
        let rule = GaussRule::new(self.config.panel_order);
        let mut jobs = Vec::new();
        let mut panels = Vec::new();
        for (segment, list) in layout {
            for &(lo, hi) in list {
                let start = jobs.len();
                for (s, w) in rule.on(lo, hi) {
                    jobs.push((*segment, s, w));
                }
                panels.push(Panel {
                    segment: *segment,
                    lo,
                    hi,
                    nodes: start..jobs.len(),
                });
            }
        }
        let nodes = jobs
            .par_iter()
            .map(|&(segment, s, w)| {
                let (mut node, dh_ds) = self.node(chart, segment, s)?;
                node.da = w * dh_ds / node.omega;
                Ok(node)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChartTable { chart, nodes, panels })
    }
}

fn effective_harmonics(
    g_prime: f64,
    cos: &[f64],
    sin: &[Complex64],
    rows: &[Vec<Complex64>],
    integrable: &[bool],
) -> usize {
    // Oscillatory sums pair two rows at the same harmonic. C and S only
    // appear against G' or against an integrable observable, and so do
    // observables without velocity decay.
    for l in (1..cos.len()).rev() {
        let c = cos[l].abs().max(sin[l].norm());
        let mut any = c;
        let mut decaying: f64 = 0.0;
        for (row, &ok) in rows.iter().zip(integrable) {
            let f = row[l].norm();
            any = any.max(f);
            if ok {
                decaying = decaying.max(f);
            }
        }
        let size = (g_prime.abs() * c * c).max(decaying * any);
        if size > NEGLIGIBLE {
            return l;
        }
    }
    0
}

impl SpectralTable {
    pub fn build(state: &StationaryState, observables: &[Observable], config: &TableConfig) -> Result<Self> {
        config.validate()?;
        let mut names = std::collections::HashSet::new();
        for f in observables {
            if !names.insert(f.name()) {
                return Err(Error::Misuse(format!("duplicate observable name '{}'", f.name())));
            }
        }
        let builder = Builder {
            state,
            observables,
            config,
        };
        let outer = [Chart::OuterUpper, Chart::OuterLower];
        let mut charts = Vec::new();
        for family in [&outer[..], &[Chart::Eye][..]] {
            let mut layout = Vec::new();
            for &segment in Segment::for_chart(family[0]) {
                layout.push((segment, builder.panels(family, segment)?));
            }
            for &chart in family {
                charts.push(builder.chart_table(chart, &layout)?);
            }
        }
        Ok(Self {
            state: *state,
            config: config.clone(),
            observables: observables.to_vec(),
            charts,
        })
    }

    pub fn state(&self) -> &StationaryState {
        &self.state
    }

    pub fn config(&self) -> &TableConfig {
        &self.config
    }

    /// Identifies the stationary state the table was built for.
    pub fn fingerprint(&self) -> String {
        self.state.fingerprint()
    }

    pub fn charts(&self) -> &[ChartTable] {
        &self.charts
    }

    pub fn chart(&self, chart: Chart) -> &ChartTable {
        self.charts.iter().find(|c| c.chart == chart).expect("all charts are built")
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn row_index(&self, name: &str) -> Result<usize> {
        self.observables
            .iter()
            .position(|f| f.name() == name)
            .ok_or_else(|| Error::Misuse(format!("table has no row for observable '{name}'")))
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Chart, &TableNode)> {
        self.charts
            .iter()
            .flat_map(|c| c.nodes.iter().map(move |n| (c.chart, n)))
    }

    pub fn node_count(&self) -> usize {
        self.charts.iter().map(|c| c.nodes.len()).sum()
    }

    pub fn l_max(&self) -> usize {
        self.config.l_max
    }

    pub fn max_parseval_defect(&self) -> f64 {
        self.nodes().map(|(_, n)| n.parseval_defect).fold(0.0, f64::max)
    }

    /// Sum over charts of the integral of `f(node)` in the action.
    pub fn integrate<F: Fn(Chart, &TableNode) -> f64>(&self, f: F) -> f64 {
        self.nodes().map(|(c, n)| n.da * f(c, n)).sum()
    }

    /// Sum over charts of the integral of `G' C_0^2` in the action.
    pub fn mean_cos_term(&self) -> f64 {
        self.integrate(|_, n| n.g_prime * n.cos[0] * n.cos[0])
    }

    /// Copy of the coefficients of one observable, truncated per node at
    /// its effective harmonic range.
    pub fn rows(&self, name: &str) -> Result<CoefficientRows> {
        let i = self.row_index(name)?;
        Ok(CoefficientRows {
            name: name.to_string(),
            charts: self
                .charts
                .iter()
                .map(|c| c.nodes.iter().map(|n| n.rows[i][..=n.l_eff].to_vec()).collect())
                .collect(),
        })
    }

    /// Long-time limit of the pairing of `f` with `phi` transported by the flow.
    pub fn limit_functional(&self, f: &str, phi: &str) -> Result<f64> {
        let (i, j) = (self.row_index(f)?, self.row_index(phi)?);
        Ok(self.integrate(|_, n| (n.rows[i][0] * n.rows[j][0].conj()).re))
    }

    /// Pairing of `f` with `phi` composed with the flow at time `t`.
    pub fn pairing(&self, f: &str, phi: &str, t: f64) -> Result<f64> {
        let (i, j) = (self.row_index(f)?, self.row_index(phi)?);
        Ok(self.integrate(|_, n| {
            let mut total = (n.rows[i][0] * n.rows[j][0].conj()).re;
            for l in 1..=n.l_eff {
                let phase = Complex64::from_polar(1.0, -(l as f64) * t * n.omega);
                total += 2.0 * (n.rows[i][l] * n.rows[j][l].conj() * phase).re;
            }
            total
        }))
    }

    /// Writes `spectral_<chart>.csv` for every chart into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let l_max = self.config.l_max;
        let mut written = Vec::new();
        for table in &self.charts {
            let path = dir.join(format!("spectral_{}.csv", table.chart.label()));
            let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
            writeln!(out, "# chart={} M0={} l_max={}", table.chart.label(), self.state.m0, l_max)?;
            match table.chart {
                Chart::Eye => writeln!(
                    out,
                    "# Cl_l = C_l (real, even in l, zero for odd l); Sl_l = S_l (real, even in l, zero for even l)"
                )?,
                chart => writeln!(
                    out,
                    "# Cl_l = C_l (real, even in l); Sl_l = s_l with S_l = -i*({})*s_l and S_-l = conj(S_l)",
                    chart.sign()
                )?,
            }
            let mut header = vec!["h".to_string(), "omega".into(), "a".into()];
            header.extend((0..=l_max).map(|l| format!("Cl_{l}")));
            header.extend((1..=l_max).map(|l| format!("Sl_{l}")));
            writeln!(out, "{}", header.join(","))?;
            for n in &table.nodes {
                let mut fields = vec![n.h.to_string(), n.omega.to_string(), n.action.to_string()];
                fields.extend(n.cos.iter().map(|c| c.to_string()));
                fields.extend(n.sin[1..].iter().map(|c| match table.chart {
                    Chart::Eye => c.re.to_string(),
                    chart => (-chart.sign() * c.im).to_string(),
                }));
                writeln!(out, "{}", fields.join(","))?;
            }
            out.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}
