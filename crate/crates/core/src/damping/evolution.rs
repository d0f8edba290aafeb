use crate::actionangle::{CoefficientRows, SpectralTable};
use crate::error::{Error, Result};
use crate::volterra::{kernel_harmonics, nufft, Series};
use num_complex::Complex64;

/// One harmonic of one orbit driven by the field.
#[derive(Debug, Clone, Copy)]
struct Pair {
    chart: usize,
    node: usize,
    l: usize,
    freq: f64,
    /// `G' C_l` and `G' S_l`.
    drive_c: f64,
    drive_s: Complex64,
}

/// `int_0^1 (1 - x) exp(i theta x) dx`, the Filon weight of a half hat.
fn half_hat(theta: f64) -> Complex64 {
    if theta.abs() < 0.05 {
        let mut term = Complex64::new(0.5, 0.0);
        let mut sum = term;
        for k in 1..10 {
            term *= Complex64::new(0.0, theta) / (k + 2) as f64;
            sum += term;
        }
        sum
    } else {
        Complex64::new(0.0, 1.0 / theta) - (Complex64::new(0.0, theta).exp() - 1.0) / (theta * theta)
    }
}

/// Angle-Fourier coefficients of the perturbation pulled back along the
/// flow, `g_l(t) = r0_l - i l omega G' int_0^t (C C_l + S S_l) exp(i l omega s) ds`.
///
/// The field components are interpolated linearly between grid times and
/// the time integrals are then exact.
pub struct Evolution<'a> {
    table: &'a SpectralTable,
    rows: &'a CoefficientRows,
    c: &'a Series,
    s: &'a Series,
    pairs: Vec<Pair>,
}

/// `int C exp(i nu s) ds` and `int S exp(i nu s) ds` for every pair.
type Integrals = Vec<[Complex64; 2]>;

impl<'a> Evolution<'a> {
    pub fn new(table: &'a SpectralTable, rows: &'a CoefficientRows, c: &'a Series, s: &'a Series) -> Result<Self> {
        if c.grid != s.grid {
            return Err(Error::Misuse("field components live on different grids".into()));
        }
        if rows.charts.len() != table.charts().len()
            || rows
                .charts
                .iter()
                .zip(table.charts())
                .any(|(r, t)| r.len() != t.nodes.len())
        {
            return Err(Error::Misuse(format!("rows '{}' do not match the table layout", rows.name)));
        }
        let mut pairs = Vec::new();
        for (chart, table_chart) in table.charts().iter().enumerate() {
            for (node, n) in table_chart.nodes.iter().enumerate() {
                for l in 1..=kernel_harmonics(n) {
                    pairs.push(Pair {
                        chart,
                        node,
                        l,
                        freq: l as f64 * n.omega,
                        drive_c: n.g_prime * n.cos[l],
                        drive_s: n.g_prime * n.sin[l],
                    });
                }
            }
        }
        Ok(Self {
            table,
            rows,
            c,
            s,
            pairs,
        })
    }

    /// Number of driven harmonics.
    pub fn driven(&self) -> usize {
        self.pairs.len()
    }

    fn step_of(&self, t: f64) -> Result<usize> {
        let grid = self.c.grid;
        let step = (t / grid.dt()).round();
        if t < 0.0 || step as usize > grid.steps() || (step * grid.dt() - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::Domain(format!(
                "t={t} is not a time of the grid (dt={}, T={})",
                grid.dt(),
                grid.t_final()
            )));
        }
        Ok(step as usize)
    }

    fn integrals(&self, step: usize) -> Integrals {
        let dt = self.c.grid.dt();
        let thetas: Vec<f64> = self.pairs.iter().map(|p| p.freq * dt).collect();
        let mut out = vec![[Complex64::new(0.0, 0.0); 2]; self.pairs.len()];
        if step == 0 {
            return out;
        }
        for (j, series) in [self.c, self.s].into_iter().enumerate() {
            let y = &series.values;
            let mut coeffs: Vec<Complex64> = y[..=step].iter().map(|v| Complex64::new(*v, 0.0)).collect();
            coeffs[0] = Complex64::new(0.0, 0.0);
            let sums = nufft::type2(&coeffs, &thetas);
            for ((slot, sum), &theta) in out.iter_mut().zip(sums).zip(&thetas) {
                let left = half_hat(theta);
                let last = Complex64::from_polar(1.0, theta * step as f64);
                let interior = sum - y[step] * last;
                slot[j] = dt * (y[0] * left + 2.0 * left.re * interior + y[step] * left.conj() * last);
            }
        }
        out
    }

    /// Integrals up to the end of the grid plus the tails to infinity.
    ///
    /// Where the phase turns at least once per remaining unit of time the
    /// tail is the boundary term `i y(T) exp(i nu T) / nu` of an integration
    /// by parts. Slower harmonics use the envelope `|y| ~ t^-decay`.
    fn integrals_to_infinity(&self, decay: [f64; 2]) -> Integrals {
        let grid = self.c.grid;
        let t_end = grid.t_final();
        let mut out = self.integrals(grid.steps());
        for (slot, p) in out.iter_mut().zip(&self.pairs) {
            for (j, series) in [self.c, self.s].into_iter().enumerate() {
                let y = series.values[grid.steps()];
                let phase = Complex64::from_polar(1.0, p.freq * t_end);
                slot[j] += if p.freq * t_end >= 2.0 * std::f64::consts::PI || decay[j] <= 1.0 {
                    Complex64::new(0.0, y / p.freq) * phase
                } else {
                    y * t_end / (decay[j] - 1.0) * phase
                };
            }
        }
        out
    }

    /// `-i nu (G' C_l I_C + G' S_l I_S)` for every pair.
    fn increments(&self, integrals: &Integrals) -> Vec<Complex64> {
        self.pairs
            .iter()
            .zip(integrals)
            .map(|(p, [ic, is])| Complex64::new(0.0, -p.freq) * (p.drive_c * ic + p.drive_s * is))
            .collect()
    }

    fn assemble(&self, increments: &[Complex64]) -> CoefficientRows {
        let mut g = self.rows.clone();
        g.name = format!("{}_evolved", self.rows.name);
        for (p, inc) in self.pairs.iter().zip(increments) {
            let row = &mut g.charts[p.chart][p.node];
            if row.len() <= p.l {
                row.resize(p.l + 1, Complex64::new(0.0, 0.0));
            }
            row[p.l] += inc;
        }
        g
    }

    /// Coefficients at a grid time.
    pub fn coefficients_at(&self, t: f64) -> Result<CoefficientRows> {
        let step = self.step_of(t)?;
        Ok(self.assemble(&self.increments(&self.integrals(step))))
    }

    /// Coefficients of the scattering state, the limit of `g(t)`.
    pub fn scattering_coefficients(&self, decay: [f64; 2]) -> CoefficientRows {
        self.assemble(&self.increments(&self.integrals_to_infinity(decay)))
    }

    /// Surrogate `L1` distance between `g(t)` and the scattering state at
    /// each grid time in `ts`: the mean of `|g(t) - g_inf|` over an angle grid
    /// fine enough for the driven harmonics, integrated in the action.
    pub fn l1_distances(&self, ts: &[f64], decay: [f64; 2]) -> Result<Vec<f64>> {
        let limit = self.increments(&self.integrals_to_infinity(decay));
        ts.iter()
            .map(|&t| {
                let step = self.step_of(t)?;
                let now = self.increments(&self.integrals(step));
                let mut total = 0.0;
                let mut start = 0;
                while start < self.pairs.len() {
                    let (chart, node) = (self.pairs[start].chart, self.pairs[start].node);
                    let end = start
                        + self.pairs[start..]
                            .iter()
                            .take_while(|p| p.chart == chart && p.node == node)
                            .count();
                    let diff: Vec<Complex64> = (start..end).map(|i| now[i] - limit[i]).collect();
                    let da = self.table.charts()[chart].nodes[node].da;
                    total += da * angle_l1(&diff);
                    start = end;
                }
                Ok(total)
            })
            .collect()
    }

    pub fn table(&self) -> &SpectralTable {
        self.table
    }
}

/// Mean over the angle of `|2 Re sum_l d_l exp(i l theta)|`, `l = 1..`.
fn angle_l1(diff: &[Complex64]) -> f64 {
    let samples = (4 * diff.len()).max(8);
    let mut total = 0.0;
    for j in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
        let step = Complex64::from_polar(1.0, theta);
        let mut phase = step;
        let mut value = 0.0;
        for d in diff {
            value += 2.0 * (d * phase).re;
            phase *= step;
        }
        total += value.abs();
    }
    total / samples as f64
}

/// `C(t)` and `S(t)` of a perturbation with pulled-back coefficients `g`.
pub fn field_components(table: &SpectralTable, g: &CoefficientRows, t: f64) -> (f64, f64) {
    let mut c = 0.0;
    let mut s = 0.0;
    for (chart_rows, chart) in g.charts.iter().zip(table.charts()) {
        for (row, n) in chart_rows.iter().zip(&chart.nodes) {
            let mut zc = row[0] * n.cos[0];
            let mut zs = row[0] * n.sin[0].conj();
            for (l, gl) in row.iter().enumerate().skip(1) {
                let phase = Complex64::from_polar(2.0, -(l as f64) * n.omega * t);
                zc += gl * n.cos[l] * phase;
                zs += gl * n.sin[l].conj() * phase;
            }
            c += n.da * zc.re;
            s += n.da * zs.re;
        }
    }
    (c, s)
}
