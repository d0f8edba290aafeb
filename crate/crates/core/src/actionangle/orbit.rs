use super::{wrap_angle, Chart, Observable, PhasePoint};
use crate::elliptic::{complete_integrals, incomplete_f, CompleteIntegrals, JacobiSolver, Modulus};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};
use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], direction: FftDirection) {
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft(buf.len(), direction);
        fft.process(buf);
    });
}

/// Series coefficients below this are dropped when synthesizing samples.
const SYNTHESIS_CUTOFF: f64 = 1e-18;

/// One pendulum orbit: a level set of `h0` inside one chart.
#[derive(Debug, Clone)]
pub struct Orbit {
    chart: Chart,
    m0: f64,
    h: f64,
    gap: f64,
    energy_k: f64,
    integrals: CompleteIntegrals,
    q: f64,
    omega: f64,
    action: f64,
    solver: JacobiSolver,
}

/// Orbit samples at the angles `theta_j = -pi + 2 pi j / n`.
#[derive(Debug, Clone)]
pub struct OrbitSamples {
    pub theta: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl Orbit {
    pub fn new(chart: Chart, m0: f64, h: f64) -> Result<Self> {
        check_m0(m0)?;
        if !h.is_finite() {
            return Err(Error::Domain(format!("energy {h}")));
        }
        match chart {
            Chart::Eye => {
                if h < -m0 || h >= m0 {
                    return Err(Error::Domain(format!("energy {h} outside the eye (-{m0}, {m0})")));
                }
                let scale = 2.0 * m0;
                Self::build(chart, m0, h, m0 - h, (h + m0) / scale, (m0 - h) / scale)
            }
            _ => {
                if h <= m0 {
                    return Err(Error::Domain(format!("energy {h} not above the separatrix {m0}")));
                }
                let scale = h + m0;
                Self::build(chart, m0, h, h - m0, 2.0 * m0 / scale, (h - m0) / scale)
            }
        }
    }

    /// Orbit at distance `gap` from the separatrix energy, built without
    /// cancellation.
    pub fn from_gap(chart: Chart, m0: f64, gap: f64) -> Result<Self> {
        check_m0(m0)?;
        if !(gap > 0.0) {
            return Err(Error::Separatrix { distance: gap.abs() });
        }
        match chart {
            Chart::Eye => {
                if gap > 2.0 * m0 {
                    return Err(Error::Domain(format!("gap {gap} exceeds the eye depth")));
                }
                let scale = 2.0 * m0;
                Self::build(chart, m0, m0 - gap, gap, (scale - gap) / scale, gap / scale)
            }
            _ => {
                let scale = 2.0 * m0 + gap;
                Self::build(chart, m0, m0 + gap, gap, 2.0 * m0 / scale, gap / scale)
            }
        }
    }

    /// Eye orbit with energy modulus `k`, exact near the center.
    pub fn eye_from_modulus(m0: f64, k: f64) -> Result<Self> {
        check_m0(m0)?;
        if !(0.0..1.0).contains(&k) {
            return Err(Error::Domain(format!("eye modulus {k} not in [0, 1)")));
        }
        let kc2 = (1.0 - k) * (1.0 + k);
        Self::build(Chart::Eye, m0, -m0 + 2.0 * m0 * k * k, 2.0 * m0 * kc2, k * k, kc2)
    }

    fn build(chart: Chart, m0: f64, h: f64, gap: f64, k2: f64, kc2: f64) -> Result<Self> {
        if !(gap > 0.0) {
            return Err(Error::Separatrix { distance: gap.abs() });
        }
        let modulus = Modulus::from_squares(k2, kc2)?;
        let integrals = complete_integrals(modulus)?;
        let q = modulus.nome()?;
        let root = m0.sqrt();
        let (energy_k, omega, action) = match chart {
            Chart::Eye => (
                modulus.k(),
                PI * root / (2.0 * integrals.big_k),
                8.0 * root / PI * integrals.e_minus_kc2_k,
            ),
            _ => {
                let k = 1.0 / modulus.k();
                (k, PI * k * root / integrals.big_k, 4.0 / PI * k * root * integrals.big_e)
            }
        };
        Ok(Self {
            chart,
            m0,
            h,
            gap,
            energy_k,
            integrals,
            q,
            omega,
            action,
            solver: JacobiSolver::new(modulus)?,
        })
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn energy(&self) -> f64 {
        self.h
    }

    /// Distance `|h - M0|` to the separatrix.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// `sqrt((h + M0) / (2 M0))`; below 1 in the eye, above 1 outside.
    pub fn energy_modulus(&self) -> f64 {
        self.energy_k
    }

    /// Modulus of the Jacobi functions parametrizing the orbit.
    pub fn modulus(&self) -> Modulus {
        self.solver.modulus()
    }

    pub fn nome(&self) -> f64 {
        self.q
    }

    pub fn quarter_period(&self) -> f64 {
        self.integrals.big_k
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn action(&self) -> f64 {
        self.action
    }

    /// Phase point at angle `theta`, through the amplitude inversion.
    pub fn point(&self, theta: f64) -> Result<PhasePoint> {
        let big_k = self.integrals.big_k;
        let root = self.m0.sqrt();
        match self.chart {
            Chart::Eye => {
                let e = self.solver.eval(2.0 * big_k / PI * (theta + FRAC_PI_2))?;
                let k = self.energy_k;
                Ok(PhasePoint {
                    x: 2.0 * (k * e.sn).atan2(e.dn),
                    v: 2.0 * k * root * e.cn,
                })
            }
            chart => {
                let e = self.solver.eval(big_k * theta / PI)?;
                let sign = chart.sign();
                Ok(PhasePoint {
                    x: wrap_angle(sign * 2.0 * e.am),
                    v: sign * 2.0 * self.energy_k * root * e.dn,
                })
            }
        }
    }

    /// Angle of a point lying on this orbit.
    pub fn angle_of(&self, pt: PhasePoint) -> Result<f64> {
        let big_k = self.integrals.big_k;
        let m = self.modulus();
        match self.chart {
            Chart::Eye => {
                // sn and cn up to the common factor 1/k.
                let am = ((0.5 * pt.x).sin() * 2.0 * self.m0.sqrt()).atan2(pt.v);
                let turns = (am / PI).round();
                let u = 2.0 * big_k * turns + incomplete_f(am - PI * turns, m)?;
                Ok(wrap_angle(PI * u / (2.0 * big_k) - FRAC_PI_2))
            }
            chart => {
                let am = chart.sign() * 0.5 * wrap_angle(pt.x);
                if am.abs() >= FRAC_PI_2 {
                    return Ok(PI);
                }
                Ok(PI * incomplete_f(am, m)? / big_k)
            }
        }
    }

    /// Closed-form Fourier coefficient of `cos x` along the orbit.
    pub fn cos_coefficient(&self, l: i64) -> f64 {
        let q = self.q;
        let big_k = self.integrals.big_k;
        let n = l.unsigned_abs();
        match self.chart {
            Chart::Eye => {
                if n == 0 {
                    return 1.0 - 2.0 * self.integrals.k_minus_e / big_k;
                }
                if n % 2 == 1 {
                    return 0.0;
                }
                let j = (n / 2) as i32;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let qj = q.powi(j);
                sign * 2.0 * PI * PI / (big_k * big_k) * j as f64 * qj / (1.0 - qj * qj)
            }
            _ => {
                let k2 = self.energy_k * self.energy_k;
                if n == 0 {
                    return 1.0 - 2.0 * k2 * self.integrals.k_minus_e / big_k;
                }
                let ql = q.powi(n as i32);
                2.0 * PI * PI * k2 / (big_k * big_k) * n as f64 * ql / (1.0 - ql * ql)
            }
        }
    }

    /// Closed-form Fourier coefficient of `sin x` along the orbit.
    ///
    /// Real on the eye; purely imaginary on the outer charts.
    pub fn sin_coefficient(&self, l: i64) -> Complex64 {
        let q = self.q;
        let big_k = self.integrals.big_k;
        let n = l.unsigned_abs();
        if n == 0 {
            return Complex64::new(0.0, 0.0);
        }
        match self.chart {
            Chart::Eye => {
                if n % 2 == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                let j = (n + 1) / 2;
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                let qn = q.sqrt().powi(n as i32);
                Complex64::new(sign * PI * PI / (big_k * big_k) * n as f64 * qn / (1.0 + qn * qn), 0.0)
            }
            chart => {
                let k2 = self.energy_k * self.energy_k;
                let ql = q.powi(n as i32);
                let s = 2.0 * PI * PI * k2 / (big_k * big_k) * n as f64 * ql / (1.0 + ql * ql);
                let im = -chart.sign() * s * l.signum() as f64;
                Complex64::new(0.0, im)
            }
        }
    }

    /// Number of harmonics needed to synthesize the orbit, in units of the
    /// basic frequency.
    fn harmonics_needed(&self) -> usize {
        if self.q <= 0.0 {
            return 1;
        }
        let per_step = match self.chart {
            Chart::Eye => 0.5 * self.q.ln(),
            _ => self.q.ln(),
        };
        (SYNTHESIS_CUTOFF.ln() / per_step).ceil() as usize + 2
    }

    /// Samples of the orbit from the nome series of am, sn, cn and dn,
    /// summed by one inverse FFT per pair of real signals.
    pub fn sample(&self, n: usize) -> Result<OrbitSamples> {
        let needed = self.harmonics_needed();
        if n < 8 || needed >= n / 2 {
            return Err(Error::Truncation {
                tail: self.q.powf(n as f64 / 2.0),
                tol: SYNTHESIS_CUTOFF,
            });
        }
        let theta: Vec<f64> = (0..n).map(|j| -PI + 2.0 * PI * j as f64 / n as f64).collect();
        let q = self.q;
        let big_k = self.integrals.big_k;
        let root = self.m0.sqrt();
        let base = 2.0 * PI / big_k;
        match self.chart {
            Chart::Eye => {
                let mut dn = vec![0.0; needed + 1];
                let mut ksn = vec![0.0; needed + 1];
                let mut kcn = vec![0.0; needed + 1];
                dn[0] = PI / (2.0 * big_k);
                let sq = q.sqrt();
                for harmonic in 1..=needed {
                    let qh = sq.powi(harmonic as i32);
                    if harmonic % 2 == 0 {
                        dn[harmonic] = base * qh / (1.0 + qh * qh);
                    } else {
                        ksn[harmonic] = base * qh / (1.0 - qh * qh);
                        kcn[harmonic] = base * qh / (1.0 + qh * qh);
                    }
                }
                let zero = vec![0.0; needed + 1];
                let first = synthesize(n, FRAC_PI_2, &dn, &zero, &zero, &ksn);
                let second = synthesize(n, FRAC_PI_2, &kcn, &zero, &zero, &zero);
                let x = first.iter().map(|z| 2.0 * z.im.atan2(z.re)).collect();
                let v = second.iter().map(|z| 2.0 * root * z.re).collect();
                Ok(OrbitSamples { theta, x, v })
            }
            chart => {
                let mut dn = vec![0.0; needed + 1];
                let mut wobble = vec![0.0; needed + 1];
                dn[0] = PI / (2.0 * big_k);
                for m in 1..=needed {
                    let qm = q.powi(m as i32);
                    dn[m] = base * qm / (1.0 + qm * qm);
                    wobble[m] = 4.0 * qm / (m as f64 * (1.0 + qm * qm));
                }
                let zero = vec![0.0; needed + 1];
                let z = synthesize(n, 0.0, &dn, &zero, &zero, &wobble);
                let sign = chart.sign();
                let speed = 2.0 * self.energy_k * root;
                let x = z
                    .iter()
                    .zip(&theta)
                    .map(|(z, t)| sign * (t + z.im))
                    .collect();
                let v = z.iter().map(|z| sign * speed * z.re).collect();
                Ok(OrbitSamples { theta, x, v })
            }
        }
    }

    /// Coefficients `f_l` for `l = 0..=l_max` from `n` samples.
    pub fn fourier_coefficients(&self, f: &Observable, n: usize, l_max: usize) -> Result<Vec<Complex64>> {
        let samples = self.sample(n)?;
        Ok(coefficients_from_samples(f, &samples, l_max))
    }

    /// One coefficient, doubling the sample count until it settles.
    pub fn fourier_coefficient(&self, f: &Observable, l: i64) -> Result<Complex64> {
        const MAX_SAMPLES: usize = 1 << 17;
        let l_abs = l.unsigned_abs() as usize;
        let mut n = 64usize;
        while n <= 2 * l_abs + 2 || self.sample_size_ok(n).is_err() {
            n *= 2;
        }
        let mut prev: Option<Complex64> = None;
        let mut change = f64::INFINITY;
        while n <= MAX_SAMPLES {
            let samples = self.sample(n)?;
            let scale = samples
                .x
                .iter()
                .zip(&samples.v)
                .map(|(&x, &v)| f.eval(x, v).abs())
                .fold(1e-300, f64::max);
            let row = coefficients_from_samples(f, &samples, l_abs);
            let c = if l >= 0 { row[l_abs] } else { row[l_abs].conj() };
            if let Some(p) = prev {
                change = (c - p).norm();
                if change <= 1e-14 * scale {
                    return Ok(c);
                }
            }
            prev = Some(c);
            n *= 2;
        }
        Err(Error::NonConvergence {
            what: "angle quadrature",
            iterations: MAX_SAMPLES,
            residual: change,
        })
    }

    fn sample_size_ok(&self, n: usize) -> Result<()> {
        if self.harmonics_needed() >= n / 2 {
            return Err(Error::Truncation {
                tail: 1.0,
                tol: SYNTHESIS_CUTOFF,
            });
        }
        Ok(())
    }
}

fn check_m0(m0: f64) -> Result<()> {
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(Error::Domain(format!("magnetization {m0} must be positive")));
    }
    Ok(())
}

/// Coefficients `f_l`, `l = 0..=l_max`, of real samples taken at
/// `theta_j = -pi + 2 pi j / n`.
pub(crate) fn coefficients_from_samples(f: &Observable, s: &OrbitSamples, l_max: usize) -> Vec<Complex64> {
    let n = s.x.len();
    let mut buf: Vec<Complex64> = s
        .x
        .iter()
        .zip(&s.v)
        .map(|(&x, &v)| Complex64::new(f.eval(x, v), 0.0))
        .collect();
    fft_in_place(&mut buf, FftDirection::Forward);
    (0..=l_max.min(n / 2))
        .map(|l| {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            buf[l] * (sign / n as f64)
        })
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(l_max + 1)
        .collect()
}

/// Samples of `f + i g` at `theta_j = -pi + 2 pi j / n`, where
/// `f(theta) = sum fc_m cos(m phi) + fs_m sin(m phi)` in `phi = theta + shift`
/// and likewise for `g`.
fn synthesize(n: usize, shift: f64, fc: &[f64], gc: &[f64], fs: &[f64], gs: &[f64]) -> Vec<Complex64> {
    let mut bins = vec![Complex64::new(0.0, 0.0); n];
    let i = Complex64::new(0.0, 1.0);
    bins[0] = Complex64::new(fc[0], gc[0]);
    for m in 1..fc.len() {
        // Coefficients of exp(+i m phi) and exp(-i m phi).
        let f_plus = Complex64::new(fc[m], -fs[m]) * 0.5;
        let f_minus = Complex64::new(fc[m], fs[m]) * 0.5;
        let g_plus = Complex64::new(gc[m], -gs[m]) * 0.5;
        let g_minus = Complex64::new(gc[m], gs[m]) * 0.5;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let rot = Complex64::from_polar(sign, m as f64 * shift);
        bins[m] += (f_plus + i * g_plus) * rot;
        bins[n - m] += (f_minus + i * g_minus) * rot.conj();
    }
    fft_in_place(&mut bins, FftDirection::Inverse);
    bins
}
