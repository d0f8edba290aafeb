//! Elliptic integrals, Jacobi elliptic functions and modified Bessel functions.
//!
//! Complete integrals use the arithmetic-geometric mean on the complementary
//! modulus, so moduli arbitrarily close to 1 keep full relative accuracy as
//! long as they are built with [`Modulus::from_complement`].

mod bessel;
pub mod checks;
pub mod series;

pub use bessel::{bessel_i, bessel_i_prime, BESSEL_MAX_ORDER};

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

/// Below this complementary modulus K is taken from its logarithmic expansion.
const LOG_REGIME_KC: f64 = 1e-4;

/// Elliptic modulus `k` stored together with `k' = sqrt(1 - k^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    k: f64,
    kc: f64,
}

impl Modulus {
    /// Modulus from `k` in `[0, 1]`.
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::Domain(format!("modulus k = {k} not in [0, 1]")));
        }
        let kc = ((1.0 - k) * (1.0 + k)).sqrt();
        Ok(Self { k, kc })
    }

    /// Modulus from the complementary modulus `k'` in `[0, 1]`.
    pub fn from_complement(kc: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kc) {
            return Err(Error::Domain(format!("complementary modulus {kc} not in [0, 1]")));
        }
        let k = ((1.0 - kc) * (1.0 + kc)).sqrt();
        Ok(Self { k, kc })
    }

    /// Modulus from `k^2` and `k'^2` computed separately, so that both keep
    /// full relative accuracy. The pair must sum to 1 up to rounding.
    pub fn from_squares(k2: f64, kc2: f64) -> Result<Self> {
        if !(k2 >= 0.0 && kc2 >= 0.0) || ((k2 + kc2) - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("k^2 = {k2}, k'^2 = {kc2} do not sum to 1")));
        }
        Ok(Self {
            k: k2.sqrt(),
            kc: kc2.sqrt(),
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn kc(&self) -> f64 {
        self.kc
    }

    /// The complementary modulus `k'` as a modulus.
    pub fn complement(&self) -> Self {
        Self {
            k: self.kc,
            kc: self.k,
        }
    }

    pub fn big_k(&self) -> Result<f64> {
        complete_k(*self)
    }

    pub fn big_e(&self) -> Result<f64> {
        complete_e(*self)
    }

    pub fn nome(&self) -> Result<f64> {
        nome(*self)
    }
}

fn agm_with_sum(kc: f64) -> (f64, f64) {
    // Returns (AGM(1, kc), sum of 2^(n-1) c_n^2 for n >= 1).
    let mut a = 1.0;
    let mut b = kc;
    let mut sum = 0.0;
    let mut pow = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
        if c.abs() <= 1e-17 * a {
            break;
        }
    }
    (a, sum)
}

/// Complete elliptic integral of the first kind K(k).
pub fn complete_k(m: Modulus) -> Result<f64> {
    if m.kc == 0.0 {
        return Err(Error::Divergence("K(k) is infinite at k = 1".into()));
    }
    if m.kc < LOG_REGIME_KC {
        let l = (4.0 / m.kc).ln();
        let kc2 = m.kc * m.kc;
        return Ok(l + 0.25 * kc2 * (l - 1.0) + 9.0 / 64.0 * kc2 * kc2 * (l - 7.0 / 6.0));
    }
    let (a, _) = agm_with_sum(m.kc);
    Ok(PI / (2.0 * a))
}

/// Complete elliptic integral of the second kind E(k).
pub fn complete_e(m: Modulus) -> Result<f64> {
    if m.kc == 0.0 {
        return Ok(1.0);
    }
    let (a, sum) = agm_with_sum(m.kc);
    let big_k = PI / (2.0 * a);
    Ok(big_k * (1.0 - 0.5 * m.k * m.k - sum))
}

/// K, E and the two differences that lose accuracy when formed naively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompleteIntegrals {
    pub big_k: f64,
    pub big_e: f64,
    /// K - E, accurate for small k.
    pub k_minus_e: f64,
    /// E - k'^2 K, accurate for small k.
    pub e_minus_kc2_k: f64,
}

/// All complete integrals of one modulus from a single AGM sweep.
pub fn complete_integrals(m: Modulus) -> Result<CompleteIntegrals> {
    if m.kc == 0.0 {
        return Err(Error::Divergence("K(k) is infinite at k = 1".into()));
    }
    let (a, sum) = agm_with_sum(m.kc);
    let agm_k = PI / (2.0 * a);
    let k2 = m.k * m.k;
    let big_e = agm_k * (1.0 - 0.5 * k2 - sum);
    let big_k = complete_k(m)?;
    Ok(CompleteIntegrals {
        big_k,
        big_e,
        k_minus_e: agm_k * (0.5 * k2 + sum),
        e_minus_kc2_k: agm_k * (0.5 * k2 - sum),
    })
}

/// Jacobi nome q = exp(-pi K(k') / K(k)).
pub fn nome(m: Modulus) -> Result<f64> {
    if m.k == 0.0 {
        return Ok(0.0);
    }
    if m.kc == 0.0 {
        return Ok(1.0);
    }
    Ok((-PI * complete_k(m.complement())? / complete_k(m)?).exp())
}

/// Carlson's symmetric integral R_F(x, y, z).
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..100 {
        let mu = (x + y + z) / 3.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        let eps = dx.abs().max(dy.abs()).max(dz.abs());
        if eps < 1e-4 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0)
                / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
    }
    f64::NAN
}

/// Carlson's symmetric integral R_D(x, y, z).
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    for _ in 0..100 {
        let mu = (x + y + 3.0 * z) / 5.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        let eps = dx.abs().max(dy.abs()).max(dz.abs());
        if eps < 1e-4 {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            let s = 1.0 + ed * (-3.0 / 14.0 + 9.0 / 88.0 * ed - 4.5 / 26.0 * dz * ee)
                + dz * (ee / 6.0 + dz * (-9.0 / 22.0 * ec + 3.0 / 26.0 * dz * ea));
            return 3.0 * sum + fac * s / (mu * mu.sqrt());
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lam));
        fac *= 0.25;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
    }
    f64::NAN
}

fn check_amplitude(phi: f64) -> Result<()> {
    if !(phi.abs() <= FRAC_PI_2 * (1.0 + 1e-15)) {
        return Err(Error::Domain(format!("amplitude {phi} outside [-pi/2, pi/2]")));
    }
    Ok(())
}

/// Incomplete integral of the first kind F(phi, k) for |phi| <= pi/2.
pub fn incomplete_f(phi: f64, m: Modulus) -> Result<f64> {
    check_amplitude(phi)?;
    let (s, c) = phi.sin_cos();
    let c2 = c * c;
    if m.kc == 0.0 && FRAC_PI_2 - phi.abs() <= 1e-15 {
        return Err(Error::Divergence("F(pi/2, 1) is infinite".into()));
    }
    let delta2 = c2 + m.kc * m.kc * s * s;
    Ok(s * carlson_rf(c2, delta2, 1.0))
}

/// Incomplete integral of the second kind E(phi, k) for |phi| <= pi/2.
pub fn incomplete_e(phi: f64, m: Modulus) -> Result<f64> {
    check_amplitude(phi)?;
    let (s, c) = phi.sin_cos();
    let c2 = c * c;
    let delta2 = c2 + m.kc * m.kc * s * s;
    if delta2 == 0.0 {
        return Ok(s);
    }
    Ok(s * carlson_rf(c2, delta2, 1.0) - m.k * m.k / 3.0 * s * s * s * carlson_rd(c2, delta2, 1.0))
}

/// One evaluation of the Jacobi amplitude and the three basic Jacobi functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticEval {
    pub u: f64,
    pub am: f64,
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Jacobi amplitude am(u, k), the inverse of F(., k).
pub fn jacobi_am(u: f64, m: Modulus) -> Result<f64> {
    JacobiSolver::new(m)?.am(u)
}

/// Jacobi functions for one modulus, with K and the nome computed once.
///
/// The argument is reduced to `[-K, K]`, seeded by the 12-term Fourier
/// series and polished by Newton steps kept inside a shrinking bracket.
#[derive(Debug, Clone, Copy)]
pub struct JacobiSolver {
    modulus: Modulus,
    big_k: f64,
    q: f64,
}

impl JacobiSolver {
    pub fn new(m: Modulus) -> Result<Self> {
        if m.kc == 0.0 {
            return Err(Error::Domain("Jacobi functions need k < 1".into()));
        }
        Ok(Self {
            modulus: m,
            big_k: complete_k(m)?,
            q: nome(m)?,
        })
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn quarter_period(&self) -> f64 {
        self.big_k
    }

    pub fn nome(&self) -> f64 {
        self.q
    }

    pub fn am(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::Domain(format!("argument u = {u}")));
        }
        if self.modulus.k == 0.0 {
            return Ok(u);
        }
        let periods = (u / (2.0 * self.big_k)).round();
        let r = u - periods * 2.0 * self.big_k;
        let phi = solve_amplitude(r, self.modulus, self.q, self.big_k)?;
        Ok(periods * PI + phi)
    }

    pub fn eval(&self, u: f64) -> Result<EllipticEval> {
        let am = self.am(u)?;
        let (sn, cn) = am.sin_cos();
        // 1 - k^2 sn^2 rewritten to stay accurate when k is close to 1.
        let kc = self.modulus.kc;
        let dn = (cn * cn + kc * kc * sn * sn).sqrt();
        Ok(EllipticEval { u, am, sn, cn, dn })
    }
}

fn solve_amplitude(r: f64, m: Modulus, q: f64, big_k: f64) -> Result<f64> {
    const MAX_ITER: usize = 100;
    let (mut lo, mut hi) = (-FRAC_PI_2, FRAC_PI_2);
    if r >= big_k {
        return Ok(FRAC_PI_2);
    }
    if r <= -big_k {
        return Ok(-FRAC_PI_2);
    }
    let mut phi = series::am_series_with(r, q, big_k, 12).clamp(lo, hi);
    let mut resid = f64::INFINITY;
    for _ in 0..MAX_ITER {
        resid = incomplete_f(phi, m)? - r;
        if resid == 0.0 {
            return Ok(phi);
        }
        if resid > 0.0 {
            hi = phi;
        } else {
            lo = phi;
        }
        let (s, c) = phi.sin_cos();
        let dn = (c * c + m.kc * m.kc * s * s).sqrt();
        let mut next = phi - resid * dn;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - phi).abs();
        phi = next;
        if step <= 2e-16 * phi.abs().max(1e-3) || hi - lo <= 4.0 * f64::EPSILON {
            return Ok(phi);
        }
    }
    Err(Error::NonConvergence {
        what: "amplitude inversion",
        iterations: MAX_ITER,
        residual: resid,
    })
}

/// Jacobi functions sn, cn, dn at `u` together with the amplitude.
pub fn jacobi(u: f64, m: Modulus) -> Result<EllipticEval> {
    JacobiSolver::new(m)?.eval(u)
}

/// Convenience wrapper returning `(sn, cn, dn)`.
pub fn jacobi_sn_cn_dn(u: f64, m: Modulus) -> Result<(f64, f64, f64)> {
    let e = jacobi(u, m)?;
    Ok((e.sn, e.cn, e.dn))
}
