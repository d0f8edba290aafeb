//! Trigonometric sums between uniform and nonuniform points by Gaussian
//! gridding.
//!
//! `type1` evaluates `F_j(n) = sum_m c_{m,j} exp(-i n x_m)` for `n = 0..len`;
//! `type2` evaluates `F(x_m) = sum_n c_n exp(i n x_m)`. Both use an
//! oversampled grid, a truncated Gaussian kernel and one FFT per component.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Oversampling ratio of the spreading grid.
const OVERSAMPLING: usize = 2;

/// Grid points on each side of a source; 12 gives about 1e-12 relative accuracy.
const SPREAD: i64 = 12;

pub(crate) fn type1<const K: usize>(points: &[(f64, [Complex64; K])], len: usize) -> [Vec<Complex64>; K] {
    let (grid, tau) = layout(len);
    let h = 2.0 * PI / grid as f64;
    let mut spread: [Vec<Complex64>; K] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); grid]);
    for (x, coeffs) in points {
        let x = x.rem_euclid(2.0 * PI);
        let nearest = (x / h).floor() as i64;
        for m in nearest - SPREAD + 1..=nearest + SPREAD {
            let d = x - m as f64 * h;
            let w = (-d * d / (4.0 * tau)).exp();
            let index = m.rem_euclid(grid as i64) as usize;
            for j in 0..K {
                spread[j][index] += coeffs[j] * w;
            }
        }
    }
    let fft = FftPlanner::new().plan_fft_forward(grid);
    let scale = (PI / tau).sqrt() / grid as f64;
    spread.map(|mut f| {
        fft.process(&mut f);
        (0..len)
            .map(|n| {
                let k = n as f64;
                f[n] * scale * (k * k * tau).exp()
            })
            .collect()
    })
}

/// Grid size and Gaussian variance for `len` uniform modes.
fn layout(len: usize) -> (usize, f64) {
    let modes = (2 * len).next_power_of_two().max(16);
    let r = OVERSAMPLING as f64;
    let tau = PI * SPREAD as f64 / ((modes * modes) as f64 * r * (r - 0.5));
    (OVERSAMPLING * modes, tau)
}

pub(crate) fn type2(coeffs: &[Complex64], points: &[f64]) -> Vec<Complex64> {
    let (grid, tau) = layout(coeffs.len());
    let h = 2.0 * PI / grid as f64;
    let mut f = vec![Complex64::new(0.0, 0.0); grid];
    for (n, c) in coeffs.iter().enumerate() {
        let k = n as f64;
        f[n] = c * (k * k * tau).exp();
    }
    FftPlanner::new().plan_fft_inverse(grid).process(&mut f);
    let scale = (PI / tau).sqrt() / grid as f64;
    points
        .iter()
        .map(|x| {
            let x = x.rem_euclid(2.0 * PI);
            let nearest = (x / h).floor() as i64;
            let mut sum = Complex64::new(0.0, 0.0);
            for m in nearest - SPREAD + 1..=nearest + SPREAD {
                let d = x - m as f64 * h;
                sum += f[m.rem_euclid(grid as i64) as usize] * (-d * d / (4.0 * tau)).exp();
            }
            sum * scale
        })
        .collect()
}
