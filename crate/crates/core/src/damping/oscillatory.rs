use crate::quad::GaussRule;
use num_complex::Complex64;

/// `I(t) = int_0^X u^(-1/2) exp(i t u) du`.
///
/// With `u = w^2` the integrand `2 exp(i t w^2)` is smooth; it is integrated
/// by Gauss-Legendre panels, `density` of them per unit of phase `t X`.
pub fn half_power_oscillatory(t: f64, x: f64, density: f64) -> Complex64 {
    assert!(t >= 0.0 && x > 0.0 && density > 0.0);
    let rule = GaussRule::new(20);
    let top = x.sqrt();
    let panels = ((t * x * density).ceil() as usize).max(4);
    let mut sum = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let a = top * p as f64 / panels as f64;
        let b = top * (p + 1) as f64 / panels as f64;
        for (w, wt) in rule.on(a, b) {
            sum += wt * Complex64::from_polar(2.0, t * w * w);
        }
    }
    sum
}

/// `sup sqrt(t) |I(t)|` over `samples` log-spaced times in `[t_min, t_max]`.
pub fn scaled_sup(t_min: f64, t_max: f64, x: f64, samples: usize, density: f64) -> f64 {
    (0..samples)
        .map(|i| {
            let t = t_min * (t_max / t_min).powf(i as f64 / (samples - 1) as f64);
            t.sqrt() * half_power_oscillatory(t, x, density).norm()
        })
        .fold(0.0, f64::max)
}
