//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

/// Adaptive Gauss-Kronrod (7, 15) quadrature on `[a, b]`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        const XGK: [f64; 8] = [
            0.991455371120812639206854697526329,
            0.949107912342758524526189684047851,
            0.864864423359769072789712788640926,
            0.741531185599394439863864773280788,
            0.586087235467691130294144845693013,
            0.405845151377397166906606412076961,
            0.207784955007898467600689403773245,
            0.000000000000000000000000000000000,
        ];
        const WGK: [f64; 8] = [
            0.022935322010529224963732008058970,
            0.063092092629978553290700663189204,
            0.104790010322250183839876322541518,
            0.140653259715525918745189590510238,
            0.169004726639267902826583426598550,
            0.190350578064785409913256402421014,
            0.204432940075298892414161999234649,
            0.209482141084727828012999174891714,
        ];
        const WG: [f64; 4] = [
            0.129484966168869693270611432679082,
            0.279705391489276667901467771423780,
            0.381830050505118944950369775488975,
            0.417959183673469387755102040816327,
        ];
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WGK[7] * fc;
        let mut g = WG[3] * fc;
        for i in 0..7 {
            let x = h * XGK[i];
            let s = f(c - x) + f(c + x);
            k += WGK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        (k * h, ((k - g) * h).abs())
    }
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = rule(f, a, b);
        if err <= tol || depth > 40 {
            return val;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth + 1) + recurse(f, m, b, 0.5 * tol, depth + 1)
    }
    recurse(f, a, b, tol, 0)
}

/// Bisection for an increasing function on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// F(phi, k) from the defining integral.
pub fn f_oracle(phi: f64, k: f64) -> f64 {
    gauss_kronrod(&|y: f64| 1.0 / (1.0 - k * k * y.sin().powi(2)).sqrt(), 0.0, phi, 1e-15)
}

/// E(phi, k) from the defining integral.
pub fn e_oracle(phi: f64, k: f64) -> f64 {
    gauss_kronrod(&|y: f64| (1.0 - k * k * y.sin().powi(2)).sqrt(), 0.0, phi, 1e-15)
}

/// am(u, k) for |u| <= K(k) by bisection on the quadrature F.
pub fn am_oracle(u: f64, k: f64) -> f64 {
    let half = std::f64::consts::FRAC_PI_2;
    bisect(|phi| f_oracle(phi, k) - u, -half, half)
}

/// I_n(z) by power series, with the first omitted term as remainder bound.
pub fn bessel_series_oracle(n: u32, z: f64) -> (f64, f64) {
    let mut term = (0.5 * z).powi(n as i32) / (1..=n).map(|j| j as f64).product::<f64>();
    let mut sum = 0.0;
    let mut j = 0.0;
    while j < 400.0 {
        sum += term;
        j += 1.0;
        term *= 0.25 * z * z / (j * (j + n as f64));
        if term < 1e-18 * sum {
            break;
        }
    }
    (sum, term)
}

/// I_n(z) from the integral representation (1/pi) int_0^pi e^{z cos x} cos(n x) dx.
pub fn bessel_integral_oracle(n: u32, z: f64) -> f64 {
    let f = |x: f64| (z * x.cos()).exp() * (n as f64 * x).cos();
    gauss_kronrod(&f, 0.0, std::f64::consts::PI, 1e-14 * z.exp()) / std::f64::consts::PI
}

/// Tensor-product periodic trapezoid (in x) and Gauss-Kronrod (in v)
/// integral of `f(x, v)` against dx/(2 pi) dv on the torus times `[-vmax, vmax]`.
pub fn phase_space_integral<F: Fn(f64, f64) -> f64 + Sync>(f: &F, nx: usize, vmax: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..nx {
        let x = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / nx as f64;
        total += gauss_kronrod(&|v: f64| f(x, v), -vmax, vmax, 1e-14);
    }
    total / nx as f64
}

/// Least-squares slope of log|y| against log t.
pub fn loglog_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let lx: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
