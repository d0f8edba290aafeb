//! Test data with known flatness at the eye center.

use crate::actionangle::{Observable, ObservableMeta};

fn meta(flatness: u32) -> ObservableMeta {
    ObservableMeta {
        flatness,
        ..ObservableMeta::default()
    }
}

/// Generic perturbation for damping runs, `p = 0`.
pub fn damping_bump() -> Observable {
    Observable::gaussian_bump("r0", 0.5, 0.3, 0.8, 1.0).with_meta(meta(0))
}

/// Two off-center bumps, both with `p = 0`.
pub fn bump_pair() -> (Observable, Observable) {
    (
        Observable::gaussian_bump("left", -0.4, 0.3, 1.3, 1.0).with_meta(meta(0)),
        Observable::gaussian_bump("right", 0.6, -0.2, 1.2, 1.0).with_meta(meta(0)),
    )
}

/// `exp(-v^4/4 - (1 - cos x)^2) + sin^3 x exp(-v^4/4)`, flat to order 2.
pub fn flat_quadratic() -> Observable {
    Observable::new("flat2", |x: f64, v: f64| {
        let tail = (-v.powi(4) / 4.0).exp();
        tail * (-(1.0 - x.cos()).powi(2)).exp() + x.sin().powi(3) * tail
    })
    .with_meta(ObservableMeta {
        flatness: 2,
        velocity_decay: f64::INFINITY,
        smoothness: u32::MAX,
    })
}

/// A function of the energy only, `exp(-h0)` for the given magnetization.
pub fn energy_profile(m0: f64) -> Observable {
    Observable::new("energy_only", move |x: f64, v: f64| (-(0.5 * v * v - m0 * x.cos())).exp()).with_meta(meta(0))
}
