use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Regularity data of an observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableMeta {
    /// Largest n such that all derivatives of orders 1..=n vanish at the origin.
    pub flatness: u32,
    /// Algebraic decay exponent in v.
    pub velocity_decay: f64,
    /// Number of available derivatives.
    pub smoothness: u32,
}

impl Default for ObservableMeta {
    fn default() -> Self {
        Self {
            flatness: 0,
            velocity_decay: f64::INFINITY,
            smoothness: 10,
        }
    }
}

/// A real function on phase space together with its metadata.
#[derive(Clone)]
pub struct Observable {
    name: String,
    func: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    meta: ObservableMeta,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("name", &self.name)
            .field("meta", &self.meta)
            .finish()
    }
}

impl Observable {
    pub fn new(name: impl Into<String>, func: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            func: Arc::new(func),
            meta: ObservableMeta::default(),
        }
    }

    pub fn with_meta(mut self, meta: ObservableMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn meta(&self) -> ObservableMeta {
        self.meta
    }

    pub fn eval(&self, x: f64, v: f64) -> f64 {
        (self.func)(x, v)
    }

    pub fn cos_x() -> Self {
        Self::new("cos_x", |x, _| x.cos()).with_meta(ObservableMeta {
            flatness: 1,
            velocity_decay: 0.0,
            smoothness: u32::MAX,
        })
    }

    pub fn sin_x() -> Self {
        Self::new("sin_x", |x, _| x.sin()).with_meta(ObservableMeta {
            flatness: 0,
            velocity_decay: 0.0,
            smoothness: u32::MAX,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self::new(format!("const_{value}"), move |_, _| value).with_meta(ObservableMeta {
            flatness: u32::MAX,
            velocity_decay: 0.0,
            smoothness: u32::MAX,
        })
    }

    /// Periodic Gaussian bump
    /// `amplitude * exp((cos(x - x0) - 1) / width^2 - (v - v0)^2 / (2 width^2))`.
    pub fn gaussian_bump(name: impl Into<String>, x0: f64, v0: f64, width: f64, amplitude: f64) -> Self {
        let w2 = width * width;
        Self::new(name, move |x, v| {
            amplitude * (((x - x0).cos() - 1.0) / w2 - (v - v0) * (v - v0) / (2.0 * w2)).exp()
        })
    }
}
