use super::fit::{fit_algebraic_rate, FitWindow, RateFit};
use crate::error::Result;
use crate::volterra::KernelSeries;
use serde::{Deserialize, Serialize};

/// Predicted decay of `|K_C|` and `|K_S|` as negative slopes.
pub const KERNEL_TARGETS: [f64; 2] = [-3.0, -2.0];

/// Fitted decay of the two kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDecay {
    #[serde(rename = "K_C")]
    pub k_c: RateFit,
    #[serde(rename = "K_S")]
    pub k_s: RateFit,
    pub targets: [f64; 2],
    pub tolerances: [f64; 2],
    pub pass_c: bool,
    pub pass_s: bool,
    pub pass: bool,
}

pub fn kernel_decay(kernels: &KernelSeries, window: FitWindow, tolerances: [f64; 2]) -> Result<KernelDecay> {
    let times: Vec<f64> = kernels.grid.times().collect();
    let k_c = fit_algebraic_rate(&times, &kernels.k_c, window)?;
    let k_s = fit_algebraic_rate(&times, &kernels.k_s, window)?;
    let pass_c = k_c.within(KERNEL_TARGETS[0], tolerances[0]);
    let pass_s = k_s.within(KERNEL_TARGETS[1], tolerances[1]);
    Ok(KernelDecay {
        k_c,
        k_s,
        targets: KERNEL_TARGETS,
        tolerances,
        pass_c,
        pass_s,
        pass: pass_c && pass_s,
    })
}
