//! Long-time behavior of the linearized dynamics: decay of pairings along
//! the pendulum flow, damping of the field components and scattering of
//! the perturbation.

mod dispersion;
mod evolution;
mod fit;
mod flatness;
mod kernels;
mod oscillatory;
pub mod presets;
mod projection;
mod run;
mod scattering;

pub use dispersion::{dispersion_pairing, dispersion_run, dispersion_series, DispersionConfig, DispersionReport};
pub use evolution::{field_components, Evolution};
pub use fit::{fit_algebraic_rate, FitWindow, RateFit};
pub use flatness::{partial_at_center, verify_flatness, FlatnessCheck, FLATNESS_TOL, MAX_FLATNESS};
pub use kernels::{kernel_decay, KernelDecay, KERNEL_TARGETS};
pub use oscillatory::{half_power_oscillatory, scaled_sup};
pub use projection::{
    orthogonal_projection, orthogonality_defect, projection_profile, Projection, ProjectionSummary,
};
pub use run::{
    linear_damping_run, rate_targets, DampingConfig, DampingReport, DampingSummary, Rates, DEFECT_TOL,
};
pub use scattering::{
    projected_rows, scattering_state, ScatteringConfig, ScatteringResult, ScatteringSummary, StateSample,
};
