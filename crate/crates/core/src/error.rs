use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("integral diverges: {0}")]
    Divergence(String),

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("point lies {distance:e} away from the separatrix, inside the excluded band")]
    Separatrix { distance: f64 },

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("no positive root of the magnetization equation in (0, {zeta}]")]
    NoPositiveRoot { zeta: f64 },

    #[error("Fourier truncation insufficient: tail estimate {tail:e} exceeds {tol:e}")]
    Truncation { tail: f64, tol: f64 },

    #[error("Parseval defect {defect:e} at h = {h} exceeds tolerance")]
    Parseval { h: f64, defect: f64 },

    #[error("Volterra step {step} is near-singular (denominator {denominator:e})")]
    Stability { step: usize, denominator: f64 },

    #[error("xi = {xi} is within {gap:e} of resonance l*omega at l = {harmonic}, h = {h}")]
    Resonance {
        xi: f64,
        harmonic: i32,
        h: f64,
        gap: f64,
    },

    #[error("projection direction is degenerate (overlap {overlap:e})")]
    Projection { overlap: f64 },

    #[error("series not strictly positive on the fit window (t = {t})")]
    Windowing { t: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
