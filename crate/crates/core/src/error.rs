use thiserror::Error;

use crate::cpo::OscillatorVariant;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: tf = {tf} must exceed t0 = {t0}")]
    InvalidInterval { t0: f64, tf: f64 },

    #[error("invalid frequency {value}: frequencies must be positive and finite")]
    InvalidFrequency { value: f64 },

    #[error("invalid tabulated samples: {0}")]
    InvalidSamples(String),

    #[error("time {t} outside schedule range [{t0}, {tf}]")]
    OutOfRange { t: f64, t0: f64, tf: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("Wronskian drift {drift:e} exceeds bound {bound:e}")]
    WronskianBlowup { drift: f64, bound: f64 },

    #[error("discrete spectrum undefined at t = {t} (Omega^2 = {big_omega_sq})")]
    UndefinedSpectrum { t: f64, big_omega_sq: f64 },

    #[error("trajectory variant {found:?} cannot be used here, expected {expected:?}")]
    VariantMismatch {
        expected: OscillatorVariant,
        found: OscillatorVariant,
    },

    #[error("adiabaticity parameter is undefined")]
    UndefinedQ,

    #[error("generating function radicand {radicand} is not positive")]
    RadicandNonPositive { radicand: f64 },

    #[error("n_max = {n_max} exceeds the supported limit {limit}")]
    Overflow { n_max: usize, limit: usize },

    #[error("amplitude is not positive at t = {t} (rho = {rho})")]
    NonPositiveAmplitude { t: f64, rho: f64 },

    #[error("propagator kernel is singular at t = {t} (mu = {mu:e})")]
    SingularKernel { t: f64, mu: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
