use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameters out of domain: {0}")]
    Domain(String),

    #[error("triple ({n},{p},{k}) is not admissible: {reason}")]
    InadmissibleTriple {
        n: u32,
        p: u32,
        k: u32,
        reason: &'static str,
    },

    #[error("manifold offset must be positive, got {0}")]
    EpsNonpositive(f64),

    #[error("integration blew up at t = {t} (|state| = {norm})")]
    BlowupDetected { t: f64, norm: f64 },

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("operation requires a type I (node) equilibrium")]
    NotTypeI,

    #[error("operation requires a type II (spiral) equilibrium")]
    NotTypeII,

    #[error("no default barrier constant for ({n},{p},{k})")]
    NoBarrierConstant { n: u32, p: u32, k: u32 },

    #[error("barrier constant c = {0} outside (0, 1]")]
    COutOfRange(f64),

    #[error("radius {radius} outside profile span [{min}, {max}]")]
    RadiusOutOfRange { radius: f64, min: f64, max: f64 },

    #[error("r^2 + rho^2 is not monotone along the profile near r = {0}")]
    NonMonotoneCut(f64),

    #[error("need at least {needed} target hits, found {found}")]
    InsufficientHits { needed: usize, found: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("point is not on the unit sphere (|x| = {0})")]
    NotOnSphere(f64),

    #[error("finite-difference step {0} outside (1e-8, 1e-3)")]
    StepOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    Config(String),
}
