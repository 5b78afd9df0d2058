use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element is not hyperbolic (trace {trace})")]
    NotHyperbolic { trace: Complex64 },

    #[error("word lists are limited to {max} generators, got {got}")]
    TooManyGenerators { got: usize, max: usize },

    #[error("expected {expected} matrices, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("lattice cutoff {got} is below the minimum of {min} shells")]
    CutoffTooSmall { got: usize, min: usize },

    #[error("invalid lattice modulus tau = {tau}: {reason}")]
    InvalidModulus { tau: Complex64, reason: &'static str },

    #[error("point {z} lies within {distance:.3e} of a lattice point")]
    TooCloseToPole { z: Complex64, distance: f64 },

    #[error("integration path passes within {clearance:.3e} of the lattice at {z}")]
    PathTooClose { z: Complex64, clearance: f64 },

    #[error("step size underflow at parameter {t} along segment {from} -> {to}")]
    StepUnderflow {
        t: f64,
        from: Complex64,
        to: Complex64,
    },

    #[error("slope {p}/{q} is deeper than the search guard of {guard}")]
    DepthExceeded { p: i64, q: i64, guard: usize },

    #[error("slope {p}/{q} is not in lowest terms")]
    InvalidSlope { p: i64, q: i64 },

    #[error("character is not relative: |kappa + 2| = {residual:.3e}")]
    NotRelative { residual: f64 },

    #[error("need at least {needed} centers on the slope, found {found}")]
    InsufficientCenters { needed: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
