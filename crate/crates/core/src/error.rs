use thiserror::Error;

/// Errors raised by the simulation kernels.
///
/// Variant names mirror the failure kinds reported to CLI users, see
/// [`Error::kind`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock space needs at least 2 levels, got {0}")]
    Dimension(usize),

    #[error("coherent amplitude {alpha} is truncated at dim={dim}: retained norm² {norm_sq:.3e} (deficit {deficit:.3e})")]
    Truncation {
        alpha: String,
        dim: usize,
        norm_sq: f64,
        deficit: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance {tolerance:e}: estimated error {error:.3e} on value {value:.6e}")]
    Quadrature {
        value: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("integration unstable: {0}")]
    Stability(String),

    #[error("time grid error: {0}")]
    Step(String),

    #[error("trajectory blew up at t={t:.4}: |a| = {magnitude:.3e}")]
    Overflow { t: f64, magnitude: f64 },

    #[error("grid does not cover the state: boundary |W| = {boundary:.3e} vs max |W| = {peak:.3e}")]
    Coverage { boundary: f64, peak: f64 },

    #[error("no interference fringe found: {0}")]
    NoFringe(String),
}

impl Error {
    /// Stable error name, used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "DimensionError",
            Error::Truncation { .. } => "TruncationError",
            Error::Domain(_) => "DomainError",
            Error::Quadrature { .. } => "QuadratureError",
            Error::Stability(_) => "StabilityError",
            Error::Step(_) => "StepError",
            Error::Overflow { .. } => "OverflowError",
            Error::Coverage { .. } => "CoverageError",
            Error::NoFringe(_) => "NoFringeError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
