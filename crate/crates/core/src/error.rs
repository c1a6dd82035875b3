use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("qubit amplitudes not normalized: |a|^2+|b|^2+|c|^2+|d|^2 = {norm}")]
    Normalization { norm: f64 },

    #[error("unknown preset `{0}` (expected psi_e, psi_b or psi_s)")]
    UnknownPreset(String),

    #[error(
        "manifold {n}: no cube-root pairing satisfies the residual and physicality bounds (best residual {best_residual:e})"
    )]
    BranchSelection { n: usize, best_residual: f64 },

    #[error("manifold {n}: characteristic roots collide (separation {separation:e})")]
    DegenerateRoots { n: usize, separation: f64 },

    #[error("manifold {n}: integration failed: {message}")]
    Integration { n: usize, message: String },

    #[error("state shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("numerical degradation: {0}")]
    NumericalDegradation(String),

    #[error("series too short: {len} points (need at least {min})")]
    SeriesTooShort { len: usize, min: usize },

    #[error("manifold {n}: {source}")]
    Block { n: usize, source: Box<Error> },
}

impl Error {
    /// Errors caused by bad user input rather than numerical breakdown.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Normalization { .. }
                | Error::UnknownPreset(_)
                | Error::ShapeMismatch(_)
                | Error::SeriesTooShort { .. }
        )
    }
}
