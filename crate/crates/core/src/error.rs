use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point index {index} out of range for a space of {n_pts} points")]
    InvalidPoint { index: usize, n_pts: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("space of {requested} points exceeds the cap of {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("malformed space: {0}")]
    MalformedSpace(String),

    #[error(
        "operator is not self-adjoint with respect to the measure (asymmetry {asymmetry:.3e})"
    )]
    NotSelfAdjoint { asymmetry: f64 },

    #[error("operator has a negative eigenvalue {0:.3e}")]
    NotNonNegative(f64),

    #[error("multiplier is unbounded or non-finite on the spectrum at λ = {0}")]
    UnboundedMultiplier(f64),

    #[error("spectral bound {bound} is below the spectral maximum estimate {estimate}")]
    SpectralBoundTooSmall { bound: f64, estimate: f64 },

    #[error("grid function support touches the window boundary (|sample| = {0:.3e})")]
    SupportTouchesBoundary(f64),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("singular moment system while constructing the mollifier")]
    SingularMoments,

    #[error("partition of unity residual {0:.3e} exceeds tolerance")]
    PartitionResidual(f64),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
