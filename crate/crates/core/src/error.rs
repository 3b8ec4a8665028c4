use thiserror::Error;

use crate::scalar::Field;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("not a fusion frame: {0}")]
    NotFusionFrame(String),

    #[error("field mismatch: expected {expected}, found {found}")]
    FieldMismatch { expected: Field, found: Field },

    #[error("Gaussian draw stayed degenerate after {0} attempts")]
    DegenerateDraw(usize),

    #[error(
        "block {block} lost rank during retraction (smallest Gram eigenvalue {min_eigenvalue:.3e}); step too large"
    )]
    StepTooLarge { block: usize, min_eigenvalue: f64 },

    #[error("frame is not a critical point (gradient norm {0:.3e})")]
    NotCritical(f64),

    #[error(
        "top eigenvalue cluster is ambiguous: boundary gap {gap:.3e} is below tolerance {tol:.3e}"
    )]
    AmbiguousCluster { gap: f64, tol: f64 },

    #[error("critical point is not tight but the one-parameter weight {0} is not positive")]
    NoPositiveWeight(i64),

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    #[error("spectral data is not admissible: {0}")]
    NotAdmissible(String),
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed frame file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
