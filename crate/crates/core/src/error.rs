use thiserror::Error;

/// Errors raised across the kernel.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero-length frame vector at position {0}")]
    ZeroVector(usize),

    #[error("elliptic modulus {0} outside the admissible range")]
    ModulusOutOfRange(f64),

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("sample {index} has norm {norm}, expected unit norm")]
    NotUnitNorm { index: usize, norm: f64 },

    #[error("grid is not periodic along {axis}: wrap mismatch {mismatch:e}")]
    NotPeriodic { axis: &'static str, mismatch: f64 },

    #[error("degenerate parametrization at (s, t) = ({s}, {t}): |x_s x x_t| = {area:e}")]
    DegenerateParametrization { s: f64, t: f64, area: f64 },

    #[error("1-form is not closed: {what} defect {defect:e} exceeds {tolerance:e}")]
    NotClosed {
        what: &'static str,
        defect: f64,
        tolerance: f64,
    },

    #[error("evolution blew up at t = {t}: |phi| deviates from 1 by {deviation:e}")]
    BlowUp { t: f64, deviation: f64 },

    #[error("initial data violates the isotropy constraints: residual {residual:e} > {tolerance:e}")]
    ConstraintViolation { residual: f64, tolerance: f64 },

    #[error("bad range: {0}")]
    BadRange(String),

    #[error("empty sampling grid")]
    EmptyGrid,

    #[error("every sampled frame is degenerate")]
    AllDegenerate,

    #[error("surface was not built by a constant twist: {0}")]
    BadFamily(String),

    #[error("projection matrix has rank {0}, expected 3")]
    RankDeficient(usize),

    #[error("configuration error at {path} (line {line}, column {column}): {message}")]
    Config {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
