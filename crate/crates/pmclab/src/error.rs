use thiserror::Error;

/// Library error type. Variants map onto the CLI exit-code classes:
/// domain errors exit 2, integration failures exit 3, usage errors exit 64.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("degenerate shape constant c3 = {c3}: c3 = 0 and c3 = 8/9 are excluded")]
    DegenerateConstant { c3: f64 },

    #[error("sin^2(alpha) = {sin_sq} lies outside the admissible interval")]
    OutsideAdmissibleRegion { sin_sq: f64 },

    #[error("singular denominator: |a + b| is below the machine threshold")]
    SingularDenominator,

    #[error("singular angle: sin(alpha) = 0")]
    SingularAngle,

    #[error("negative radicand {radicand}: |c|^2 would be negative, c is undefined here")]
    NegativeRadicand { radicand: f64 },

    #[error("c = 0: the Hopf coefficient ratio gamma is undefined")]
    ZeroC,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("inadmissible start: sin^2(alpha0) = {sin_sq} is not strictly inside the branch interval")]
    InadmissibleStart { sin_sq: f64 },

    #[error("non-finite state at u = {u}: integration aborted")]
    NonFiniteState { u: f64 },

    #[error("grid too small: {n_u} u-nodes, need at least 5 for the difference stencils")]
    GridTooSmall { n_u: usize },

    #[error("u-nodes are not uniformly spaced")]
    NonUniformGrid,

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    /// Exit code for the CLI: 2 domain, 3 integration, 64 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 64,
            Error::InadmissibleStart { .. } | Error::NonFiniteState { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
