use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("empty cross section: {0}")]
    EmptySection(String),
    #[error("empty mask: no active cells")]
    EmptyMask,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("radial monotonicity violated at sample resolution: g({r}) = {value}")]
    RadialMonotonicity { r: f64, value: f64 },
    #[error("degenerate minimum: inf 2g(r)/r = {0:e} admits no linear lower bound")]
    DegenerateMinimum(f64),
    #[error("cut-off precondition violated: {0}")]
    CutoffPrecondition(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("decay fit window empty: {0}")]
    EmptyFitWindow(String),
    #[error("centering failed: {0}")]
    Centering(String),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}
