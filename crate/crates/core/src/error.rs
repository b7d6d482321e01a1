use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma pole: argument {0} is a nonpositive integer")]
    Pole(String),
    #[error("argument outside the supported domain: {0}")]
    Domain(String),
    #[error("quadrature did not converge: {0}")]
    Convergence(String),
    #[error("invalid Meijer G parameters: {0}")]
    Spec(String),
    #[error("Mellin variable outside the fundamental strip: {0}")]
    Strip(String),
    #[error("invalid contour geometry: {0}")]
    Geometry(String),
    #[error(
        "truncation size too small: {0} (the truncated block then always has 1 as a singular value)"
    )]
    Truncation(String),
    #[error("singular or ill-conditioned system: {0}")]
    Singularity(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("kernel routes disagree: {0}")]
    RouteDisagreement(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("singular matrix factor: {0}")]
    SingularFactor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
