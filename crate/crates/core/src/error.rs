use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("matrix is numerically singular (condition estimate {cond:.3e})")]
    SingularDenominator { cond: f64 },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("grid has {n} nodes, at least {min} required")]
    GridTooSmall { n: usize, min: usize },
    #[error("point {x} lies outside the grid [{lo}, {hi}]")]
    OutOfGrid { x: f64, lo: f64, hi: f64 },
    #[error("operation requires a {expected} potential")]
    WrongKind { expected: &'static str },
    #[error("diagonal entries {i} and {k} of D coincide")]
    DegenerateD { i: usize, k: usize },
    #[error("truncation did not converge: residual {residual:.3e} exceeds {tol:.3e}")]
    NotConverged { residual: f64, tol: f64 },
    #[error("triangular factorization failed at column {column}")]
    SingularFactor { column: usize },
    #[error("tail check failed: deviation {deviation:.3e} exceeds {tol:.3e}")]
    TailTooLarge { deviation: f64, tol: f64 },
    #[error("operator is not positive definite at l = {l}")]
    NotPositive { l: f64 },
    #[error("block is singular at node {node}")]
    SingularBlock { node: usize },
    #[error("contraction violated at node {node}: norm {norm}")]
    ContractionViolated { node: usize, norm: f64 },
    #[error("orthogonal complement jumps at node {node}")]
    DiscontinuousComplement { node: usize },
    #[error("spectral parameter hits the pole of the generator")]
    PoleAtZ,
    #[error("sin h2 vanishes at t = {t}")]
    VanishingSine { t: f64 },
    #[error("probe control is too small near t = 0 (ratio {ratio:.3e})")]
    IllConditionedProbe { ratio: f64 },
    #[error("explicit data violate the matrix identity (deviation {deviation:.3e})")]
    IdentityViolated { deviation: f64 },
    #[error("S(x) is singular at x = {x}")]
    SingularS { x: f64 },
}

impl Error {
    /// Errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::GridTooSmall { .. }
                | Error::OutOfGrid { .. }
                | Error::WrongKind { .. }
                | Error::DegenerateD { .. }
                | Error::IdentityViolated { .. }
                | Error::PoleAtZ
        )
    }

    /// Short machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "Invalid",
            Error::SingularDenominator { .. } => "SingularDenominator",
            Error::NonFinite(_) => "NonFinite",
            Error::GridTooSmall { .. } => "GridTooSmall",
            Error::OutOfGrid { .. } => "OutOfGrid",
            Error::WrongKind { .. } => "WrongKind",
            Error::DegenerateD { .. } => "DegenerateD",
            Error::NotConverged { .. } => "NotConverged",
            Error::SingularFactor { .. } => "SingularFactor",
            Error::TailTooLarge { .. } => "TailTooLarge",
            Error::NotPositive { .. } => "NotPositive",
            Error::SingularBlock { .. } => "SingularBlock",
            Error::ContractionViolated { .. } => "ContractionViolated",
            Error::DiscontinuousComplement { .. } => "DiscontinuousComplement",
            Error::PoleAtZ => "PoleAtZ",
            Error::VanishingSine { .. } => "VanishingSine",
            Error::IllConditionedProbe { .. } => "IllConditionedProbe",
            Error::IdentityViolated { .. } => "IdentityViolated",
            Error::SingularS { .. } => "SingularS",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
