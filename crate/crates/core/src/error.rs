use alloc::boxed::Box;
use alloc::string::String;

/// Errors raised by the model, sampling and estimation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter matrix is not positive definite, distribution is not normalizable")]
    NotNormalizable,

    #[error("column {column} is constant")]
    DegenerateColumn { column: usize },

    #[error("numerical divergence: {0}")]
    Divergence(String),

    #[error("degenerate theta: {0}")]
    DegenerateTheta(String),

    #[error("infeasible graph spec: {0}")]
    InfeasibleSpec(String),

    #[error("unstable Hawkes parameters: branching spectral radius {0} >= 1")]
    UnstableHawkes(f64),

    #[error("GEV fit failed: {0}")]
    FitFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("node {node}: {source}")]
    AtNode { node: usize, source: Box<Error> },

    #[error("lambda {lambda}: {source}")]
    AtLambda { lambda: f64, source: Box<Error> },

    #[error("column {column}: {source}")]
    AtColumn { column: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_node(self, node: usize) -> Self {
        Error::AtNode { node, source: Box::new(self) }
    }

    pub(crate) fn at_lambda(self, lambda: f64) -> Self {
        Error::AtLambda { lambda, source: Box::new(self) }
    }

    pub(crate) fn at_column(self, column: usize) -> Self {
        Error::AtColumn { column, source: Box::new(self) }
    }

    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NotNormalizable => "not-normalizable",
            Error::DegenerateColumn { .. } => "degenerate-column",
            Error::Divergence(_) => "numerical-divergence",
            Error::DegenerateTheta(_) => "degenerate-theta",
            Error::InfeasibleSpec(_) => "infeasible-spec",
            Error::UnstableHawkes(_) => "unstable-hawkes",
            Error::FitFailure(_) => "fit-failure",
            Error::Precondition(_) => "precondition",
            Error::AtNode { source, .. }
            | Error::AtLambda { source, .. }
            | Error::AtColumn { source, .. } => source.category(),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
