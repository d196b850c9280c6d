//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by discretization, weight computation and solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spacing function is not strictly positive at {location:?} (value {value})")]
    NonPositiveSpacing { location: Vec<f64>, value: f64 },

    #[error("node {node}: {source}")]
    AtNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("adaptive iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "fill exceeded {limit} nodes; the spacing function is collapsing towards zero somewhere"
    )]
    FillBudgetExceeded { limit: usize },

    #[error("duplicate stencil points (indices {0} and {1})")]
    DuplicateStencilPoints(usize, usize),

    #[error("stencil system is singular or too ill-conditioned (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    #[error("node {node} has only {available} neighbours, {required} required")]
    NotEnoughNeighbors {
        node: usize,
        available: usize,
        required: usize,
    },

    #[error("missing differentiation weights for operator {0}")]
    MissingOperator(String),

    #[error("boundary segment {0:?} has no boundary condition")]
    MissingBoundaryCondition(String),

    #[error("linear solver failed: {reason} (residual {residual:.3e})")]
    SolverFailure { reason: String, residual: f64 },

    #[error("singular evaluation point: {0}")]
    SingularPoint(String),

    #[error("case constraint violated: {0}")]
    CaseConstraint(String),

    #[error("exact field is identically zero; relative norm undefined")]
    ZeroReference,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn at_node(self, node: usize) -> Self {
        Error::AtNode {
            node,
            source: Box::new(self),
        }
    }

    pub fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
