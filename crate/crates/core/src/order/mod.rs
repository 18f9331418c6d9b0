//! Random arrival order and chosen orderings.

mod ordering;
mod random_order;
mod rho;

pub use ordering::{
    best_ordering_exhaustive, evaluate_ordering, ordering_by_high, ordering_around_best_low, two_point_orderings,
    two_point_orderings_for, OrderingResult, EXHAUSTIVE_CAP,
};
pub use random_order::{
    random_order_value, RandomOrderMode, RandomOrderValue, SubsetPolicy, EXACT_SUBSET_CAP,
};
pub use rho::{rho_residual, solve_rho, RhoSolution, DEFAULT_RHO_TOLERANCE};

use thiserror::Error;

use crate::instance::InstanceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("loss weight must be finite and nonnegative, got {0}")]
    InvalidLambda(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("rho bisection stopped with residual {residual} at lambda {lambda}")]
    ToleranceNotReached { lambda: f64, residual: f64 },
    #[error("{n} distinct candidates exceed the subset table cap of {cap}")]
    ExactModeTooLarge { n: usize, cap: usize },
    #[error("{n} candidates exceed the exhaustive ordering cap of {cap}")]
    TooManyCandidates { n: usize, cap: usize },
    #[error("candidate {index} is not a two-point distribution")]
    NotTwoPoint { index: usize },
    #[error("Monte Carlo needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}
