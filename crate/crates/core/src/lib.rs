//! Optimal stopping for agents who judge each candidate against the best
//! value seen so far.
//!
//! A `lambda`-biased agent that selects value `x` while holding reference
//! `v` (the running maximum) receives `x - lambda * (v - x)^+`. This crate
//! solves the optimal rule exactly, evaluates it and threshold rules,
//! compares them with the prophet who knows all values in advance, handles
//! random and chosen arrival orders, and checks the structural properties
//! of the model on generated instances.
//!
//! ```
//! use refstop::{scenarios, optimal_report};
//!
//! let report = optimal_report(&scenarios::section41(2.0, 0.0));
//! assert_eq!(report.expected_value, 1.0);
//! ```

pub mod distributions;
pub mod dp;
pub mod evaluator;
pub mod instance;
pub mod order;
pub mod properties;
pub mod reproduce;
pub mod scenarios;

pub use distributions::{max_distribution, Atom, DiscreteDistribution, DistributionError, TwoPointDistribution};
pub use dp::{solve, solve_with, Decision, DpError, DpTable, SolveOptions, ThresholdPolicy};
pub use evaluator::{
    brute_force_optimal, calibrate_threshold, evaluate_policy, evaluate_threshold, optimal_report, ratio_report,
    EvaluationReport, EvaluatorError, RandomizedThresholdStrategy, RatioReport,
};
pub use instance::{Instance, InstanceError, InstanceFile, InstanceFileError, ReferenceGrid};
pub use order::{
    best_ordering_exhaustive, random_order_value, solve_rho, two_point_orderings, OrderError, OrderingResult,
    RandomOrderMode, RandomOrderValue, RhoSolution,
};
pub use properties::{
    run_suite, GeneratorConfig, PropertyCase, PropertyError, PropertyId, PropertyVerdict, SuiteOptions,
};
pub use reproduce::{reproduce, ReproduceError, ReproduceParams, Reproduction, Scenario};

use thiserror::Error;

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    InstanceFile(#[from] InstanceFileError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Evaluator(#[from] EvaluatorError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Reproduce(#[from] ReproduceError),
}
