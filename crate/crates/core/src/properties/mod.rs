//! Machine-checkable monotonicity and ratio properties.
//!
//! | id  | property |
//! |-----|----------|
//! | P1  | `U[v, t]` is nonincreasing in the reference `v` |
//! | P2  | `U[v, t]` is nonincreasing in `lambda` |
//! | P3  | stopping at `lambda` implies stopping at every `lambda' > lambda` |
//! | P4  | `E[V_lambda]` is nonincreasing in `lambda` |
//! | P5  | appending a candidate never lowers utility or value |
//! | P6  | prepending keeps utility and value at least `1 / (lambda + 1)` of the original |
//! | P7  | `E[V*] / E[V_lambda] <= lambda + 2` |
//! | P8  | `E[V_0] / E[V_lambda] <= lambda + 1` |
//! | P9  | random order: `E[V*] / value <= n` |
//! | P10 | random order: `E[V*] / value <= rho(lambda)` |
//! | P11 | calibrated threshold rule hits `alpha`, loses at most `(1 - alpha) theta`, earns `E[V*] / (lambda + 2)` |
//! | P12 | two-point candidates: best of the two constructed orderings `>= E[V*] / 2` |

mod checks;
mod generator;
mod suite;

pub use checks::check;
pub use generator::{generate_instances, generate_two_point, GeneratedInstance, GeneratorConfig};
pub use suite::{curated_cases, run_cases, run_suite, SuiteSummary};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::distributions::DiscreteDistribution;
use crate::dp::SolveOptions;
use crate::instance::Instance;

/// Tolerance for the non-strict inequalities.
pub const PROPERTY_TOLERANCE: f64 = 1e-9;

/// Tolerance for the calibrated selection probability and loss bound.
pub const CALIBRATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PropertyId {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
    P8,
    P9,
    P10,
    P11,
    P12,
}

impl PropertyId {
    pub const ALL: [PropertyId; 12] = [
        Self::P1,
        Self::P2,
        Self::P3,
        Self::P4,
        Self::P5,
        Self::P6,
        Self::P7,
        Self::P8,
        Self::P9,
        Self::P10,
        Self::P11,
        Self::P12,
    ];

    pub fn description(self) -> &'static str {
        match self {
            Self::P1 => "utility nonincreasing in reference",
            Self::P2 => "utility nonincreasing in lambda",
            Self::P3 => "higher lambda stops whenever lower lambda stops",
            Self::P4 => "selected value nonincreasing in lambda",
            Self::P5 => "appending a candidate never hurts",
            Self::P6 => "prepending keeps 1/(lambda+1) of utility and value",
            Self::P7 => "prophet ratio at most lambda+2",
            Self::P8 => "unbiased ratio at most lambda+1",
            Self::P9 => "random-order prophet ratio at most n",
            Self::P10 => "random-order prophet ratio at most rho",
            Self::P11 => "calibrated threshold rule",
            Self::P12 => "best constructed two-point ordering within factor 2",
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropertyError {
    #[error("{property} does not apply: {reason}")]
    PreconditionViolated { property: PropertyId, reason: String },
}

/// Outcome of one property on one instance at one weight (or weight pair).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyVerdict {
    pub property: PropertyId,
    pub case: String,
    pub instance_digest: String,
    pub lambdas: Vec<f64>,
    pub passed: bool,
    /// Where the inequality failed; present iff `passed` is false.
    pub witness: Option<serde_json::Value>,
    /// Smallest margin by which the inequalities held (negative if violated).
    pub slack: f64,
    pub warning: Option<String>,
}

/// An instance to check together with the weights to check it at.
///
/// The instance's own weight is ignored. `extra` is the candidate used by
/// the append and prepend checks.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCase {
    pub name: String,
    pub instance: Instance,
    pub extra: Option<DiscreteDistribution>,
    pub lambdas: Vec<f64>,
}

impl PropertyCase {
    pub fn digest(&self) -> String {
        let base = self.instance.with_lambda(0.0).expect("zero weight is valid");
        format!("{:016x}", base.fingerprint())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub tolerance: f64,
    pub solve: SolveOptions,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { tolerance: PROPERTY_TOLERANCE, solve: SolveOptions::default() }
    }
}

impl SuiteOptions {
    /// Options with the first decision of every solved table inverted.
    pub fn mutated() -> Self {
        Self {
            solve: SolveOptions { flip_first_decision: true, ..SolveOptions::default() },
            ..Self::default()
        }
    }
}
