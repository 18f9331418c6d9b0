//! Randomized threshold rules calibrated against the prophet's law.
//!
//! The rule stops on the first value above `theta`, stops on a value equal
//! to `theta` with probability `q` (independently each time), never stops
//! below `theta`, and takes the last candidate if it gets there.

use serde::Serialize;

use super::{forward, EvaluationReport, EvaluatorError};
use crate::distributions::{DiscreteDistribution, PROBABILITY_TOLERANCE};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomizedThresholdStrategy {
    pub theta: f64,
    pub q: f64,
    /// Target for `Pr(selected value >= theta)`.
    pub alpha: f64,
    /// `Pr(V* > theta)`.
    pub prophet_above: f64,
    /// `Pr(V* >= theta)`.
    pub prophet_at_least: f64,
}

/// `theta = inf { t : Pr(V* > t) < alpha }`, always an atom of `V*`.
///
/// `Pr(V* > t)` is a right-continuous step function, so the infimum is the
/// smallest atom whose upper tail drops below `alpha`. Tails within
/// [`PROBABILITY_TOLERANCE`] of `alpha` count as equal to it.
pub fn prophet_threshold(vstar: &DiscreteDistribution, alpha: f64) -> Result<f64, EvaluatorError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EvaluatorError::AlphaOutOfRange(alpha));
    }
    Ok(vstar
        .values()
        .find(|&x| vstar.tail_probability(x, true) < alpha - PROBABILITY_TOLERANCE)
        .unwrap_or_else(|| vstar.max_value()))
}

/// `Pr(selected value >= theta)` for the rule `(theta, q)`, in closed form.
///
/// The event fails only when every earlier candidate is passed and the
/// forced last pick lands below `theta`.
pub fn threshold_selection_probability(instance: &Instance, theta: f64, q: f64) -> f64 {
    let candidates = instance.candidates();
    let (last, earlier) = candidates.split_last().expect("nonempty instance");
    let pass: f64 = earlier
        .iter()
        .map(|d| d.prob_below(theta) + (1.0 - q) * d.mass_at(theta))
        .product();
    1.0 - last.prob_below(theta) * pass
}

/// Picks `theta` from the prophet's law and the smallest tie-breaking
/// probability `q` with `Pr(selected value >= theta) >= alpha`.
///
/// The selection probability rises continuously from `q = 0` to `q = 1`, so
/// `alpha` is hit exactly whenever it is at least the `q = 0` value. When the
/// last candidate has an atom at `theta`, the forced last pick can push the
/// `q = 0` value above `alpha`; then `q = 0` and the probability overshoots.
pub fn calibrate_threshold(instance: &Instance, alpha: f64) -> Result<RandomizedThresholdStrategy, EvaluatorError> {
    let vstar = instance.max_distribution();
    let theta = prophet_threshold(&vstar, alpha)?;
    let target = alpha - PROBABILITY_TOLERANCE;
    let f = |q: f64| threshold_selection_probability(instance, theta, q);

    let q = if f(0.0) >= target {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) >= alpha {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(RandomizedThresholdStrategy {
        theta,
        q,
        alpha,
        prophet_above: vstar.tail_probability(theta, true),
        prophet_at_least: vstar.tail_probability(theta, false),
    })
}

/// Exact expectations of a randomized threshold rule. Loss is measured
/// against the running maximum, including the instance's initial reference.
pub fn evaluate_threshold(instance: &Instance, strategy: &RandomizedThresholdStrategy) -> EvaluationReport {
    let grid = instance.reference_grid();
    forward(instance, &grid, |_, _, xi| {
        let x = grid.value(xi);
        if x > strategy.theta {
            1.0
        } else if x == strategy.theta {
            strategy.q
        } else {
            0.0
        }
    })
}
