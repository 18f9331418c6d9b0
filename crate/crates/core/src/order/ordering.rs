//! Choosing the arrival order to maximize the expected selected value.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use super::OrderError;
use crate::distributions::{DiscreteDistribution, TwoPointDistribution};
use crate::evaluator::optimal_report;
use crate::instance::Instance;

/// Largest candidate count for exhaustive search.
pub const EXHAUSTIVE_CAP: usize = 8;

const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingResult {
    /// 0-based candidate indices in arrival order.
    pub permutation: Vec<usize>,
    pub expected_value: f64,
    pub expected_utility: f64,
}

/// Optimal-rule expectations when candidates arrive in `order`.
pub fn evaluate_ordering(instance: &Instance, order: &[usize]) -> OrderingResult {
    let r = optimal_report(&instance.permuted(order));
    OrderingResult {
        permutation: order.to_vec(),
        expected_value: r.expected_value,
        expected_utility: r.expected_utility,
    }
}

/// Decreasing `high`, lower index first on ties.
pub fn ordering_by_high(candidates: &[TwoPointDistribution]) -> Vec<usize> {
    (0..candidates.len())
        .sorted_by(|&a, &b| candidates[b].high.total_cmp(&candidates[a].high).then(a.cmp(&b)))
        .collect()
}

/// Candidates with `high >= E[X#]` by decreasing `high`, then `X#`, then the
/// rest by decreasing `high`, where `X#` has the largest `low`.
pub fn ordering_around_best_low(candidates: &[TwoPointDistribution]) -> Vec<usize> {
    let Some(best) = (0..candidates.len()).reduce(|a, b| if candidates[b].low > candidates[a].low { b } else { a })
    else {
        return Vec::new();
    };
    let pivot = candidates[best].expectation();
    let (before, after): (Vec<usize>, Vec<usize>) = ordering_by_high(candidates)
        .into_iter()
        .filter(|&i| i != best)
        .partition(|&i| candidates[i].high >= pivot);
    before.into_iter().chain([best]).chain(after).collect()
}

/// Both constructed orderings, evaluated under the optimal rule from a zero
/// reference.
pub fn two_point_orderings(
    candidates: &[TwoPointDistribution],
    lambda: f64,
) -> Result<(OrderingResult, OrderingResult), OrderError> {
    let dists: Vec<DiscreteDistribution> = candidates.iter().map(TwoPointDistribution::to_distribution).collect();
    let instance = Instance::new(dists, lambda, 0.0)?;
    Ok((
        evaluate_ordering(&instance, &ordering_by_high(candidates)),
        evaluate_ordering(&instance, &ordering_around_best_low(candidates)),
    ))
}

/// [`two_point_orderings`] for an instance whose candidates have at most two
/// atoms. The instance's initial reference is ignored.
pub fn two_point_orderings_for(instance: &Instance) -> Result<(OrderingResult, OrderingResult), OrderError> {
    let candidates = instance
        .candidates()
        .iter()
        .enumerate()
        .map(|(index, d)| TwoPointDistribution::try_from(d).map_err(|_| OrderError::NotTwoPoint { index }))
        .collect::<Result<Vec<_>, _>>()?;
    two_point_orderings(&candidates, instance.lambda())
}

/// Best arrival order by expected selected value over all `n!` orders.
/// Ties within `1e-12` keep the lexicographically smallest permutation.
pub fn best_ordering_exhaustive(instance: &Instance) -> Result<OrderingResult, OrderError> {
    let n = instance.len();
    if n > EXHAUSTIVE_CAP {
        return Err(OrderError::TooManyCandidates { n, cap: EXHAUSTIVE_CAP });
    }
    let results: Vec<OrderingResult> = (0..n)
        .permutations(n)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|order| evaluate_ordering(instance, order))
        .collect();
    let best = results
        .into_iter()
        .reduce(|best, r| if r.expected_value > best.expected_value + TIE_TOLERANCE { r } else { best })
        .expect("at least one ordering");
    Ok(best)
}
