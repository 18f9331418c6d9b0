//! Exact evaluation of stopping strategies.
//!
//! Both the optimal rule and threshold rules depend on the history only
//! through the running maximum, so a forward pass over
//! `(step, reference, alive mass)` gives exact expectations in
//! `O(n * |grid| * |support|)`.

mod oracle;
mod threshold;

pub use oracle::{brute_force_optimal, brute_force_optimal_with_cap, DEFAULT_ORACLE_CAP};
pub use threshold::{
    calibrate_threshold, evaluate_threshold, prophet_threshold, threshold_selection_probability,
    RandomizedThresholdStrategy,
};

use serde::Serialize;
use thiserror::Error;

use crate::dp::{self, DpTable};
use crate::instance::{Instance, ReferenceGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluatorError {
    #[error("table was solved for a different instance")]
    TableInstanceMismatch,
    #[error("history tree has {leaves} leaves, above the cap of {cap}")]
    InstanceTooLarge { leaves: f64, cap: f64 },
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    AlphaOutOfRange(f64),
    #[error("the selected candidate has expected value 0; ratio undefined")]
    DivisionByZeroValue,
}

/// Expectations of one strategy on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub lambda: f64,
    pub expected_value: f64,
    pub expected_loss: f64,
    /// `expected_value - lambda * expected_loss`.
    pub expected_utility: f64,
    /// Probability of stopping at each 0-based step.
    pub stop_time_distribution: Vec<f64>,
    /// Law of the selected value as `(value, probability)`, increasing values.
    pub selected_value_distribution: Vec<(f64, f64)>,
}

impl EvaluationReport {
    fn from_parts(
        lambda: f64,
        expected_value: f64,
        expected_loss: f64,
        stop_time_distribution: Vec<f64>,
        selected_value_distribution: Vec<(f64, f64)>,
    ) -> Self {
        Self {
            lambda,
            expected_value,
            expected_loss,
            expected_utility: expected_value - lambda * expected_loss,
            stop_time_distribution,
            selected_value_distribution,
        }
    }

    /// `Pr(V >= threshold)` for the selected value `V`.
    pub fn prob_selected_at_least(&self, threshold: f64) -> f64 {
        self.selected_value_distribution
            .iter()
            .filter(|(v, _)| *v >= threshold)
            .map(|(_, p)| p)
            .sum()
    }

    /// `Pr(V > threshold)` for the selected value `V`.
    pub fn prob_selected_above(&self, threshold: f64) -> f64 {
        self.selected_value_distribution
            .iter()
            .filter(|(v, _)| *v > threshold)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Forward pass shared by every reference-compressed evaluation.
///
/// `stop_probability(step, reference, value)` works in grid indices and is
/// not consulted at the last step, which always stops.
pub(crate) fn forward<F>(instance: &Instance, grid: &ReferenceGrid, mut stop_probability: F) -> EvaluationReport
where
    F: FnMut(usize, usize, usize) -> f64,
{
    let n = instance.len();
    let mut alive = vec![0.0; grid.len()];
    alive[grid.initial_index()] = 1.0;
    let mut selected = vec![0.0; grid.len()];
    let mut stop_time = vec![0.0; n];
    let (mut value, mut loss) = (0.0, 0.0);

    for step in 0..n {
        let last = step + 1 == n;
        let mut next = vec![0.0; grid.len()];
        let atoms = instance.candidates()[step].atoms();
        for (vi, &mass) in alive.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let v = grid.value(vi);
            for (atom, &xi) in atoms.iter().zip(grid.atom_indices(step)) {
                let reach = mass * atom.probability;
                let stop = if last { 1.0 } else { stop_probability(step, vi, xi) };
                if stop > 0.0 {
                    let m = reach * stop;
                    value += m * atom.value;
                    loss += m * (v - atom.value).max(0.0);
                    stop_time[step] += m;
                    selected[xi] += m;
                }
                if stop < 1.0 {
                    next[vi.max(xi)] += reach * (1.0 - stop);
                }
            }
        }
        alive = next;
    }

    let law = selected
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| (grid.value(i), p))
        .collect();
    EvaluationReport::from_parts(instance.lambda(), value, loss, stop_time, law)
}

/// Expectations of the optimal rule encoded in `table`.
pub fn evaluate_policy(instance: &Instance, table: &DpTable) -> Result<EvaluationReport, EvaluatorError> {
    if table.fingerprint() != instance.fingerprint() {
        return Err(EvaluatorError::TableInstanceMismatch);
    }
    Ok(forward(instance, table.grid(), |step, v, x| {
        if table.stops_at(step, v, x) {
            1.0
        } else {
            0.0
        }
    }))
}

/// Solve and evaluate in one call.
pub fn optimal_report(instance: &Instance) -> EvaluationReport {
    let table = dp::solve(instance);
    evaluate_policy(instance, &table).expect("table solved for this instance")
}

/// Prophet and rational-agent comparisons for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub lambda: f64,
    /// `E[V*]`.
    pub expected_max: f64,
    /// `E[V_lambda]`, the optimal biased agent's selected value.
    pub biased_value: f64,
    /// `E[V_0]`, the rational agent's selected value on the same instance.
    pub unbiased_value: f64,
    pub prophet_ratio: f64,
    pub unbiased_ratio: f64,
}

pub fn ratio_report(instance: &Instance) -> Result<RatioReport, EvaluatorError> {
    let biased = optimal_report(instance).expected_value;
    let rational = optimal_report(&instance.with_lambda(0.0).expect("zero is a valid weight")).expected_value;
    if biased == 0.0 {
        return Err(EvaluatorError::DivisionByZeroValue);
    }
    let expected_max = instance.max_distribution().expectation();
    Ok(RatioReport {
        lambda: instance.lambda(),
        expected_max,
        biased_value: biased,
        unbiased_value: rational,
        prophet_ratio: expected_max / biased,
        unbiased_ratio: rational / biased,
    })
}
