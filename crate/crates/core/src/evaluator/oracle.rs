//! Brute-force optimum over the full realization-history tree.
//!
//! Each node carries the whole history of realized values; the reference is
//! recomputed from it at every stop. Exponential in `n`, used only to check
//! the compressed solver.

use std::collections::BTreeMap;

use super::{EvaluationReport, EvaluatorError};
use crate::dp::DEFAULT_INDIFFERENCE_TOLERANCE;
use crate::instance::Instance;

/// Largest number of full realization paths the oracle will walk.
pub const DEFAULT_ORACLE_CAP: f64 = 1e6;

struct Outcome {
    utility: f64,
    value: f64,
    loss: f64,
    stop_time: Vec<f64>,
    selected: BTreeMap<u64, f64>,
}

impl Outcome {
    fn stop_here(step: usize, n: usize, value: f64, loss: f64, utility: f64) -> Self {
        let mut stop_time = vec![0.0; n];
        stop_time[step] = 1.0;
        Self { utility, value, loss, stop_time, selected: BTreeMap::from([(value.to_bits(), 1.0)]) }
    }

    fn accumulate(&mut self, p: f64, other: Outcome) {
        self.utility += p * other.utility;
        self.value += p * other.value;
        self.loss += p * other.loss;
        for (a, b) in self.stop_time.iter_mut().zip(other.stop_time) {
            *a += p * b;
        }
        for (k, q) in other.selected {
            *self.selected.entry(k).or_insert(0.0) += p * q;
        }
    }
}

struct Tree<'a> {
    instance: &'a Instance,
    slack: f64,
}

impl Tree<'_> {
    fn node(&self, history: &mut Vec<f64>) -> Outcome {
        let n = self.instance.len();
        let step = history.len();
        let lambda = self.instance.lambda();
        let reference = history
            .iter()
            .copied()
            .fold(self.instance.initial_reference(), f64::max);

        let mut total = Outcome {
            utility: 0.0,
            value: 0.0,
            loss: 0.0,
            stop_time: vec![0.0; n],
            selected: BTreeMap::new(),
        };
        for atom in self.instance.candidates()[step].atoms() {
            let x = atom.value;
            let shortfall = (reference - x).max(0.0);
            let stop_utility = x - lambda * shortfall;
            let branch = if step + 1 == n {
                Outcome::stop_here(step, n, x, shortfall, stop_utility)
            } else {
                history.push(x);
                let cont = self.node(history);
                history.pop();
                if stop_utility + self.slack >= cont.utility {
                    Outcome::stop_here(step, n, x, shortfall, stop_utility)
                } else {
                    cont
                }
            };
            total.accumulate(atom.probability, branch);
        }
        total
    }
}

pub fn brute_force_optimal(instance: &Instance) -> Result<EvaluationReport, EvaluatorError> {
    brute_force_optimal_with_cap(instance, DEFAULT_ORACLE_CAP)
}

pub fn brute_force_optimal_with_cap(instance: &Instance, cap: f64) -> Result<EvaluationReport, EvaluatorError> {
    let leaves: f64 = instance
        .candidates()
        .iter()
        .map(|d| d.support_size() as f64)
        .product();
    if leaves > cap {
        return Err(EvaluatorError::InstanceTooLarge { leaves, cap });
    }
    let largest = instance
        .candidates()
        .iter()
        .map(|d| d.max_value())
        .fold(instance.initial_reference(), f64::max);
    let tree = Tree { instance, slack: DEFAULT_INDIFFERENCE_TOLERANCE * largest.max(1.0) };
    let root = tree.node(&mut Vec::with_capacity(instance.len()));
    let law = root.selected.into_iter().map(|(k, p)| (f64::from_bits(k), p)).collect();
    Ok(EvaluationReport::from_parts(instance.lambda(), root.value, root.loss, root.stop_time, law))
}
