//! Backward induction for the loss-averse stopping problem.
//!
//! State is `(step, reference)` where the reference is the best value seen so
//! far (or the initial reference). With `d(v, x) = (v - x)^+`:
//!
//! ```text
//! U[v, n-1] = E[x - lambda * d(v, x)]
//! U[v, t]   = E[max(U[max(v, x), t+1], x - lambda * d(v, x))]
//! ```
//!
//! and the agent stops at step `t` iff `x - lambda * d(v, x) >= U[max(v, x), t+1]`.

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Instance, ReferenceGrid};

/// Relative slack under which stop and continue count as indifferent.
///
/// The slack is scaled by `max(1, largest grid value)`. Exact ties in the
/// model come out of floating point arithmetic a few ulps either side of
/// zero; without slack the tie rule would be decided by rounding.
pub const DEFAULT_INDIFFERENCE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpError {
    #[error("reference value {0} is not on the table's grid")]
    ReferenceNotOnGrid(f64),
    #[error("candidate value {0} is not on the table's grid")]
    ValueNotOnGrid(f64),
    #[error("step {step} is out of range for {n} candidates")]
    TimeOutOfRange { step: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Stop,
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub indifference_tolerance: f64,
    /// Diagnostic mutation: invert the decision at the first step, initial
    /// reference, smallest value of the first candidate. Used to check that
    /// the property suite notices a broken rule.
    pub flip_first_decision: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            indifference_tolerance: DEFAULT_INDIFFERENCE_TOLERANCE,
            flip_first_decision: false,
        }
    }
}

/// Solved value function `U[step][reference index]`.
///
/// Steps are 0-based. Row `n` is an all-zero sentinel that no decision reads.
#[derive(Debug, Clone)]
pub struct DpTable {
    grid: ReferenceGrid,
    utility: Vec<Vec<f64>>,
    lambda: f64,
    n: usize,
    fingerprint: u64,
    slack: f64,
    flip_first: Option<usize>,
}

pub fn solve(instance: &Instance) -> DpTable {
    solve_with(instance, SolveOptions::default())
}

pub fn solve_with(instance: &Instance, options: SolveOptions) -> DpTable {
    let grid = instance.reference_grid();
    let n = instance.len();
    let lambda = instance.lambda();
    let mut utility = vec![vec![0.0; grid.len()]; n + 1];

    for step in (0..n).rev() {
        let atoms = instance.candidates()[step].atoms();
        let indices = grid.atom_indices(step);
        let last = step + 1 == n;
        for vi in 0..grid.len() {
            let v = grid.value(vi);
            let mut total = 0.0;
            for (atom, &xi) in atoms.iter().zip(indices) {
                let x = atom.value;
                let stop = x - lambda * (v - x).max(0.0);
                let best = if last { stop } else { stop.max(utility[step + 1][vi.max(xi)]) };
                total += atom.probability * best;
            }
            utility[step][vi] = total;
        }
    }

    let scale = grid.values().last().copied().unwrap_or(0.0).max(1.0);
    let flip_first = options
        .flip_first_decision
        .then(|| grid.atom_indices(0)[0]);
    DpTable {
        utility,
        lambda,
        n,
        fingerprint: instance.fingerprint(),
        slack: options.indifference_tolerance * scale,
        flip_first,
        grid,
    }
}

impl DpTable {
    pub fn grid(&self) -> &ReferenceGrid {
        &self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Absolute indifference slack used by every stop comparison.
    pub fn slack(&self) -> f64 {
        self.slack
    }

    /// Expected utility of optimal play from the initial reference.
    pub fn root_utility(&self) -> f64 {
        self.utility[0][self.grid.initial_index()]
    }

    /// `U[reference, step]`; `step == n` is the zero sentinel.
    pub fn utility(&self, step: usize, reference: usize) -> f64 {
        self.utility[step][reference]
    }

    pub fn utility_rows(&self) -> &[Vec<f64>] {
        &self.utility
    }

    /// Utility of stopping on value index `value` with reference index `reference`.
    pub fn stop_utility(&self, reference: usize, value: usize) -> f64 {
        let v = self.grid.value(reference);
        let x = self.grid.value(value);
        x - self.lambda * (v - x).max(0.0)
    }

    /// Utility of passing on value index `value`; `None` at the last step.
    pub fn continuation_utility(&self, step: usize, reference: usize, value: usize) -> Option<f64> {
        (step + 1 < self.n).then(|| self.utility[step + 1][reference.max(value)])
    }

    /// Bellman decision in index space. The last step always stops.
    pub fn stops_at(&self, step: usize, reference: usize, value: usize) -> bool {
        let stop = match self.continuation_utility(step, reference, value) {
            None => return true,
            Some(cont) => self.stop_utility(reference, value) + self.slack >= cont,
        };
        match self.flip_first {
            Some(first) if step == 0 && reference == self.grid.initial_index() && value == first => {
                !stop
            }
            _ => stop,
        }
    }

    /// Stop/continue for a reference and candidate value given as numbers.
    pub fn decide(&self, step: usize, reference: f64, value: f64) -> Result<Decision, DpError> {
        if step >= self.n {
            return Err(DpError::TimeOutOfRange { step, n: self.n });
        }
        let r = self
            .grid
            .index_of(reference)
            .ok_or(DpError::ReferenceNotOnGrid(reference))?;
        let x = self.grid.index_of(value).ok_or(DpError::ValueNotOnGrid(value))?;
        Ok(if self.stops_at(step, r, x) { Decision::Stop } else { Decision::Continue })
    }

    /// History-dependent stop thresholds for every `(step, reference)`.
    ///
    /// Where the reference exceeds the continuation utility `c`, the
    /// threshold is `(c + lambda * v) / (1 + lambda)`; otherwise it is the
    /// smallest grid value `u >= v` worth stopping on. The closed form is
    /// pulled onto the grid interval that the Bellman decisions actually
    /// induce, so `stop <=> value >= threshold` holds at every grid value
    /// even when rounding sits on a tie. The last step stores `-inf`.
    pub fn thresholds(&self) -> ThresholdPolicy {
        let g = self.grid.values();
        let mut theta = vec![vec![f64::NEG_INFINITY; g.len()]; self.n];
        for step in 0..self.n.saturating_sub(1) {
            for (vi, &v) in g.iter().enumerate() {
                let Some(first_stop) = (0..g.len()).find(|&xi| self.stops_at(step, vi, xi)) else {
                    theta[step][vi] = f64::INFINITY;
                    continue;
                };
                let cont = self.utility[step + 1][vi];
                theta[step][vi] = if v > cont {
                    let closed = (cont + self.lambda * v) / (1.0 + self.lambda);
                    let upper = g[first_stop];
                    match first_stop.checked_sub(1).map(|i| g[i]) {
                        _ if closed > upper => upper,
                        Some(below) if closed <= below => below.next_up(),
                        _ => closed,
                    }
                } else {
                    g[first_stop]
                };
            }
        }
        ThresholdPolicy { grid: g.to_vec(), theta }
    }

    pub fn dump(&self) -> TableDump {
        let policy = self.thresholds();
        TableDump {
            lambda: self.lambda,
            grid: self.grid.values().to_vec(),
            utility: self.utility[..self.n].to_vec(),
            theta: policy.theta,
        }
    }
}

/// Stop thresholds `theta[step][reference index]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdPolicy {
    pub grid: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
}

impl ThresholdPolicy {
    pub fn threshold(&self, step: usize, reference: usize) -> f64 {
        self.theta[step][reference]
    }

    pub fn decide(&self, step: usize, reference: usize, value: f64) -> Decision {
        if value >= self.theta[step][reference] {
            Decision::Stop
        } else {
            Decision::Continue
        }
    }
}

/// Serializable snapshot of a solved table, rows indexed by step.
#[derive(Debug, Clone, Serialize)]
pub struct TableDump {
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub utility: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
}
