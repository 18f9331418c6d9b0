//! Candidates arrive in a uniformly random order.
//!
//! The agent knows the whole candidate set and sees which candidate arrives,
//! so the state is `(remaining set, reference)`. With `S` the remaining set
//! and `|S| > 1`:
//!
//! ```text
//! U[S, v] = 1/|S| * sum_{i in S} E_{x ~ X_i}[max(x - lambda (v - x)^+, U[S - i, max(v, x)])]
//! ```

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::OrderError;
use crate::dp::DEFAULT_INDIFFERENCE_TOLERANCE;
use crate::evaluator::optimal_report;
use crate::instance::{Instance, ReferenceGrid};

/// Largest candidate count for the subset table.
pub const EXACT_SUBSET_CAP: usize = 10;

const MC_CHUNKS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomOrderMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomOrderValue {
    pub expected_value: f64,
    pub expected_utility: f64,
    /// Standard error of `expected_value`; `None` in exact mode.
    pub std_error: Option<f64>,
    pub samples: Option<usize>,
}

/// Optimal adaptive rule for random arrival, solved over all subsets.
#[derive(Debug, Clone)]
pub struct SubsetPolicy {
    grid: ReferenceGrid,
    lambda: f64,
    n: usize,
    slack: f64,
    /// Indexed `[mask * grid.len() + reference]`.
    utility: Vec<f64>,
    value: Vec<f64>,
    loss: Vec<f64>,
}

impl SubsetPolicy {
    pub fn solve(instance: &Instance) -> Result<Self, OrderError> {
        let n = instance.len();
        if n > EXACT_SUBSET_CAP {
            return Err(OrderError::ExactModeTooLarge { n, cap: EXACT_SUBSET_CAP });
        }
        let grid = instance.reference_grid();
        let g = grid.len();
        let lambda = instance.lambda();
        let slack = DEFAULT_INDIFFERENCE_TOLERANCE * grid.values().last().copied().unwrap_or(0.0).max(1.0);
        let size = 1usize << n;
        let mut policy = Self {
            utility: vec![0.0; size * g],
            value: vec![0.0; size * g],
            loss: vec![0.0; size * g],
            grid,
            lambda,
            n,
            slack,
        };

        // Every proper subset of a mask is numerically smaller, so increasing
        // mask order visits children first.
        for mask in 1..size {
            let count = mask.count_ones() as f64;
            for vi in 0..g {
                let v = policy.grid.value(vi);
                let (mut u, mut val, mut los) = (0.0, 0.0, 0.0);
                for i in (0..n).filter(|i| mask & (1 << i) != 0) {
                    let rest = mask & !(1 << i);
                    let atoms = instance.candidates()[i].atoms();
                    for (atom, &xi) in atoms.iter().zip(policy.grid.atom_indices(i)) {
                        let x = atom.value;
                        let shortfall = (v - x).max(0.0);
                        let stop = x - lambda * shortfall;
                        let p = atom.probability;
                        if policy.stops(rest, vi, xi, stop) {
                            u += p * stop;
                            val += p * x;
                            los += p * shortfall;
                        } else {
                            let k = rest * g + vi.max(xi);
                            u += p * policy.utility[k];
                            val += p * policy.value[k];
                            los += p * policy.loss[k];
                        }
                    }
                }
                let k = mask * g + vi;
                policy.utility[k] = u / count;
                policy.value[k] = val / count;
                policy.loss[k] = los / count;
            }
        }
        Ok(policy)
    }

    fn stops(&self, rest: usize, vi: usize, xi: usize, stop_utility: f64) -> bool {
        rest == 0 || stop_utility + self.slack >= self.utility[rest * self.grid.len() + vi.max(xi)]
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn root(&self) -> RandomOrderValue {
        let k = ((1usize << self.n) - 1) * self.grid.len() + self.grid.initial_index();
        RandomOrderValue {
            expected_value: self.value[k],
            expected_utility: self.utility[k],
            std_error: None,
            samples: None,
        }
    }

    /// Exact `(E[value], E[utility])` of this rule when the arrival order is
    /// the given permutation.
    pub fn evaluate_permutation(&self, instance: &Instance, order: &[usize]) -> (f64, f64) {
        let g = self.grid.len();
        let mut alive = vec![0.0; g];
        alive[self.grid.initial_index()] = 1.0;
        let mut mask = (1usize << self.n) - 1;
        let (mut value, mut loss) = (0.0, 0.0);
        for &i in order {
            let rest = mask & !(1 << i);
            let mut next = vec![0.0; g];
            let atoms = instance.candidates()[i].atoms();
            for (vi, &mass) in alive.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                let v = self.grid.value(vi);
                for (atom, &xi) in atoms.iter().zip(self.grid.atom_indices(i)) {
                    let reach = mass * atom.probability;
                    let shortfall = (v - atom.value).max(0.0);
                    if self.stops(rest, vi, xi, atom.value - self.lambda * shortfall) {
                        value += reach * atom.value;
                        loss += reach * shortfall;
                    } else {
                        next[vi.max(xi)] += reach;
                    }
                }
            }
            alive = next;
            mask = rest;
        }
        (value, value - self.lambda * loss)
    }
}

fn all_identical(instance: &Instance) -> bool {
    let c = instance.candidates();
    c.iter().all(|d| *d == c[0])
}

/// Expected selected value and utility of the optimal adaptive rule under a
/// uniformly random arrival order.
///
/// Identical candidates make the order irrelevant, so they are solved by the
/// fixed-order table for any `n`. Monte Carlo draws permutations from
/// `(seed, chunk)` substreams and evaluates the adaptive rule exactly along
/// each one.
pub fn random_order_value(instance: &Instance, mode: RandomOrderMode) -> Result<RandomOrderValue, OrderError> {
    if all_identical(instance) {
        let r = optimal_report(instance);
        let (std_error, samples) = match mode {
            RandomOrderMode::Exact => (None, None),
            RandomOrderMode::MonteCarlo { samples, .. } => (Some(0.0), Some(samples)),
        };
        return Ok(RandomOrderValue {
            expected_value: r.expected_value,
            expected_utility: r.expected_utility,
            std_error,
            samples,
        });
    }
    let policy = SubsetPolicy::solve(instance)?;
    match mode {
        RandomOrderMode::Exact => Ok(policy.root()),
        RandomOrderMode::MonteCarlo { samples, seed } => monte_carlo(instance, &policy, samples, seed),
    }
}

fn monte_carlo(instance: &Instance, policy: &SubsetPolicy, samples: usize, seed: u64) -> Result<RandomOrderValue, OrderError> {
    if samples < 2 {
        return Err(OrderError::TooFewSamples(samples));
    }
    let n = instance.len();
    let per_chunk = samples as u64 / MC_CHUNKS;
    let extra = samples as u64 % MC_CHUNKS;
    let partial: Vec<[f64; 3]> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = per_chunk + u64::from(chunk < extra);
            let mut order: Vec<usize> = (0..n).collect();
            let mut acc = [0.0; 3];
            for _ in 0..count {
                order.shuffle(&mut rng);
                let (v, u) = policy.evaluate_permutation(instance, &order);
                acc[0] += v;
                acc[1] += v * v;
                acc[2] += u;
            }
            acc
        })
        .collect();

    let [sum, sum_sq, sum_u] = partial
        .iter()
        .fold([0.0; 3], |a, p| [a[0] + p[0], a[1] + p[1], a[2] + p[2]]);
    let m = samples as f64;
    let mean = sum / m;
    let variance = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(RandomOrderValue {
        expected_value: mean,
        expected_utility: sum_u / m,
        std_error: Some((variance / m).sqrt()),
        samples: Some(samples),
    })
}
