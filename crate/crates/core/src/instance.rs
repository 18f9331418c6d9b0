//! Problem instances: an arrival-ordered sequence of independent candidates,
//! a loss-aversion weight and the agent's starting reference value.

use std::hash::{DefaultHasher, Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{max_distribution, DiscreteDistribution, DistributionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("loss aversion must be a finite nonnegative number, got {0}")]
    InvalidLambda(f64),
    #[error("initial reference must be a finite nonnegative number, got {0}")]
    InvalidReference(f64),
    #[error("an instance needs at least one candidate")]
    NoCandidates,
    #[error("candidate {index}: {source}")]
    Candidate {
        index: usize,
        #[source]
        source: DistributionError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    candidates: Vec<DiscreteDistribution>,
    lambda: f64,
    initial_reference: f64,
}

impl Instance {
    pub fn new(
        candidates: Vec<DiscreteDistribution>,
        lambda: f64,
        initial_reference: f64,
    ) -> Result<Self, InstanceError> {
        if candidates.is_empty() {
            return Err(InstanceError::NoCandidates);
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(InstanceError::InvalidLambda(lambda));
        }
        if !initial_reference.is_finite() || initial_reference < 0.0 {
            return Err(InstanceError::InvalidReference(initial_reference));
        }
        Ok(Self { candidates, lambda, initial_reference })
    }

    pub fn candidates(&self) -> &[DiscreteDistribution] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn initial_reference(&self) -> f64 {
        self.initial_reference
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self, InstanceError> {
        Self::new(self.candidates.clone(), lambda, self.initial_reference)
    }

    pub fn with_initial_reference(&self, reference: f64) -> Result<Self, InstanceError> {
        Self::new(self.candidates.clone(), self.lambda, reference)
    }

    /// Same parameters, candidates rearranged so that position `k` holds
    /// candidate `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.len(), "permutation length");
        Self {
            candidates: order.iter().map(|&i| self.candidates[i].clone()).collect(),
            lambda: self.lambda,
            initial_reference: self.initial_reference,
        }
    }

    pub fn appended(&self, candidate: DiscreteDistribution) -> Self {
        let mut next = self.clone();
        next.candidates.push(candidate);
        next
    }

    pub fn prepended(&self, candidate: DiscreteDistribution) -> Self {
        let mut next = self.clone();
        next.candidates.insert(0, candidate);
        next
    }

    /// Law of the best candidate in hindsight.
    pub fn max_distribution(&self) -> DiscreteDistribution {
        max_distribution(&self.candidates)
    }

    pub fn reference_grid(&self) -> ReferenceGrid {
        ReferenceGrid::new(self)
    }

    /// Bitwise digest of candidates, weight and reference.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.lambda.to_bits().hash(&mut h);
        self.initial_reference.to_bits().hash(&mut h);
        for d in &self.candidates {
            d.atoms().len().hash(&mut h);
            for a in d.atoms() {
                a.value.to_bits().hash(&mut h);
                a.probability.to_bits().hash(&mut h);
            }
        }
        h.finish()
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceFileError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            lambda: self.lambda,
            initial_reference: self.initial_reference,
            candidates: self
                .candidates
                .iter()
                .map(|d| CandidateFile {
                    support: d.atoms().iter().map(|a| (a.value, a.probability)).collect(),
                })
                .collect(),
        }
    }
}

/// Sorted union of all candidate supports and the initial reference.
///
/// Every reachable reference value `max(v, v_t)` lies on this grid, so the
/// solvers never interpolate. Since the grid is sorted, `max` of two grid
/// values is the grid value at the larger index.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGrid {
    values: Vec<f64>,
    atom_index: Vec<Vec<usize>>,
    initial_index: usize,
}

impl ReferenceGrid {
    fn new(instance: &Instance) -> Self {
        let mut values: Vec<f64> = instance
            .candidates
            .iter()
            .flat_map(|d| d.values())
            .chain(std::iter::once(instance.initial_reference))
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let locate = |x: f64| {
            values
                .binary_search_by(|g| g.total_cmp(&x))
                .expect("support value on grid")
        };
        let atom_index = instance
            .candidates
            .iter()
            .map(|d| d.values().map(locate).collect())
            .collect();
        let initial_index = locate(instance.initial_reference);
        Self { values, atom_index, initial_index }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Grid index of `x`, if `x` is exactly on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.values.binary_search_by(|g| g.total_cmp(&x)).ok()
    }

    /// Grid indices of candidate `step`'s atoms, in atom order.
    pub fn atom_indices(&self, step: usize) -> &[usize] {
        &self.atom_index[step]
    }

    pub fn initial_index(&self) -> usize {
        self.initial_index
    }
}

#[derive(Debug, Error)]
pub enum InstanceFileError {
    #[error("malformed instance file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// On-disk instance layout:
/// `{"lambda": 1.0, "initial_reference": 0.0, "candidates": [{"support": [[v, p], ...]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub lambda: f64,
    #[serde(default)]
    pub initial_reference: f64,
    pub candidates: Vec<CandidateFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateFile {
    pub support: Vec<(f64, f64)>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance, InstanceFileError> {
        let candidates = self
            .candidates
            .into_iter()
            .enumerate()
            .map(|(index, c)| {
                DiscreteDistribution::new(c.support)
                    .map_err(|source| InstanceError::Candidate { index, source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Instance::new(candidates, self.lambda, self.initial_reference)?)
    }
}
