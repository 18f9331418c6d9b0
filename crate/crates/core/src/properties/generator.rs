//! Seeded random instances on a dyadic lattice.
//!
//! Values are multiples of `1 / lattice` in `[0, value_max]` and
//! probabilities are multiples of `1 / lattice`, so sums are exact and
//! indifference cases come up often.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteDistribution, TwoPointDistribution};
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub support_min: usize,
    pub support_max: usize,
    pub value_max: f64,
    /// Values and probabilities are multiples of `1 / lattice`.
    pub lattice: u32,
    pub lambdas: Vec<f64>,
    pub count: usize,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 4,
            support_min: 1,
            support_max: 3,
            value_max: 4.0,
            lattice: 16,
            lambdas: vec![0.0, 0.5, 1.0, 2.0, 5.0],
            count: 200,
            seed: 42,
        }
    }
}

/// One generated instance plus a spare candidate for append and prepend
/// checks. The instance carries weight 0; the checks set their own.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub index: usize,
    pub instance: Instance,
    pub extra: DiscreteDistribution,
}

fn lattice_distribution(rng: &mut ChaCha8Rng, config: &GeneratorConfig) -> DiscreteDistribution {
    let step = 1.0 / f64::from(config.lattice);
    let slots = (config.value_max * f64::from(config.lattice)).floor() as usize + 1;
    let max_support = config.support_max.min(slots).min(config.lattice as usize).max(1);
    let k = rng.gen_range(config.support_min.clamp(1, max_support)..=max_support);

    let mut values: Vec<usize> = sample(rng, slots, k).into_vec();
    values.sort_unstable();
    let mut cuts: Vec<usize> = sample(rng, config.lattice as usize - 1, k - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(config.lattice as usize);

    let mut previous = 0;
    let pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(&cuts)
        .map(|(&v, &c)| {
            let p = (c - previous) as f64 * step;
            previous = c;
            (v as f64 * step, p)
        })
        .collect();
    DiscreteDistribution::new(pairs).expect("lattice probabilities sum to one")
}

/// Deterministic in `config`: the same config yields the same instances.
pub fn generate_instances(config: &GeneratorConfig) -> Vec<GeneratedInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.count)
        .map(|index| {
            let n = rng.gen_range(config.n_min.max(1)..=config.n_max.max(config.n_min.max(1)));
            let candidates = (0..n).map(|_| lattice_distribution(&mut rng, config)).collect();
            let extra = lattice_distribution(&mut rng, config);
            let instance = Instance::new(candidates, 0.0, 0.0).expect("generated instance is valid");
            GeneratedInstance { index, instance, extra }
        })
        .collect()
}

/// Random two-point candidate lists with `low < high` on the lattice and
/// `Pr(high)` a proper lattice fraction.
pub fn generate_two_point(count: usize, n_max: usize, seed: u64) -> Vec<Vec<TwoPointDistribution>> {
    let lattice = 16u32;
    let step = 1.0 / f64::from(lattice);
    let slots = 4 * lattice as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=n_max.max(1));
            (0..n)
                .map(|_| {
                    let mut pair = sample(&mut rng, slots, 2).into_vec();
                    pair.sort_unstable();
                    let p = rng.gen_range(1..lattice) as f64 * step;
                    TwoPointDistribution::new(pair[1] as f64 * step, pair[0] as f64 * step, p)
                        .expect("lattice two-point is valid")
                })
                .collect()
        })
        .collect()
}
