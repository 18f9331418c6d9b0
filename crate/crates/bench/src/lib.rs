//! Benchmark fixtures.

use refstop::properties::{generate_instances, GeneratorConfig};
use refstop::{DiscreteDistribution, Instance};

/// `n` candidates, each uniform over `support` evenly spaced values.
pub fn uniform_instance(n: usize, support: usize, lambda: f64) -> Instance {
    let candidates = (0..n)
        .map(|i| {
            let p = 1.0 / support as f64;
            DiscreteDistribution::new((0..support).map(|k| ((k * (i + 1)) as f64 / 4.0, p))).expect("valid")
        })
        .collect();
    Instance::new(candidates, lambda, 0.0).expect("valid")
}

/// A fixed batch from the lattice generator.
pub fn lattice_batch(count: usize, n_max: usize) -> Vec<Instance> {
    let config = GeneratorConfig { count, n_max, seed: 11, ..GeneratorConfig::default() };
    generate_instances(&config)
        .into_iter()
        .map(|g| g.instance.with_lambda(1.0).expect("valid"))
        .collect()
}
