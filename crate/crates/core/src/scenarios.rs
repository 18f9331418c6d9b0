//! Reference instances with known closed-form behaviour.

use crate::distributions::{DiscreteDistribution, TwoPointDistribution};
use crate::instance::Instance;

/// A sure value of 1 followed by a fair coin between 3 and 0.
pub fn section41(lambda: f64, initial_reference: f64) -> Instance {
    Instance::new(
        vec![
            DiscreteDistribution::point(1.0).expect("valid"),
            DiscreteDistribution::new([(3.0, 0.5), (0.0, 0.5)]).expect("valid"),
        ],
        lambda,
        initial_reference,
    )
    .expect("valid instance")
}

/// Two-candidate family that makes the biased agent exactly indifferent:
/// a sure `1 / (1 + (1 - eps) * lambda)` followed by `1 / eps` w.p. `eps`,
/// else 0.
pub fn example1(lambda: f64, epsilon: f64) -> Instance {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon in (0, 1)");
    let sure = 1.0 / (1.0 + (1.0 - epsilon) * lambda);
    Instance::new(
        vec![
            DiscreteDistribution::point(sure).expect("valid"),
            DiscreteDistribution::new([(1.0 / epsilon, epsilon), (0.0, 1.0 - epsilon)]).expect("valid"),
        ],
        lambda,
        0.0,
    )
    .expect("valid instance")
}

pub fn example1_prophet_ratio(lambda: f64, epsilon: f64) -> f64 {
    lambda + 2.0 - epsilon * (lambda + 1.0)
}

pub fn example1_unbiased_ratio(lambda: f64, epsilon: f64) -> f64 {
    lambda + 1.0 - epsilon * lambda
}

/// Three-point law used for the i.i.d. random-order construction:
/// 0 w.p. `1/n`, `1/n^3` w.p. `1 - 1/n^2 - 1/n`, 1 w.p. `1/n^2`.
pub fn iid_n_distribution(n: usize) -> DiscreteDistribution {
    assert!(n >= 2, "construction needs n >= 2");
    let nf = n as f64;
    DiscreteDistribution::new([
        (0.0, 1.0 / nf),
        (1.0 / nf.powi(3), 1.0 - 1.0 / (nf * nf) - 1.0 / nf),
        (1.0, 1.0 / (nf * nf)),
    ])
    .expect("valid")
}

/// Loss aversion large enough that the agent takes the first nonzero value.
pub fn iid_n_lambda(n: usize) -> f64 {
    (n as f64).powi(n as i32 + 2)
}

pub fn iid_n(n: usize) -> Instance {
    Instance::new(vec![iid_n_distribution(n); n], iid_n_lambda(n), 0.0).expect("valid instance")
}

/// `E[V] * (1 - n^-n) / (1 - 1/n)`, the value of taking the first nonzero draw.
pub fn iid_n_closed_form(n: usize) -> f64 {
    let nf = n as f64;
    iid_n_distribution(n).expectation() * (1.0 - nf.powi(-(n as i32))) / (1.0 - 1.0 / nf)
}

/// Two 2-point candidates whose best ordering still loses a factor near 2:
/// `V1 = 1 w.p. eps, eps^2 otherwise` and
/// `V2 = eps + eps^2 (1 - eps) w.p. 1 - eps^2, 0 otherwise`.
pub fn two_point_tight(epsilon: f64) -> [TwoPointDistribution; 2] {
    let e2 = epsilon * epsilon;
    [
        TwoPointDistribution::new(1.0, e2, epsilon).expect("valid"),
        TwoPointDistribution::new(epsilon + e2 * (1.0 - epsilon), 0.0, 1.0 - e2).expect("valid"),
    ]
}

/// `eps^-4 + 1`, comfortably above the `1 / eps^4` the construction needs.
pub fn two_point_tight_lambda(epsilon: f64) -> f64 {
    epsilon.powi(-4) + 1.0
}
