//! Finite-support value distributions and the law of the hindsight maximum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on probability sums accepted at ingestion.
pub const INGEST_TOLERANCE: f64 = 1e-9;

/// Tolerance on probability sums held by constructed distributions.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("value {0} is negative or not finite")]
    NegativeValue(f64),
    #[error("probability {0} is negative or not finite")]
    InvalidProbability(f64),
    #[error("probabilities sum to {0}, which is not within {INGEST_TOLERANCE:e} of 1")]
    ProbabilitySumOutOfTolerance(f64),
    #[error("distribution has no support")]
    EmptySupport,
    #[error("distribution has {0} support points, expected at most 2")]
    NotTwoPoint(usize),
    #[error("two-point distribution needs 0 <= low <= high and p_high in [0, 1], got low={low}, high={high}, p_high={p_high}")]
    InvalidTwoPoint { low: f64, high: f64, p_high: f64 },
}

/// A single support point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub probability: f64,
}

/// A probability distribution over finitely many nonnegative values.
///
/// Atoms are kept sorted by strictly increasing value, every probability is
/// positive, and the probabilities sum to one. Values are compared with exact
/// equality; instances are authored, so equal values are bitwise equal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DiscreteDistribution {
    atoms: Vec<Atom>,
}

impl DiscreteDistribution {
    /// Builds a distribution from `(value, probability)` pairs.
    ///
    /// Pairs are sorted, equal values merged and zero-probability pairs
    /// dropped. The probabilities must already sum to one within
    /// [`INGEST_TOLERANCE`]; they are then renormalized.
    pub fn new<I>(pairs: I) -> Result<Self, DistributionError>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for (value, probability) in pairs {
            if !value.is_finite() || value < 0.0 {
                return Err(DistributionError::NegativeValue(value));
            }
            if !probability.is_finite() || probability < 0.0 {
                return Err(DistributionError::InvalidProbability(probability));
            }
            raw.push((value, probability));
        }
        if raw.is_empty() {
            return Err(DistributionError::EmptySupport);
        }
        let total: f64 = raw.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > INGEST_TOLERANCE {
            return Err(DistributionError::ProbabilitySumOutOfTolerance(total));
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<Atom> = Vec::with_capacity(raw.len());
        for (value, probability) in raw {
            if probability == 0.0 {
                continue;
            }
            match atoms.last_mut() {
                Some(last) if last.value == value => last.probability += probability,
                _ => atoms.push(Atom { value, probability }),
            }
        }
        if atoms.is_empty() {
            return Err(DistributionError::EmptySupport);
        }
        if total != 1.0 {
            for atom in &mut atoms {
                atom.probability /= total;
            }
        }
        Ok(Self { atoms })
    }

    /// A point mass at `value`.
    pub fn point(value: f64) -> Result<Self, DistributionError> {
        Self::new([(value, 1.0)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.value)
    }

    pub fn min_value(&self) -> f64 {
        self.atoms[0].value
    }

    pub fn max_value(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].value
    }

    pub fn expectation(&self) -> f64 {
        self.atoms.iter().map(|a| a.value * a.probability).sum()
    }

    /// `Pr(X > threshold)` when `strict`, otherwise `Pr(X >= threshold)`.
    pub fn tail_probability(&self, threshold: f64, strict: bool) -> f64 {
        self.atoms
            .iter()
            .filter(|a| if strict { a.value > threshold } else { a.value >= threshold })
            .map(|a| a.probability)
            .sum()
    }

    /// `Pr(X < x)`.
    pub fn prob_below(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|a| a.value < x)
            .map(|a| a.probability)
            .sum()
    }

    /// `Pr(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x >= self.max_value() {
            return 1.0;
        }
        self.atoms
            .iter()
            .take_while(|a| a.value <= x)
            .map(|a| a.probability)
            .sum()
    }

    /// Probability mass at exactly `x`.
    pub fn mass_at(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .find(|a| a.value == x)
            .map_or(0.0, |a| a.probability)
    }
}

impl TryFrom<Vec<(f64, f64)>> for DiscreteDistribution {
    type Error = DistributionError;

    fn try_from(pairs: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(pairs)
    }
}

impl From<DiscreteDistribution> for Vec<(f64, f64)> {
    fn from(d: DiscreteDistribution) -> Self {
        d.atoms.iter().map(|a| (a.value, a.probability)).collect()
    }
}

/// Exact law of `max_t X_t` for independent `X_1..X_n`.
///
/// Uses `Pr(max <= x) = prod_t F_t(x)` over the union of supports; point
/// masses are differences of consecutive products.
pub fn max_distribution(candidates: &[DiscreteDistribution]) -> DiscreteDistribution {
    assert!(!candidates.is_empty(), "max of an empty family");
    let mut grid: Vec<f64> = candidates.iter().flat_map(|d| d.values()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut atoms = Vec::with_capacity(grid.len());
    let mut previous = 0.0;
    for &x in &grid {
        let joint: f64 = candidates.iter().map(|d| d.cdf(x)).product();
        let mass = joint - previous;
        if mass > 0.0 {
            atoms.push(Atom { value: x, probability: mass });
        }
        previous = joint;
    }
    DiscreteDistribution { atoms }
}

/// A distribution with support `{low, high}`, `Pr(high) = p_high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointDistribution {
    pub high: f64,
    pub low: f64,
    pub p_high: f64,
}

impl TwoPointDistribution {
    pub fn new(high: f64, low: f64, p_high: f64) -> Result<Self, DistributionError> {
        let valid = low.is_finite()
            && high.is_finite()
            && 0.0 <= low
            && low <= high
            && (0.0..=1.0).contains(&p_high);
        if !valid {
            return Err(DistributionError::InvalidTwoPoint { low, high, p_high });
        }
        Ok(Self { high, low, p_high })
    }

    pub fn expectation(&self) -> f64 {
        self.p_high * self.high + (1.0 - self.p_high) * self.low
    }

    pub fn to_distribution(&self) -> DiscreteDistribution {
        DiscreteDistribution::new([(self.high, self.p_high), (self.low, 1.0 - self.p_high)])
            .expect("validated two-point distribution")
    }
}

impl TryFrom<&DiscreteDistribution> for TwoPointDistribution {
    type Error = DistributionError;

    fn try_from(d: &DiscreteDistribution) -> Result<Self, Self::Error> {
        match d.atoms() {
            [only] => Self::new(only.value, only.value, 1.0),
            [low, high] => Self::new(high.value, low.value, high.probability),
            atoms => Err(DistributionError::NotTwoPoint(atoms.len())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(pairs: &[(f64, f64)]) -> DiscreteDistribution {
        DiscreteDistribution::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn point_mass() {
        let x = d(&[(5.0, 1.0)]);
        assert_eq!(x.atoms(), &[Atom { value: 5.0, probability: 1.0 }]);
        assert_eq!(x.expectation(), 5.0);
        assert_eq!(x.tail_probability(5.0, true), 0.0);
        assert_eq!(x.tail_probability(5.0, false), 1.0);
    }

    #[test]
    fn atoms_sorted_and_merged() {
        let x = d(&[(1.0, 0.5), (1.0, 0.5)]);
        assert_eq!(x.atoms(), &[Atom { value: 1.0, probability: 1.0 }]);

        let y = d(&[(10.0, 0.1), (0.0, 0.9)]);
        assert_eq!(y.atoms()[0].value, 0.0);
        assert_eq!(y.atoms()[1].value, 10.0);
        assert!((y.expectation() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_of_three() {
        let x = d(&[(3.0, 0.5), (0.0, 0.5)]);
        assert_eq!(x.expectation(), 1.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            DiscreteDistribution::new([(-1.0, 1.0)]),
            Err(DistributionError::NegativeValue(-1.0))
        );
        assert!(matches!(
            DiscreteDistribution::new([(1.0, 0.5), (2.0, 0.4)]),
            Err(DistributionError::ProbabilitySumOutOfTolerance(_))
        ));
        assert_eq!(
            DiscreteDistribution::new(std::iter::empty()),
            Err(DistributionError::EmptySupport)
        );
        assert_eq!(
            DiscreteDistribution::new([(1.0, 1.0), (2.0, 0.0)]).unwrap().support_size(),
            1
        );
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let x = d(&[(1.0, 0.5 + 4e-10), (2.0, 0.5)]);
        let total: f64 = x.atoms().iter().map(|a| a.probability).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn max_of_one_is_itself() {
        let x = d(&[(0.0, 0.25), (2.0, 0.75)]);
        assert_eq!(max_distribution(std::slice::from_ref(&x)), x);
    }

    #[test]
    fn max_of_three_coins() {
        let coin = d(&[(1.0, 0.5), (0.0, 0.5)]);
        let m = max_distribution(&[coin.clone(), coin.clone(), coin]);
        assert_eq!(m.atoms().len(), 2);
        assert_eq!(m.mass_at(0.0), 0.125);
        assert_eq!(m.mass_at(1.0), 0.875);
    }

    #[test]
    fn max_for_example_one() {
        let first = DiscreteDistribution::point(1.0 / 1.9).unwrap();
        let second = d(&[(10.0, 0.1), (0.0, 0.9)]);
        let m = max_distribution(&[first, second]);
        assert!((m.expectation() - 28.0 / 19.0).abs() < 1e-12);
        assert!((m.tail_probability(1.0 / 1.9, true) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn two_point_conversion() {
        let tp = TwoPointDistribution::new(3.0, 3.0, 0.3).unwrap();
        assert_eq!(tp.to_distribution().support_size(), 1);
        let back = TwoPointDistribution::try_from(&d(&[(1.0, 0.2), (4.0, 0.8)])).unwrap();
        assert_eq!((back.low, back.high, back.p_high), (1.0, 4.0, 0.8));
        assert_eq!(
            TwoPointDistribution::try_from(&d(&[(1.0, 0.2), (2.0, 0.3), (4.0, 0.5)])),
            Err(DistributionError::NotTwoPoint(3))
        );
        assert!(TwoPointDistribution::new(1.0, 2.0, 0.5).is_err());
    }
}
