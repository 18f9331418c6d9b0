use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{check, generate_instances, GeneratorConfig, PropertyCase, PropertyId, PropertyVerdict, SuiteOptions};
use crate::distributions::DiscreteDistribution;
use crate::instance::Instance;
use crate::scenarios;

/// Every property that applies to `case`, in property order.
fn check_all(case: &PropertyCase, options: &SuiteOptions) -> Vec<PropertyVerdict> {
    PropertyId::ALL
        .iter()
        .filter_map(|&p| check(p, case, options).ok())
        .flatten()
        .collect()
}

/// Checks every case in parallel; verdicts come back in case order.
pub fn run_cases(cases: &[PropertyCase], options: &SuiteOptions) -> Vec<PropertyVerdict> {
    cases
        .par_iter()
        .map(|c| check_all(c, options))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Generates instances from `config` and checks every applicable property
/// at every weight in `config.lambdas`.
pub fn run_suite(config: &GeneratorConfig, options: &SuiteOptions) -> Vec<PropertyVerdict> {
    if config.lambdas.is_empty() {
        return Vec::new();
    }
    let cases: Vec<PropertyCase> = generate_instances(config)
        .into_iter()
        .map(|g| PropertyCase {
            name: format!("generated-{}", g.index),
            instance: g.instance,
            extra: Some(g.extra),
            lambdas: config.lambdas.clone(),
        })
        .collect();
    run_cases(&cases, options)
}

/// The worked instances: the two-step example from a zero and from a high
/// reference, the indifference family, its prepend pair, the i.i.d.
/// random-order family and the two-point tightness family.
pub fn curated_cases() -> Vec<PropertyCase> {
    let sweep = vec![0.0, 0.5, 1.0, 2.0, 5.0];
    let coin = DiscreteDistribution::new([(0.0, 0.5), (2.0, 0.5)]).expect("valid");
    let mut cases = vec![
        PropertyCase {
            name: "two-step".into(),
            instance: scenarios::section41(0.0, 0.0),
            extra: Some(coin.clone()),
            lambdas: sweep.clone(),
        },
        PropertyCase {
            name: "two-step-reference-2".into(),
            instance: scenarios::section41(0.0, 2.0),
            extra: Some(coin),
            lambdas: sweep.clone(),
        },
    ];
    for lambda in [0.5, 1.0, 2.0, 5.0] {
        for epsilon in [0.1, 0.01] {
            let inst = scenarios::example1(lambda, epsilon);
            let [first, second] = [inst.candidates()[0].clone(), inst.candidates()[1].clone()];
            cases.push(PropertyCase {
                name: format!("indifference-l{lambda}-e{epsilon}"),
                instance: inst.clone(),
                extra: Some(first.clone()),
                lambdas: vec![0.0, lambda],
            });
            cases.push(PropertyCase {
                name: format!("indifference-tail-l{lambda}-e{epsilon}"),
                instance: Instance::new(vec![second], lambda, 0.0).expect("valid"),
                extra: Some(first),
                lambdas: vec![lambda],
            });
        }
    }
    for n in [3, 4] {
        cases.push(PropertyCase {
            name: format!("iid-{n}"),
            instance: scenarios::iid_n(n),
            extra: Some(scenarios::iid_n_distribution(n)),
            lambdas: vec![0.0, scenarios::iid_n_lambda(n)],
        });
    }
    for epsilon in [0.1, 0.05] {
        let c = scenarios::two_point_tight(epsilon);
        let lambda = scenarios::two_point_tight_lambda(epsilon);
        cases.push(PropertyCase {
            name: format!("two-point-tight-e{epsilon}"),
            instance: Instance::new(c.iter().map(|d| d.to_distribution()).collect(), lambda, 0.0).expect("valid"),
            extra: Some(c[0].to_distribution()),
            lambdas: vec![0.0, lambda],
        });
    }
    cases
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyTally {
    pub checked: usize,
    pub failed: usize,
    pub warnings: usize,
    pub min_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub checked: usize,
    pub failed: usize,
    pub by_property: BTreeMap<String, PropertyTally>,
}

impl SuiteSummary {
    pub fn new(verdicts: &[PropertyVerdict]) -> Self {
        let mut by_property: BTreeMap<PropertyId, PropertyTally> = BTreeMap::new();
        for v in verdicts {
            let t = by_property.entry(v.property).or_insert(PropertyTally {
                checked: 0,
                failed: 0,
                warnings: 0,
                min_slack: f64::INFINITY,
            });
            t.checked += 1;
            t.failed += usize::from(!v.passed);
            t.warnings += usize::from(v.warning.is_some());
            t.min_slack = t.min_slack.min(v.slack);
        }
        Self {
            checked: verdicts.len(),
            failed: verdicts.iter().filter(|v| !v.passed).count(),
            by_property: by_property.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}
