//! Tables comparing computed quantities with their closed forms on the
//! worked instances.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::evaluator::{optimal_report, ratio_report};
use crate::instance::Instance;
use crate::order::{best_ordering_exhaustive, solve_rho, two_point_orderings, OrderError, SubsetPolicy};
use crate::scenarios;

/// Largest `n` for the i.i.d. family; `n^(n+2)` stays well inside `f64`.
pub const IID_MAX_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Example1,
    Sec41,
    IidN,
    TwoPointTight,
    RhoTable,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [Self::Example1, Self::Sec41, Self::IidN, Self::TwoPointTight, Self::RhoTable];

    pub fn name(self) -> &'static str {
        match self {
            Self::Example1 => "example1",
            Self::Sec41 => "sec41",
            Self::IidN => "iid_n",
            Self::TwoPointTight => "two_point_tight",
            Self::RhoTable => "rho_table",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ReproduceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| ReproduceError::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReproduceError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// Parameter sweeps; empty lists fall back to the scenario defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReproduceParams {
    pub lambdas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub ns: Vec<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproduction {
    pub scenario: Scenario,
    pub tolerance: f64,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// One line per computed value that missed its closed form.
    pub mismatches: Vec<String>,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn compare(&mut self, label: impl FnOnce() -> String, computed: f64, expected: f64) {
        if !((computed - expected).abs() <= self.tolerance) {
            self.mismatches
                .push(format!("{}: computed {computed}, expected {expected}", label()));
        }
    }

    fn require(&mut self, ok: bool, label: impl FnOnce() -> String) {
        if !ok {
            self.mismatches.push(label());
        }
    }
}

fn or_default<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() { default.to_vec() } else { given.to_vec() }
}

fn check_lambdas(lambdas: &[f64]) -> Result<(), ReproduceError> {
    match lambdas.iter().find(|l| !l.is_finite() || **l < 0.0) {
        Some(l) => Err(ReproduceError::ParamOutOfRange(format!("lambda {l} must be finite and >= 0"))),
        None => Ok(()),
    }
}

fn check_epsilons(epsilons: &[f64]) -> Result<(), ReproduceError> {
    match epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        Some(e) => Err(ReproduceError::ParamOutOfRange(format!("epsilon {e} must lie in (0, 1)"))),
        None => Ok(()),
    }
}

pub fn reproduce(scenario: Scenario, params: &ReproduceParams) -> Result<Reproduction, ReproduceError> {
    let (tolerance, columns) = match scenario {
        Scenario::Example1 => (1e-9, vec!["lambda", "epsilon", "prophet_ratio", "prophet_closed_form", "unbiased_ratio", "unbiased_closed_form"]),
        Scenario::Sec41 => (1e-12, vec!["lambda", "initial_reference", "expected_value", "expected_utility", "stop_first", "stop_second"]),
        Scenario::IidN => (1e-9, vec!["n", "lambda", "expected_max", "random_order_value", "fixed_order_value", "closed_form", "prophet_ratio"]),
        Scenario::TwoPointTight => (1e-12, vec!["epsilon", "lambda", "expected_max", "ordering1_value", "ordering2_value", "best_value", "expected_v1", "ratio"]),
        Scenario::RhoTable => (1e-12, vec!["lambda", "rho", "ln_lambda", "rho_minus_ln_lambda", "residual"]),
    };
    let mut out = Reproduction {
        scenario,
        tolerance: params.tolerance.unwrap_or(tolerance),
        columns,
        rows: Vec::new(),
        mismatches: Vec::new(),
    };

    match scenario {
        Scenario::Example1 => {
            let lambdas = or_default(&params.lambdas, &[0.5, 1.0, 2.0, 5.0]);
            let epsilons = or_default(&params.epsilons, &[0.1, 0.01]);
            check_lambdas(&lambdas)?;
            check_epsilons(&epsilons)?;
            for &l in &lambdas {
                for &e in &epsilons {
                    let r = ratio_report(&scenarios::example1(l, e)).expect("nonzero selected value");
                    let (pc, uc) = (scenarios::example1_prophet_ratio(l, e), scenarios::example1_unbiased_ratio(l, e));
                    out.compare(|| format!("prophet ratio at lambda={l} epsilon={e}"), r.prophet_ratio, pc);
                    out.compare(|| format!("unbiased ratio at lambda={l} epsilon={e}"), r.unbiased_ratio, uc);
                    out.rows.push(vec![l, e, r.prophet_ratio, pc, r.unbiased_ratio, uc]);
                }
            }
        }
        Scenario::Sec41 => {
            let lambdas = or_default(&params.lambdas, &[0.0, 0.5, 1.0, 2.0, 5.0]);
            check_lambdas(&lambdas)?;
            for &l in &lambdas {
                for reference in [0.0, 2.0] {
                    let r = optimal_report(&scenarios::section41(l, reference));
                    let (first, second) = (r.stop_time_distribution[0], r.stop_time_distribution[1]);
                    if reference == 0.0 && l == 0.0 {
                        out.compare(|| "value at lambda=0".into(), r.expected_value, 1.5);
                    }
                    if reference == 0.0 && l == 2.0 {
                        out.compare(|| "value at lambda=2".into(), r.expected_value, 1.0);
                    }
                    if reference == 2.0 {
                        out.compare(|| format!("reference-2 agent reaches candidate 2 at lambda={l}"), second, 1.0);
                    }
                    out.rows.push(vec![l, reference, r.expected_value, r.expected_utility, first, second]);
                }
            }
        }
        Scenario::IidN => {
            let ns = or_default(&params.ns, &[3, 4]);
            if let Some(n) = ns.iter().find(|&&n| !(2..=IID_MAX_N).contains(&n)) {
                return Err(ReproduceError::ParamOutOfRange(format!("n = {n} must lie in 2..={IID_MAX_N}")));
            }
            for &n in &ns {
                let inst = scenarios::iid_n(n);
                let subset = SubsetPolicy::solve(&inst)?.root().expected_value;
                let fixed = optimal_report(&inst).expected_value;
                let closed = scenarios::iid_n_closed_form(n);
                let expected_max = inst.max_distribution().expectation();
                out.compare(|| format!("random-order value at n={n}"), subset, closed);
                out.compare(|| format!("fixed-order value at n={n}"), fixed, closed);
                out.rows.push(vec![n as f64, inst.lambda(), expected_max, subset, fixed, closed, expected_max / subset]);
            }
        }
        Scenario::TwoPointTight => {
            let epsilons = or_default(&params.epsilons, &[0.1, 0.05]);
            check_epsilons(&epsilons)?;
            for &e in &epsilons {
                let c = scenarios::two_point_tight(e);
                let lambda = if params.lambdas.is_empty() {
                    scenarios::two_point_tight_lambda(e)
                } else {
                    params.lambdas[0]
                };
                check_lambdas(&[lambda])?;
                let (a, b) = two_point_orderings(&c, lambda)?;
                let inst = Instance::new(c.iter().map(|d| d.to_distribution()).collect(), lambda, 0.0)
                    .expect("valid two-point instance");
                let best = best_ordering_exhaustive(&inst)?.expected_value;
                let expected_max = inst.max_distribution().expectation();
                let ev1 = c[0].expectation();
                let ratio = expected_max / best;
                out.compare(|| format!("best ordering value at epsilon={e}"), best, ev1);
                out.require(ratio < 2.0, || format!("ratio {ratio} at epsilon={e} is not below 2"));
                out.rows.push(vec![e, lambda, expected_max, a.expected_value, b.expected_value, best, ev1, ratio]);
            }
        }
        Scenario::RhoTable => {
            let lambdas = or_default(&params.lambdas, &[0.0, 1.0, 10.0, 1e2, 1e4, 1e6]);
            check_lambdas(&lambdas)?;
            let tol = out.tolerance;
            for &l in &lambdas {
                let s = solve_rho(l, tol)?;
                let ln = l.ln();
                if l == 0.0 {
                    let e = std::f64::consts::E;
                    out.compare(|| "rho at lambda=0".into(), s.rho, e / (e - 1.0));
                }
                out.require(s.rho > l.ln_1p(), || format!("rho {} not above ln(lambda+1) at lambda={l}", s.rho));
                out.require(s.residual.abs() <= tol, || format!("residual {} at lambda={l}", s.residual));
                out.rows.push(vec![l, s.rho, ln, s.rho - ln, s.residual]);
            }
        }
    }
    Ok(out)
}
