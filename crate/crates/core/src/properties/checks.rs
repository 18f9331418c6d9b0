use serde_json::{json, Value};

use super::{PropertyCase, PropertyError, PropertyId, PropertyVerdict, SuiteOptions, CALIBRATION_TOLERANCE};
use crate::dp::{solve_with, DpTable};
use crate::evaluator::{calibrate_threshold, evaluate_policy, evaluate_threshold, EvaluationReport};
use crate::instance::Instance;
use crate::order::{random_order_value, solve_rho, two_point_orderings_for, RandomOrderMode, DEFAULT_RHO_TOLERANCE};

struct Solved {
    table: DpTable,
    report: EvaluationReport,
}

fn solved(instance: &Instance, lambda: f64, options: &SuiteOptions) -> Solved {
    let instance = instance.with_lambda(lambda).expect("weights are validated by the caller");
    let table = solve_with(&instance, options.solve);
    let report = evaluate_policy(&instance, &table).expect("table solved for this instance");
    Solved { table, report }
}

/// Running minimum of margins, remembering the state where it occurred.
struct Margin {
    slack: f64,
    at: Option<Value>,
}

impl Margin {
    fn new() -> Self {
        Self { slack: f64::INFINITY, at: None }
    }

    fn observe(&mut self, slack: f64, at: impl FnOnce() -> Value) {
        if slack < self.slack {
            self.slack = slack;
            self.at = Some(at());
        }
    }
}

/// `bound - numerator / denominator`; a zero numerator holds trivially.
fn ratio_slack(numerator: f64, denominator: f64, bound: f64) -> (f64, f64) {
    if numerator == 0.0 {
        return (0.0, bound);
    }
    let ratio = numerator / denominator;
    (ratio, bound - ratio)
}

fn precondition(property: PropertyId, reason: impl Into<String>) -> PropertyError {
    PropertyError::PreconditionViolated { property, reason: reason.into() }
}

fn require_zero_reference(property: PropertyId, case: &PropertyCase) -> Result<(), PropertyError> {
    if case.instance.initial_reference() != 0.0 {
        return Err(precondition(property, "needs initial reference 0"));
    }
    Ok(())
}

fn ordered_pairs(lambdas: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut pairs = Vec::new();
    for (i, &a) in sorted.iter().enumerate() {
        for &b in &sorted[i + 1..] {
            pairs.push((a, b));
        }
    }
    pairs
}

/// Checks one property on a case at each of its weights, or at each ordered
/// pair of weights for P2 to P4.
pub fn check(
    property: PropertyId,
    case: &PropertyCase,
    options: &SuiteOptions,
) -> Result<Vec<PropertyVerdict>, PropertyError> {
    if let Some(&bad) = case.lambdas.iter().find(|l| !l.is_finite() || **l < 0.0) {
        return Err(precondition(property, format!("invalid weight {bad}")));
    }
    let tol = options.tolerance;
    let digest = case.digest();
    let verdict = |lambdas: Vec<f64>, margin: Margin, warning: Option<String>| {
        let slack = if margin.slack.is_infinite() { 0.0 } else { margin.slack };
        let passed = slack >= -tol;
        PropertyVerdict {
            property,
            case: case.name.clone(),
            instance_digest: digest.clone(),
            lambdas,
            passed,
            witness: if passed { None } else { margin.at },
            slack,
            warning,
        }
    };

    let single = |f: &dyn Fn(f64) -> Result<Margin, PropertyError>| -> Result<Vec<PropertyVerdict>, PropertyError> {
        case.lambdas.iter().map(|&l| Ok(verdict(vec![l], f(l)?, None))).collect()
    };

    match property {
        PropertyId::P1 => single(&|l| {
            let s = solved(&case.instance, l, options);
            let grid = s.table.grid();
            let mut m = Margin::new();
            for step in 0..s.table.len() {
                for vi in 1..grid.len() {
                    let (lo, hi) = (s.table.utility(step, vi - 1), s.table.utility(step, vi));
                    m.observe(lo - hi, || {
                        json!({"step": step, "v": grid.value(vi - 1), "v_prime": grid.value(vi), "u_v": lo, "u_v_prime": hi})
                    });
                }
            }
            Ok(m)
        }),
        PropertyId::P2 => Ok(ordered_pairs(&case.lambdas)
            .into_iter()
            .map(|(a, b)| {
                let (sa, sb) = (solved(&case.instance, a, options), solved(&case.instance, b, options));
                let grid = sa.table.grid();
                let mut m = Margin::new();
                for step in 0..sa.table.len() {
                    for vi in 0..grid.len() {
                        let (ua, ub) = (sa.table.utility(step, vi), sb.table.utility(step, vi));
                        m.observe(ua - ub, || json!({"step": step, "v": grid.value(vi), "u_low": ua, "u_high": ub}));
                    }
                }
                verdict(vec![a, b], m, None)
            })
            .collect()),
        PropertyId::P3 => Ok(ordered_pairs(&case.lambdas)
            .into_iter()
            .map(|(a, b)| {
                let (sa, sb) = (solved(&case.instance, a, options), solved(&case.instance, b, options));
                patience(&sa.table, &sb.table, |m, w| verdict(vec![a, b], m, w))
            })
            .collect()),
        PropertyId::P4 => Ok(ordered_pairs(&case.lambdas)
            .into_iter()
            .map(|(a, b)| {
                let (va, vb) = (
                    solved(&case.instance, a, options).report.expected_value,
                    solved(&case.instance, b, options).report.expected_value,
                );
                let mut m = Margin::new();
                m.observe(va - vb, || json!({"value_low": va, "value_high": vb}));
                verdict(vec![a, b], m, None)
            })
            .collect()),
        PropertyId::P5 | PropertyId::P6 => {
            let extra = case
                .extra
                .clone()
                .ok_or_else(|| precondition(property, "needs an extra candidate"))?;
            if property == PropertyId::P6 {
                require_zero_reference(property, case)?;
            }
            single(&|l| {
                let base = solved(&case.instance, l, options).report;
                let (grown, factor) = if property == PropertyId::P5 {
                    (case.instance.appended(extra.clone()), 1.0)
                } else {
                    (case.instance.prepended(extra.clone()), 1.0 / (l + 1.0))
                };
                let new = solved(&grown, l, options).report;
                let mut m = Margin::new();
                let (u, v) = (new.expected_utility, new.expected_value);
                m.observe(u - factor * base.expected_utility, || {
                    json!({"quantity": "utility", "grown": u, "original": base.expected_utility, "factor": factor})
                });
                m.observe(v - factor * base.expected_value, || {
                    json!({"quantity": "value", "grown": v, "original": base.expected_value, "factor": factor})
                });
                Ok(m)
            })
        }
        PropertyId::P7 | PropertyId::P8 => {
            require_zero_reference(property, case)?;
            let expected_max = case.instance.max_distribution().expectation();
            single(&|l| {
                let biased = solved(&case.instance, l, options).report.expected_value;
                let (numerator, bound) = if property == PropertyId::P7 {
                    (expected_max, l + 2.0)
                } else {
                    (solved(&case.instance, 0.0, options).report.expected_value, l + 1.0)
                };
                let (ratio, slack) = ratio_slack(numerator, biased, bound);
                let mut m = Margin::new();
                m.observe(slack, || json!({"numerator": numerator, "biased_value": biased, "ratio": ratio, "bound": bound}));
                Ok(m)
            })
        }
        PropertyId::P9 | PropertyId::P10 => {
            require_zero_reference(property, case)?;
            let expected_max = case.instance.max_distribution().expectation();
            single(&|l| {
                let inst = case.instance.with_lambda(l).expect("valid weight");
                let value = random_order_value(&inst, RandomOrderMode::Exact)
                    .map_err(|e| precondition(property, e.to_string()))?
                    .expected_value;
                let bound = if property == PropertyId::P9 {
                    inst.len() as f64
                } else {
                    solve_rho(l, DEFAULT_RHO_TOLERANCE)
                        .map_err(|e| precondition(property, e.to_string()))?
                        .rho
                };
                let (ratio, slack) = ratio_slack(expected_max, value, bound);
                let mut m = Margin::new();
                m.observe(slack, || json!({"expected_max": expected_max, "random_order_value": value, "ratio": ratio, "bound": bound}));
                Ok(m)
            })
        }
        PropertyId::P11 => {
            require_zero_reference(property, case)?;
            Ok(case
                .lambdas
                .iter()
                .map(|&l| calibrated(case, l, tol, &digest))
                .collect())
        }
        PropertyId::P12 => {
            require_zero_reference(property, case)?;
            if let Some(i) = case.instance.candidates().iter().position(|d| d.support_size() > 2) {
                return Err(precondition(property, format!("candidate {i} has more than two atoms")));
            }
            let expected_max = case.instance.max_distribution().expectation();
            single(&|l| {
                let inst = case.instance.with_lambda(l).expect("valid weight");
                let (a, b) = two_point_orderings_for(&inst).map_err(|e| precondition(property, e.to_string()))?;
                let best = a.expected_value.max(b.expected_value);
                let (ratio, slack) = ratio_slack(expected_max, best, 2.0);
                let mut m = Margin::new();
                m.observe(slack, || {
                    json!({"ordering1": a.permutation, "value1": a.expected_value, "ordering2": b.permutation, "value2": b.expected_value, "expected_max": expected_max, "ratio": ratio})
                });
                Ok(m)
            })
        }
    }
}

/// Per-state patience between a lower-weight table `low` and a higher-weight
/// table `high`: wherever `low` stops, `high` must stop too. Violations on
/// states that no realization reaches with both rules still running are
/// reported as a warning.
fn patience<F>(low: &DpTable, high: &DpTable, verdict: F) -> PropertyVerdict
where
    F: FnOnce(Margin, Option<String>) -> PropertyVerdict,
{
    let grid = low.grid();
    let n = low.len();
    let mut reachable = vec![false; grid.len()];
    reachable[grid.initial_index()] = true;
    let mut m = Margin::new();
    let mut failure: Option<Value> = None;
    let mut unreachable = 0usize;

    for step in 0..n.saturating_sub(1) {
        let mut next = vec![false; grid.len()];
        for vi in 0..grid.len() {
            for &xi in grid.atom_indices(step) {
                let (stop_low, stop_high) = (low.stops_at(step, vi, xi), high.stops_at(step, vi, xi));
                if reachable[vi] && !stop_low && !stop_high {
                    next[vi.max(xi)] = true;
                }
                if !stop_low {
                    continue;
                }
                let cont = high.continuation_utility(step, vi, xi).expect("not the last step");
                let margin = high.stop_utility(vi, xi) - cont;
                let at = || json!({"step": step, "v": grid.value(vi), "x": grid.value(xi), "stop_high": high.stop_utility(vi, xi), "continue_high": cont});
                if stop_high {
                    m.observe(margin, at);
                } else if reachable[vi] {
                    failure.get_or_insert_with(at);
                } else {
                    unreachable += 1;
                }
            }
        }
        reachable = next;
    }
    let warning = (unreachable > 0).then(|| format!("{unreachable} violation(s) on unreachable states"));
    let mut v = verdict(m, warning);
    if let Some(w) = failure {
        v.passed = false;
        v.slack = v.slack.min(-f64::EPSILON);
        v.witness = Some(w);
    }
    v
}

/// P11 at one weight, with `alpha = (lambda + 1) / (lambda + 2)`.
fn calibrated(case: &PropertyCase, lambda: f64, tol: f64, digest: &str) -> PropertyVerdict {
    let inst = case.instance.with_lambda(lambda).expect("valid weight");
    let alpha = (lambda + 1.0) / (lambda + 2.0);
    let strategy = calibrate_threshold(&inst, alpha).expect("alpha lies in (0, 1)");
    let report = evaluate_threshold(&inst, &strategy);
    let theta = strategy.theta;
    let achieved = report.prob_selected_at_least(theta);
    let loss_bound = (1.0 - alpha) * theta;
    let expected_max = inst.max_distribution().expectation();
    let utility_bound = expected_max / (lambda + 2.0);

    let gap = (achieved - alpha).abs();
    let loss_slack = loss_bound - report.expected_loss;
    let utility_slack = report.expected_utility - utility_bound;
    let tail_slack = achieved - alpha;
    let passed = gap <= CALIBRATION_TOLERANCE
        && loss_slack >= -CALIBRATION_TOLERANCE
        && tail_slack >= -CALIBRATION_TOLERANCE
        && utility_slack >= -tol;
    let slack = (-gap).min(loss_slack).min(utility_slack);
    PropertyVerdict {
        property: PropertyId::P11,
        case: case.name.clone(),
        instance_digest: digest.to_string(),
        lambdas: vec![lambda],
        passed,
        witness: (!passed).then(|| {
            json!({
                "alpha": alpha,
                "theta": theta,
                "q": strategy.q,
                "selection_probability": achieved,
                "prophet_above": strategy.prophet_above,
                "prophet_at_least": strategy.prophet_at_least,
                "expected_loss": report.expected_loss,
                "loss_bound": loss_bound,
                "expected_utility": report.expected_utility,
                "utility_bound": utility_bound,
            })
        }),
        slack,
        warning: None,
    }
}
