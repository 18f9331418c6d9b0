//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use refstop::evaluator::{brute_force_optimal, calibrate_threshold, evaluate_threshold};
use refstop::order::{best_ordering_exhaustive, random_order_value, solve_rho, two_point_orderings, RandomOrderMode, SubsetPolicy};
use refstop::properties::{generate_instances, generate_two_point, run_suite, GeneratorConfig, PropertyId, SuiteOptions};
use refstop::reproduce::{reproduce, ReproduceParams, Scenario};
use refstop::{optimal_report, scenarios, solve, Instance};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn base_config() -> GeneratorConfig {
    GeneratorConfig::default()
}

/// Every generated instance at every weight of the base configuration.
fn weighted_set() -> Vec<Instance> {
    let config = base_config();
    generate_instances(&config)
        .iter()
        .flat_map(|g| config.lambdas.iter().map(move |&l| g.instance.with_lambda(l).unwrap()))
        .collect()
}

fn example_ratios() -> Outcome {
    let params = ReproduceParams {
        lambdas: vec![0.5, 1.0, 2.0, 5.0],
        epsilons: vec![0.1, 0.01],
        tolerance: Some(1e-9),
        ..Default::default()
    };
    let r = reproduce(Scenario::Example1, &params).map_err(|e| e.to_string())?;
    if r.rows.len() != 8 {
        return Err(format!("expected 8 rows, got {}", r.rows.len()));
    }
    let worst = r
        .rows
        .iter()
        .map(|row| (row[2] - row[3]).abs().max((row[4] - row[5]).abs()))
        .fold(0.0, f64::max);
    if r.passed() {
        Ok(format!("8 (lambda, epsilon) pairs, worst deviation {worst:.3e}"))
    } else {
        Err(r.mismatches.join("; "))
    }
}

fn two_step_example() -> Outcome {
    let v0 = optimal_report(&scenarios::section41(0.0, 0.0)).expected_value;
    let v2 = optimal_report(&scenarios::section41(2.0, 0.0)).expected_value;
    if v0 != 1.5 || v2 != 1.0 {
        return Err(format!("values {v0} at lambda 0 and {v2} at lambda 2"));
    }
    let lambdas = [0.0, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0];
    for l in lambdas {
        let r = optimal_report(&scenarios::section41(l, 2.0));
        if r.stop_time_distribution != [0.0, 1.0] {
            return Err(format!("reference-2 agent at lambda {l}: stop law {:?}", r.stop_time_distribution));
        }
    }
    Ok(format!("values 1.5 and 1.0; reference-2 agent waits at {} weights", lambdas.len()))
}

fn oracle_equivalence() -> Outcome {
    let set = weighted_set();
    let mut worst: f64 = 0.0;
    for inst in &set {
        let fast = solve(inst).root_utility();
        let slow = brute_force_optimal(inst).map_err(|e| e.to_string())?.expected_utility;
        worst = worst.max((fast - slow).abs());
        if (fast - slow).abs() > 1e-9 {
            return Err(format!("instance {:016x}: table {fast}, tree {slow}", inst.fingerprint()));
        }
    }
    Ok(format!("{} instance-weight pairs, worst gap {worst:.3e}", set.len()))
}

fn ratio_bounds() -> Outcome {
    let set = weighted_set();
    let (mut prophet, mut unbiased, mut threshold) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for inst in &set {
        let l = inst.lambda();
        let expected_max = inst.max_distribution().expectation();
        let biased = optimal_report(inst).expected_value;
        let rational = optimal_report(&inst.with_lambda(0.0).unwrap()).expected_value;
        if expected_max > 0.0 {
            let slack = l + 2.0 - expected_max / biased;
            prophet = prophet.min(slack);
            if slack < -1e-9 {
                return Err(format!("prophet ratio {} > {} on {:016x}", expected_max / biased, l + 2.0, inst.fingerprint()));
            }
        }
        if rational > 0.0 {
            let slack = l + 1.0 - rational / biased;
            unbiased = unbiased.min(slack);
            if slack < -1e-9 {
                return Err(format!("unbiased ratio {} > {} on {:016x}", rational / biased, l + 1.0, inst.fingerprint()));
            }
        }
        let alpha = (l + 1.0) / (l + 2.0);
        let strategy = calibrate_threshold(inst, alpha).map_err(|e| e.to_string())?;
        let utility = evaluate_threshold(inst, &strategy).expected_utility;
        let slack = utility - expected_max / (l + 2.0);
        threshold = threshold.min(slack);
        if slack < -1e-9 {
            return Err(format!("threshold utility {utility} below {} on {:016x}", expected_max / (l + 2.0), inst.fingerprint()));
        }
    }
    Ok(format!(
        "{} pairs; min slack prophet {prophet:.3e}, unbiased {unbiased:.3e}, threshold {threshold:.3e}",
        set.len()
    ))
}

fn monotonicity_suite() -> Outcome {
    let verdicts = run_suite(&base_config(), &SuiteOptions::default());
    let mono: Vec<_> = verdicts.iter().filter(|v| v.property <= PropertyId::P6).collect();
    let mut summary = Vec::new();
    for p in &PropertyId::ALL[..6] {
        let count = mono.iter().filter(|v| v.property == *p).count();
        if count == 0 {
            return Err(format!("{p} was never checked"));
        }
        summary.push(format!("{p}:{count}"));
    }
    let warnings = mono.iter().filter(|v| v.warning.is_some()).count();
    match mono.iter().find(|v| !v.passed) {
        Some(v) => Err(format!("{} failed on {} at {:?}: {:?}", v.property, v.case, v.lambdas, v.witness)),
        None => Ok(format!("{} verdicts ({}), {warnings} warnings", mono.len(), summary.join(" "))),
    }
}

fn calibration() -> Outcome {
    let set = weighted_set();
    let mut misses = Vec::new();
    let mut loss_failures = 0usize;
    for inst in &set {
        let l = inst.lambda();
        let alpha = (l + 1.0) / (l + 2.0);
        let strategy = calibrate_threshold(inst, alpha).map_err(|e| e.to_string())?;
        let report = evaluate_threshold(inst, &strategy);
        let achieved = report.prob_selected_at_least(strategy.theta);
        if (achieved - alpha).abs() > 1e-12 {
            misses.push((inst.clone(), strategy, achieved));
        }
        if report.expected_loss > (1.0 - alpha) * strategy.theta + 1e-12 {
            loss_failures += 1;
        }
    }
    if misses.is_empty() && loss_failures == 0 {
        return Ok(format!("{} pairs hit alpha within 1e-12, loss bound holds", set.len()));
    }
    let forced = misses.iter().filter(|(_, s, a)| s.q == 0.0 && *a > s.alpha).count();
    let (inst, s, achieved) = &misses[0];
    Err(format!(
        "{} of {} pairs miss alpha ({forced} overshoot at q=0), {loss_failures} break the loss bound; first: n={} lambda={} theta={} q={} alpha={} achieved={achieved}",
        misses.len(),
        set.len(),
        inst.len(),
        inst.lambda(),
        s.theta,
        s.q,
        s.alpha,
    ))
}

fn rho_solver() -> Outcome {
    let e = std::f64::consts::E;
    let zero = solve_rho(0.0, 1e-12).map_err(|e| e.to_string())?;
    if (zero.rho - e / (e - 1.0)).abs() > 1e-10 {
        return Err(format!("rho(0) = {}", zero.rho));
    }
    for l in [0.0, 1.0, 10.0, 1e2, 1e4, 1e6] {
        let s = solve_rho(l, 1e-12).map_err(|e| e.to_string())?;
        if s.residual.abs() > 1e-12 || s.rho <= l.ln_1p() {
            return Err(format!("lambda {l}: rho {} residual {}", s.rho, s.residual));
        }
    }
    let gap = |l: f64| solve_rho(l, 1e-12).map(|s| (s.rho - l.ln()).abs());
    let (g3, g6) = (gap(1e3).map_err(|e| e.to_string())?, gap(1e6).map_err(|e| e.to_string())?);
    if g6 >= g3 {
        return Err(format!("gap at 1e6 ({g6}) not below gap at 1e3 ({g3})"));
    }
    Ok(format!("rho(0) = {:.10}, gaps {g3:.4} -> {g6:.4}", zero.rho))
}

fn random_order() -> Outcome {
    let config = GeneratorConfig { n_max: 6, count: 100, seed: 8, ..base_config() };
    let mut checked = 0;
    let mut worst = f64::INFINITY;
    for g in generate_instances(&config) {
        for &l in &config.lambdas {
            let inst = g.instance.with_lambda(l).unwrap();
            let expected_max = inst.max_distribution().expectation();
            if expected_max == 0.0 {
                continue;
            }
            let value = random_order_value(&inst, RandomOrderMode::Exact).map_err(|e| e.to_string())?.expected_value;
            let rho = solve_rho(l, 1e-12).map_err(|e| e.to_string())?.rho;
            let bound = (inst.len() as f64).min(rho);
            let slack = bound + 1e-9 - expected_max / value;
            worst = worst.min(slack);
            if slack < 0.0 {
                return Err(format!("ratio {} above {bound} on {:016x}", expected_max / value, inst.fingerprint()));
            }
            checked += 1;
        }
    }
    for n in [3, 4] {
        let inst = scenarios::iid_n(n);
        let value = SubsetPolicy::solve(&inst).map_err(|e| e.to_string())?.root().expected_value;
        let closed = scenarios::iid_n_closed_form(n);
        if (value - closed).abs() > 1e-9 {
            return Err(format!("iid n={n}: subset value {value}, closed form {closed}"));
        }
    }
    Ok(format!("{checked} pairs within min(n, rho), min slack {worst:.3e}; iid n=3,4 match closed form"))
}

fn two_point() -> Outcome {
    let lambdas = [0.0, 0.5, 1.0, 2.0, 5.0];
    let sets = generate_two_point(100, 6, 9);
    for (i, c) in sets.iter().enumerate() {
        let l = lambdas[i % lambdas.len()];
        let (a, b) = two_point_orderings(c, l).map_err(|e| e.to_string())?;
        let best_two = a.expected_value.max(b.expected_value);
        let inst = Instance::new(c.iter().map(|d| d.to_distribution()).collect(), l, 0.0).unwrap();
        let expected_max = inst.max_distribution().expectation();
        let best = best_ordering_exhaustive(&inst).map_err(|e| e.to_string())?.expected_value;
        if best_two < expected_max / 2.0 - 1e-9 || best_two > best + 1e-9 {
            return Err(format!("set {i}: constructions {best_two}, exhaustive {best}, E[V*] {expected_max}"));
        }
    }
    let mut ratios = Vec::new();
    for eps in [0.1, 0.05] {
        let c = scenarios::two_point_tight(eps);
        let l = scenarios::two_point_tight_lambda(eps);
        let inst = Instance::new(c.iter().map(|d| d.to_distribution()).collect(), l, 0.0).unwrap();
        let best = best_ordering_exhaustive(&inst).map_err(|e| e.to_string())?.expected_value;
        let ev1 = c[0].expectation();
        if (best - ev1).abs() > 1e-12 {
            return Err(format!("epsilon {eps}: best ordering {best}, E[V_1] {ev1}"));
        }
        ratios.push(inst.max_distribution().expectation() / best);
    }
    if !(ratios[1] > ratios[0] && ratios[1] < 2.0) {
        return Err(format!("tightness ratios {ratios:?} not increasing towards 2"));
    }
    Ok(format!("100 random sets within factor 2; tightness ratios {:.6} -> {:.6}", ratios[0], ratios[1]))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("example ratios", Duration::from_secs(1), example_ratios),
        ("two-step example", Duration::from_secs(1), two_step_example),
        ("oracle equivalence", Duration::from_secs(30), oracle_equivalence),
        ("ratio bounds", Duration::from_secs(60), ratio_bounds),
        ("monotonicity suite", Duration::from_secs(60), monotonicity_suite),
        ("threshold calibration", Duration::from_secs(60), calibration),
        ("rho solver", Duration::from_secs(1), rho_solver),
        ("random order", Duration::from_secs(60), random_order),
        ("two-point ordering", Duration::from_secs(60), two_point),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > *budget => Err(format!("{msg}; took {elapsed:.2?}, budget {budget:.0?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{elapsed:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("SKIP 10 asymptotics: limits in n and lambda are not reproducible at desk scale; finite checks are criteria 7 to 9");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
