use proptest::prelude::*;

use refstop::dp::Decision;
use refstop::order::{ordering_by_high, random_order_value, RandomOrderMode, SubsetPolicy};
use refstop::properties::{curated_cases, generate_instances, generate_two_point, run_cases, run_suite, GeneratorConfig, SuiteOptions};
use refstop::{brute_force_optimal, max_distribution, optimal_report, solve, DiscreteDistribution, Instance};

fn lattice_distribution() -> impl Strategy<Value = DiscreteDistribution> {
    prop::collection::btree_map(0u32..=64, 1u32..=8, 1..=3).prop_map(|m| {
        let total: u32 = m.values().sum();
        DiscreteDistribution::new(m.into_iter().map(|(v, w)| (f64::from(v) / 16.0, f64::from(w) / f64::from(total))))
            .unwrap()
    })
}

fn instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (
        prop::collection::vec(lattice_distribution(), 1..=max_n),
        prop::sample::select(vec![0.0, 0.5, 1.0, 2.0, 5.0]),
        prop::sample::select(vec![0.0, 0.0, 1.0, 2.5]),
    )
        .prop_map(|(c, l, r)| Instance::new(c, l, r).unwrap())
}

/// `E[V*]` by enumerating every joint realization.
fn enumerated_max(candidates: &[DiscreteDistribution]) -> Vec<(f64, f64)> {
    let mut law: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    let mut first = true;
    for d in candidates {
        let mut next = Vec::new();
        for &(m, p) in &law {
            for a in d.atoms() {
                let v = if first { a.value } else { m.max(a.value) };
                next.push((v, p * a.probability));
            }
        }
        law = next;
        first = false;
    }
    law
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn max_law_matches_enumeration(inst in instance(4)) {
        let fast = max_distribution(inst.candidates());
        let slow = enumerated_max(inst.candidates());
        for a in fast.atoms() {
            let p: f64 = slow.iter().filter(|(v, _)| *v == a.value).map(|(_, p)| p).sum();
            prop_assert!((p - a.probability).abs() < 1e-12);
        }
        let mean: f64 = slow.iter().map(|(v, p)| v * p).sum();
        prop_assert!((mean - fast.expectation()).abs() < 1e-12);
    }

    #[test]
    fn max_law_ignores_order(inst in instance(4), seed in 0u64..1000) {
        let n = inst.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.rotate_left((seed as usize) % n);
        if seed % 2 == 1 {
            order.reverse();
        }
        let (a, b) = (inst.max_distribution(), inst.permuted(&order).max_distribution());
        prop_assert_eq!(a.support_size(), b.support_size());
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            prop_assert_eq!(x.value, y.value);
            prop_assert!((x.probability - y.probability).abs() < 1e-15);
        }
    }

    #[test]
    fn table_matches_history_tree(inst in instance(4)) {
        let oracle = brute_force_optimal(&inst).unwrap();
        let report = optimal_report(&inst);
        prop_assert!((solve(&inst).root_utility() - oracle.expected_utility).abs() < 1e-9);
        prop_assert!((report.expected_value - oracle.expected_value).abs() < 1e-9);
        prop_assert!((report.expected_loss - oracle.expected_loss).abs() < 1e-9);
    }

    #[test]
    fn rational_agent_matches_classic_recursion(inst in instance(5)) {
        let inst = inst.with_lambda(0.0).unwrap().with_initial_reference(0.0).unwrap();
        let c = inst.candidates();
        let mut w = c.last().unwrap().expectation();
        for d in c[..c.len() - 1].iter().rev() {
            w = d.atoms().iter().map(|a| a.probability * a.value.max(w)).sum();
        }
        prop_assert!((solve(&inst).root_utility() - w).abs() < 1e-12);
        prop_assert!((optimal_report(&inst).expected_value - w).abs() < 1e-12);
    }

    #[test]
    fn thresholds_reproduce_decisions(inst in instance(4)) {
        let table = solve(&inst);
        let policy = table.thresholds();
        let grid = table.grid();
        for step in 0..inst.len() {
            for vi in 0..grid.len() {
                for &xi in grid.atom_indices(step) {
                    let by_table = if table.stops_at(step, vi, xi) { Decision::Stop } else { Decision::Continue };
                    prop_assert_eq!(policy.decide(step, vi, grid.value(xi)), by_table);
                }
            }
        }
    }

    #[test]
    fn subset_table_is_permutation_average(inst in instance(4)) {
        use itertools::Itertools;
        let policy = SubsetPolicy::solve(&inst).unwrap();
        let perms: Vec<Vec<usize>> = (0..inst.len()).permutations(inst.len()).collect();
        let mean = perms.iter().map(|p| policy.evaluate_permutation(&inst, p).0).sum::<f64>() / perms.len() as f64;
        prop_assert!((mean - policy.root().expected_value).abs() < 1e-9);
    }
}

#[test]
fn max_law_is_bitwise_order_free_on_dyadic_lattice() {
    for g in generate_instances(&GeneratorConfig::default()) {
        let n = g.instance.len();
        let reversed: Vec<usize> = (0..n).rev().collect();
        assert_eq!(g.instance.max_distribution(), g.instance.permuted(&reversed).max_distribution());
    }
}

#[test]
fn monte_carlo_within_three_standard_errors() {
    let config = GeneratorConfig { n_min: 6, n_max: 6, count: 3, seed: 5, ..GeneratorConfig::default() };
    for g in generate_instances(&config) {
        let inst = g.instance.with_lambda(1.0).unwrap();
        let exact = random_order_value(&inst, RandomOrderMode::Exact).unwrap().expected_value;
        let mc = random_order_value(&inst, RandomOrderMode::MonteCarlo { samples: 100_000, seed: 7 }).unwrap();
        let se = mc.std_error.unwrap();
        assert!((mc.expected_value - exact).abs() <= 3.0 * se + 1e-12, "exact {exact}, mc {} +- {se}", mc.expected_value);
    }
}

#[test]
fn identical_candidates_agree_across_solvers() {
    for n in [3, 4, 5] {
        let inst = refstop::scenarios::iid_n(n);
        let subset = SubsetPolicy::solve(&inst).unwrap().root().expected_value;
        let fixed = optimal_report(&inst).expected_value;
        let ev = refstop::scenarios::iid_n_distribution(n).expectation();
        let mut opt = ev;
        for _ in 1..n {
            opt = ev + opt / n as f64;
        }
        assert!((subset - fixed).abs() < 1e-9 && (fixed - opt).abs() < 1e-9, "n={n}");
    }
}

/// In the decreasing-`high` ordering every candidate before the best-low
/// candidate is taken exactly when its high value shows up.
#[test]
fn high_value_ordering_selects_on_high() {
    let lambdas = [0.0, 0.5, 1.0, 2.0, 5.0];
    for (i, c) in generate_two_point(100, 6, 3).into_iter().enumerate() {
        let lambda = lambdas[i % lambdas.len()];
        let order = ordering_by_high(&c);
        let best_low = (0..c.len())
            .find(|&j| c.iter().all(|d| d.low <= c[j].low))
            .unwrap();
        let cut = order.iter().position(|&j| j == best_low).unwrap();
        let arranged: Vec<_> = order.iter().map(|&j| c[j].to_distribution()).collect();
        let inst = Instance::new(arranged, lambda, 0.0).unwrap();
        let table = solve(&inst);
        let grid = table.grid();

        let mut reachable = vec![false; grid.len()];
        reachable[grid.initial_index()] = true;
        for step in 0..cut.min(inst.len() - 1) {
            let d = c[order[step]];
            let (hi, lo) = (grid.index_of(d.high).unwrap(), grid.index_of(d.low).unwrap());
            let mut next = vec![false; grid.len()];
            for vi in (0..grid.len()).filter(|&v| reachable[v]) {
                assert!(table.stops_at(step, vi, hi), "set {i} step {step}: passes on high");
                assert!(!table.stops_at(step, vi, lo), "set {i} step {step}: stops on low");
                next[vi.max(lo)] = true;
            }
            reachable = next;
        }
    }
}

#[test]
fn verdicts_are_reproducible() {
    let config = GeneratorConfig { count: 25, seed: 99, ..GeneratorConfig::default() };
    let a = serde_json::to_string(&run_suite(&config, &SuiteOptions::default())).unwrap();
    let b = serde_json::to_string(&run_suite(&config, &SuiteOptions::default())).unwrap();
    assert_eq!(a, b);
}

#[test]
fn flipped_decision_is_caught_on_worked_instances() {
    let clean = run_cases(&curated_cases(), &SuiteOptions::default());
    let mutated = run_cases(&curated_cases(), &SuiteOptions::mutated());
    let early = |v: &&refstop::PropertyVerdict| v.property <= refstop::PropertyId::P8;
    assert!(clean.iter().filter(early).all(|v| v.passed));
    assert!(mutated.iter().filter(early).any(|v| !v.passed));
}
