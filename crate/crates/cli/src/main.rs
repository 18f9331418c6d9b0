//! `refstop`: solve, verify and reproduce loss-averse stopping instances.
//!
//! Exit status is 0 on success, 1 when a reproduction or verification
//! check fails, and 2 on usage, parse or domain errors.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{Cell, Report, Table};
use refstop::dp::{solve_with, SolveOptions, DEFAULT_INDIFFERENCE_TOLERANCE};
use refstop::evaluator::evaluate_policy;
use refstop::order::{
    best_ordering_exhaustive, evaluate_ordering, random_order_value, solve_rho, two_point_orderings_for,
    RandomOrderMode, DEFAULT_RHO_TOLERANCE,
};
use refstop::properties::{
    curated_cases, run_cases, run_suite, GeneratorConfig, PropertyId, SuiteOptions, SuiteSummary, PROPERTY_TOLERANCE,
};
use refstop::reproduce::{reproduce, ReproduceParams, Scenario};
use refstop::Instance;

#[derive(Parser)]
#[command(name = "refstop", version, about = "Optimal stopping for loss-averse, reference-dependent agents")]
#[command(args_conflicts_with_subcommands = true, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mutation {
    /// Invert the first decision of every solved table.
    Decide,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    output: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and report the optimal rule's expectations.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Overrides the loss weight stored in the file.
        #[arg(long)]
        lambda: Option<f64>,
        /// Include the value function and thresholds.
        #[arg(long)]
        dump_table: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Recompute a worked instance and compare with its closed form.
    Reproduce {
        /// example1, sec41, iid_n, two_point_tight or rho_table.
        #[arg(value_parser = clap::value_parser!(Scenario))]
        scenario: Scenario,
        #[arg(long, alias = "lambdas", value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long, alias = "epsilons", value_delimiter = ',')]
        epsilon: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check the property catalogue on worked or generated instances.
    Verify {
        /// Check the worked instances.
        #[arg(long)]
        curated: bool,
        /// Number of generated instances.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, alias = "lambdas", value_delimiter = ',')]
        lambda: Vec<f64>,
        /// Largest generated candidate count.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum)]
        mutate: Option<Mutation>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Random-order value and chosen orderings for an instance.
    Order {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve the random-order bound equation for each weight.
    Rho {
        #[arg(long, alias = "lambdas", value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

enum Outcome {
    Ok,
    Mismatch,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(2)
        }
    }
}

/// The error chain, skipping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !parts.last().is_some_and(|p| p.contains(&text)) {
            parts.push(text);
        }
    }
    parts.join(": ")
}

fn load_instance(path: &Path, lambda: Option<f64>) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let instance = Instance::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(match lambda {
        Some(l) => instance.with_lambda(l)?,
        None => instance,
    })
}

fn emit(report: &Report, out: &OutputArgs) -> Result<()> {
    let text = match out.output {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &out.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Solve { instance, lambda, dump_table, out } => {
            let inst = load_instance(&instance, lambda)?;
            emit(&solve_report(&inst, dump_table), &out)?;
            Ok(Outcome::Ok)
        }
        Command::Reproduce { scenario, lambda, epsilon, n, tol, out } => {
            let params = ReproduceParams { lambdas: lambda, epsilons: epsilon, ns: n, tolerance: tol };
            let r = reproduce(scenario, &params)?;
            let mut report = Report::default();
            report.meta("command", "reproduce");
            report.meta("scenario", r.scenario.name());
            report.meta("tolerance", r.tolerance);
            report.meta("passed", r.passed());
            let mut table = Table::new(r.scenario.name(), r.columns.iter().copied());
            for row in &r.rows {
                table.push(row.iter().map(|&x| Cell::Num(x)).collect());
            }
            report.tables.push(table);
            if !r.passed() {
                let mut m = Table::new("mismatches", ["detail"]);
                for line in &r.mismatches {
                    m.push(vec![line.as_str().into()]);
                }
                report.tables.push(m);
            }
            emit(&report, &out)?;
            Ok(if r.passed() { Outcome::Ok } else { Outcome::Mismatch })
        }
        Command::Verify { curated, count, seed, lambda, n, tol, mutate, out } => {
            if !curated && count.is_none() {
                bail!("nothing to verify: pass --curated and/or --count N");
            }
            let mut options = if mutate.is_some() { SuiteOptions::mutated() } else { SuiteOptions::default() };
            options.tolerance = tol.unwrap_or(PROPERTY_TOLERANCE);
            let mut report = Report::default();
            report.meta("command", "verify");
            report.meta("tolerance", options.tolerance);
            report.meta("mutate", mutate.is_some());
            let mut verdicts = Vec::new();
            if curated {
                verdicts.extend(run_cases(&curated_cases(), &options));
            }
            if let Some(count) = count {
                let mut config = GeneratorConfig { count, ..GeneratorConfig::default() };
                if let Some(s) = seed {
                    config.seed = s;
                }
                if !lambda.is_empty() {
                    config.lambdas = lambda;
                }
                if let Some(n) = n {
                    config.n_max = n.max(config.n_min);
                }
                report.meta("seed", config.seed);
                report.meta("count", config.count);
                report.meta(
                    "lambdas",
                    config.lambdas.iter().map(|&l| output::format_number(l)).collect::<Vec<_>>().join(" "),
                );
                verdicts.extend(run_suite(&config, &options));
            }
            let summary = SuiteSummary::new(&verdicts);
            report.meta("checked", summary.checked);
            report.meta("failed", summary.failed);
            let mut table = Table::new("summary", ["property", "checked", "failed", "warnings", "min_slack"]);
            for id in PropertyId::ALL {
                let p = id.to_string();
                let Some(t) = summary.by_property.get(&p) else { continue };
                table.push(vec![p.into(), t.checked.into(), t.failed.into(), t.warnings.into(), t.min_slack.into()]);
            }
            report.tables.push(table);
            let mut failures = Table::new("failures", ["property", "case", "digest", "lambdas", "slack", "witness"]);
            for v in verdicts.iter().filter(|v| !v.passed) {
                let lambdas = v.lambdas.iter().map(|&l| output::format_number(l)).collect::<Vec<_>>().join(" ");
                let witness = v.witness.as_ref().map(|w| w.to_string()).unwrap_or_default();
                failures.push(vec![
                    v.property.to_string().into(),
                    v.case.as_str().into(),
                    v.instance_digest.as_str().into(),
                    lambdas.into(),
                    v.slack.into(),
                    witness.into(),
                ]);
            }
            report.tables.push(failures);
            emit(&report, &out)?;
            Ok(if summary.all_passed() { Outcome::Ok } else { Outcome::Mismatch })
        }
        Command::Order { instance, lambda, mode, samples, seed, out } => {
            let inst = load_instance(&instance, lambda)?;
            let mode = match mode {
                Mode::Exact => RandomOrderMode::Exact,
                Mode::Mc => match seed {
                    Some(seed) => RandomOrderMode::MonteCarlo { samples, seed },
                    None => bail!("--mode mc requires --seed"),
                },
            };
            emit(&order_report(&inst, mode)?, &out)?;
            Ok(Outcome::Ok)
        }
        Command::Rho { lambda, tol, out } => {
            let tol = tol.unwrap_or(DEFAULT_RHO_TOLERANCE);
            let lambdas = if lambda.is_empty() { vec![0.0, 1.0, 10.0, 1e2, 1e4, 1e6] } else { lambda };
            let mut report = Report::default();
            report.meta("command", "rho");
            report.meta("tolerance", tol);
            let mut table = Table::new("rho", ["lambda", "rho", "ln_lambda", "rho_minus_ln_lambda", "residual", "iterations"]);
            for l in lambdas {
                let s = solve_rho(l, tol)?;
                table.push(vec![l.into(), s.rho.into(), l.ln().into(), (s.rho - l.ln()).into(), s.residual.into(), s.iterations.into()]);
            }
            report.tables.push(table);
            emit(&report, &out)?;
            Ok(Outcome::Ok)
        }
    }
}

fn permutation_text(p: &[usize]) -> String {
    p.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}

fn solve_report(inst: &Instance, dump_table: bool) -> Report {
    let table = solve_with(inst, SolveOptions::default());
    let r = evaluate_policy(inst, &table).expect("table solved for this instance");
    let mut report = Report::default();
    report.meta("command", "solve");
    report.meta("lambda", inst.lambda());
    report.meta("initial_reference", inst.initial_reference());
    report.meta("n", inst.len());
    report.meta("indifference_tolerance", DEFAULT_INDIFFERENCE_TOLERANCE);

    let mut summary = Table::new("summary", ["root_utility", "expected_value", "expected_loss", "expected_utility"]);
    summary.push(vec![table.root_utility().into(), r.expected_value.into(), r.expected_loss.into(), r.expected_utility.into()]);
    report.tables.push(summary);

    let mut stops = Table::new("stop_time", ["candidate", "probability"]);
    for (i, &p) in r.stop_time_distribution.iter().enumerate() {
        stops.push(vec![(i + 1).into(), p.into()]);
    }
    report.tables.push(stops);

    let mut law = Table::new("selected_value", ["value", "probability"]);
    for &(v, p) in &r.selected_value_distribution {
        law.push(vec![v.into(), p.into()]);
    }
    report.tables.push(law);

    if dump_table {
        let dump = table.dump();
        let mut t = Table::new("value_function", ["candidate", "reference", "utility", "threshold"]);
        for (step, row) in dump.utility.iter().enumerate() {
            for (vi, &u) in row.iter().enumerate() {
                t.push(vec![(step + 1).into(), dump.grid[vi].into(), u.into(), dump.theta[step][vi].into()]);
            }
        }
        report.tables.push(t);
    }
    report
}

fn order_report(inst: &Instance, mode: RandomOrderMode) -> Result<Report> {
    let expected_max = inst.max_distribution().expectation();
    let rho = solve_rho(inst.lambda(), DEFAULT_RHO_TOLERANCE)?.rho;
    let mut report = Report::default();
    report.meta("command", "order");
    report.meta("lambda", inst.lambda());
    report.meta("n", inst.len());
    report.meta("expected_max", expected_max);
    report.meta("rho", rho);
    report.meta("bound_n", inst.len());
    report.meta("bound_rho", rho);
    report.meta("bound_two", 2.0);

    let ratio = |v: f64| if expected_max == 0.0 { 1.0 } else { expected_max / v };
    let mut table = Table::new("orderings", ["ordering", "permutation", "expected_value", "expected_utility", "prophet_ratio"]);
    let identity: Vec<usize> = (0..inst.len()).collect();
    let given = evaluate_ordering(inst, &identity);
    table.push(vec!["given".into(), permutation_text(&given.permutation).into(), given.expected_value.into(), given.expected_utility.into(), ratio(given.expected_value).into()]);

    let random = random_order_value(inst, mode)?;
    match mode {
        RandomOrderMode::Exact => report.meta("mode", "exact"),
        RandomOrderMode::MonteCarlo { samples, seed } => {
            report.meta("mode", "mc");
            report.meta("samples", samples);
            report.meta("seed", seed);
            report.meta("std_error", random.std_error.unwrap_or(0.0));
        }
    }
    table.push(vec!["random".into(), "".into(), random.expected_value.into(), random.expected_utility.into(), ratio(random.expected_value).into()]);

    if inst.candidates().iter().all(|d| d.support_size() <= 2) {
        let (a, b) = two_point_orderings_for(inst)?;
        for (name, o) in [("ordering1", a), ("ordering2", b)] {
            table.push(vec![name.into(), permutation_text(&o.permutation).into(), o.expected_value.into(), o.expected_utility.into(), ratio(o.expected_value).into()]);
        }
    }
    if mode == RandomOrderMode::Exact {
        let best = best_ordering_exhaustive(inst)?;
        table.push(vec!["best".into(), permutation_text(&best.permutation).into(), best.expected_value.into(), best.expected_utility.into(), ratio(best.expected_value).into()]);
    }
    report.tables.push(table);
    Ok(report)
}
