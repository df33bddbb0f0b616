//! Command-line interface: merge e-values, certify merging functions, and
//! run the likelihood-ratio simulation.
//!
//! Exit codes for `certify`: 0 = certified on the grid, 1 = counterexample
//! or violation found, 2 = inconclusive (budget exceeded). Input and
//! configuration errors exit with 3 for every subcommand.

use evalues_cli::{config, format, funcid, report, svg};

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evalues::anytime::{check_anytime, StoppingRule};
use evalues::biatomic::{verify_ie_biatomic, DEFAULT_IE_BUDGET};
use evalues::catalog::block_product_trajectory;
use evalues::envelope::{se_envelope, DEFAULT_CELL_BUDGET, DOMINATION_TOL};
use evalues::grid::GridSpec;
use evalues::martingale::{convex_combine, evaluate_additive, evaluate_martingale};
use evalues::mc::IidTwoPoint;
use evalues::par::with_threads;
use evalues::sim::{aggregate, run_experiment, SimConfig, Strategy};
use evalues::{EVector, Error as LibError, GamblingSystem, StakeFunction, Trajectory};
use format::{fmt_g16, fmt_g17};
use funcid::{bind, FunctionId};
use report::Report;

const EXIT_CERTIFIED: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "evalues",
    version,
    about = "Merge, certify, and simulate e-values",
    disable_help_subcommand = true
)]
struct Cli {
    /// Worker threads (defaults to EVALUES_THREADS, then all cores).
    /// Outputs do not depend on the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a merging function to e-values given on the command line.
    Merge(MergeArgs),
    /// Run a certification oracle and write a report.
    Certify(CertifyArgs),
    /// Run the Gaussian likelihood-ratio experiment and write CSV/SVG.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct MergeArgs {
    /// Function id: product, mean, ustat:n, block:K1,..., symmetric2,
    /// decomposed:file, generalized:file, counterexampleG:c=...
    function: String,
    /// The e-values to merge.
    evalues: Vec<String>,
    /// Also print the capital trajectory S_0..S_K (martingale functions only).
    #[arg(long)]
    trajectory: bool,
}

#[derive(Args)]
struct CertifyArgs {
    /// Oracle: ie (bi-atomic scan), se (envelope), anytime (Monte Carlo).
    mode: String,
    /// Function id, as for `merge`.
    #[arg(long)]
    function: String,
    /// Number of inputs for functions of flexible arity.
    #[arg(long)]
    k: Option<usize>,
    /// Grid for se mode, e.g. n=2,M=100.
    #[arg(long)]
    grid: Option<String>,
    /// Atom values for ie mode, e.g. 0,0.5,1,2.
    #[arg(long)]
    atoms: Option<String>,
    /// Probability grid steps for ie mode.
    #[arg(long, default_value_t = 100)]
    prob_steps: usize,
    /// Budget: table cells for se, function evaluations for ie.
    #[arg(long)]
    budget: Option<u128>,
    /// Model for anytime mode: twopoint:lo,hi,p or uniform:hi.
    #[arg(long, default_value = "twopoint:0.5,1.5,0.5")]
    model: String,
    /// Stopping rules for anytime mode, e.g. threshold:2,fixed:3.
    #[arg(long, default_value = "threshold:2")]
    taus: String,
    /// Monte-Carlo runs for anytime mode.
    #[arg(long, default_value_t = 100_000)]
    runs: usize,
    /// RNG seed for anytime mode.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include the full bet table in se reports (can be huge).
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config file; mutually exclusive with the parameter flags.
    #[arg(long, conflicts_with_all = ["k", "runs", "theta_true", "theta0", "prior_sd", "uniform_hi", "seed", "strategies", "clamp_mle"])]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 0.3)]
    theta_true: f64,
    #[arg(long, default_value_t = 0.1)]
    theta0: f64,
    #[arg(long, default_value_t = 0.2)]
    prior_sd: f64,
    #[arg(long, default_value_t = 0.5)]
    uniform_hi: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated subset of fixed_true, fixed_misspecified,
    /// random_uniform, bayes, mle. Default: all five.
    #[arg(long)]
    strategies: Option<String>,
    /// Clamp the MLE to the alternative theta >= 0.
    #[arg(long)]
    clamp_mle: bool,
    /// Directory for the CSV and SVG outputs.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var("EVALUES_THREADS").ok()?.parse().ok());
    let code = with_threads(threads, || match cli.command {
        Command::Merge(args) => cmd_merge(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Simulate(args) => cmd_simulate(args),
    });
    ExitCode::from(code)
}

fn usage_error(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    EXIT_USAGE
}

fn parse_evalues(raw: &[String]) -> Result<EVector, String> {
    if raw.is_empty() {
        return Err("no e-values given".into());
    }
    let mut values = Vec::with_capacity(raw.len());
    for (i, piece) in raw.iter().enumerate() {
        let value: f64 = piece
            .parse()
            .map_err(|_| format!("e-value #{} ('{piece}') is not a number", i + 1))?;
        values.push(value);
    }
    EVector::new(values).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// merge
// ---------------------------------------------------------------------------

fn merge_trajectory(id: &FunctionId, e: &EVector) -> Result<Trajectory, String> {
    match id {
        FunctionId::Product => evaluate_martingale(&GamblingSystem::product(), 1.0, e)
            .map_err(|err| err.to_string()),
        FunctionId::Mean => {
            let stake = 1.0 / e.len() as f64;
            evaluate_additive(&StakeFunction::constant(stake), 1.0, e)
                .map_err(|err| err.to_string())
        }
        FunctionId::Block(breaks) => {
            block_product_trajectory(breaks, e.values()).map_err(|err| err.to_string())
        }
        FunctionId::UStat(n) => {
            let k = e.len();
            if k > 25 {
                return Err("too many e-values for a U-statistic trajectory".into());
            }
            let mut subsets = Vec::new();
            for mask in 0u64..(1 << k) {
                if mask.count_ones() as usize == *n {
                    subsets.push((0..k).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>());
                }
                if subsets.len() > 100_000 {
                    return Err("too many subsets for a U-statistic trajectory".into());
                }
            }
            let weight = 1.0 / subsets.len() as f64;
            let components = subsets
                .iter()
                .map(|steps| (weight, GamblingSystem::subset_product(steps), 1.0))
                .collect();
            let mix = convex_combine(components).map_err(|err| err.to_string())?;
            mix.evaluate(e).map_err(|err| err.to_string())
        }
        _ => Err(format!(
            "{} has no betting trajectory along the fixed order",
            id.label()
        )),
    }
}

fn cmd_merge(args: MergeArgs) -> u8 {
    let id = match FunctionId::parse(&args.function) {
        Ok(id) => id,
        Err(e) => return usage_error(e),
    };
    let e = match parse_evalues(&args.evalues) {
        Ok(e) => e,
        Err(msg) => return usage_error(msg),
    };
    let bound = match bind(&id, Some(e.len())) {
        Ok(b) => b,
        Err(msg) => return usage_error(msg),
    };
    println!("{}", fmt_g16(bound.eval(e.values())));
    if args.trajectory {
        match merge_trajectory(&id, &e) {
            Ok(trajectory) => {
                let parts: Vec<String> =
                    trajectory.capitals().iter().map(|&v| fmt_g16(v)).collect();
                println!("{}", parts.join(" "));
            }
            Err(msg) => return usage_error(msg),
        }
    }
    EXIT_CERTIFIED
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

fn parse_grid(spec: &str, dim: usize) -> Result<GridSpec, String> {
    let mut n = None;
    let mut cap = None;
    for piece in spec.split(',') {
        let (key, value) = piece
            .split_once('=')
            .ok_or_else(|| format!("grid piece '{piece}' is not key=value"))?;
        match key.trim() {
            "n" => {
                n = Some(
                    value
                        .parse::<u32>()
                        .map_err(|_| format!("grid resolution '{value}' is not an integer"))?,
                )
            }
            "M" | "m" => {
                cap = Some(
                    value
                        .parse::<f64>()
                        .map_err(|_| format!("grid cap '{value}' is not a number"))?,
                )
            }
            other => return Err(format!("unknown grid key '{other}' (use n and M)")),
        }
    }
    let n = n.ok_or("grid needs n=<resolution>")?;
    let cap = cap.ok_or("grid needs M=<cap>")?;
    GridSpec::new(n, cap, dim).map_err(|e| e.to_string())
}

fn parse_atoms(spec: &str) -> Result<Vec<f64>, String> {
    spec.split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("atom '{piece}' is not a number"))
        })
        .collect()
}

fn parse_model(spec: &str, horizon: usize) -> Result<Box<dyn evalues::mc::EValueModel>, String> {
    let (head, tail) = spec.split_once(':').unwrap_or((spec, ""));
    match head {
        "twopoint" => {
            let parts: Vec<&str> = tail.split(',').collect();
            if parts.len() != 3 {
                return Err("twopoint model needs lo,hi,p".into());
            }
            let lo: f64 = parts[0].parse().map_err(|_| "bad twopoint lo")?;
            let hi: f64 = parts[1].parse().map_err(|_| "bad twopoint hi")?;
            let p_hi: f64 = parts[2].parse().map_err(|_| "bad twopoint p")?;
            if !(0.0..=1.0).contains(&p_hi) || lo < 0.0 || hi < lo {
                return Err("twopoint model needs 0 <= lo <= hi and p in [0, 1]".into());
            }
            Ok(Box::new(IidTwoPoint {
                lo,
                hi,
                p_hi,
                horizon,
            }))
        }
        "uniform" => {
            let hi: f64 = tail.parse().map_err(|_| "uniform model needs hi")?;
            if !(hi > 0.0) {
                return Err("uniform hi must be positive".into());
            }
            Ok(Box::new(evalues::mc::IidUniform { hi, horizon }))
        }
        other => Err(format!(
            "unknown model '{other}' (twopoint:lo,hi,p or uniform:hi)"
        )),
    }
}

fn parse_taus(spec: &str) -> Result<Vec<StoppingRule>, String> {
    let mut rules = Vec::new();
    for piece in spec.split(',') {
        let (head, tail) = piece
            .split_once(':')
            .ok_or_else(|| format!("stopping rule '{piece}' is not kind:value"))?;
        match head {
            "threshold" => rules.push(StoppingRule::Threshold(
                tail.parse()
                    .map_err(|_| format!("bad threshold '{tail}'"))?,
            )),
            "fixed" => rules.push(StoppingRule::FixedTime(
                tail.parse()
                    .map_err(|_| format!("bad fixed time '{tail}'"))?,
            )),
            other => return Err(format!("unknown stopping rule '{other}'")),
        }
    }
    if rules.is_empty() {
        return Err("no stopping rules given".into());
    }
    Ok(rules)
}

fn deliver_report(report: &Report, out: Option<&PathBuf>) -> Result<(), String> {
    let text = report.emit();
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write report to {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_certify(args: CertifyArgs) -> u8 {
    let id = match FunctionId::parse(&args.function) {
        Ok(id) => id,
        Err(e) => return usage_error(e),
    };
    let bound = match bind(&id, args.k) {
        Ok(b) => b,
        Err(e) => return usage_error(e),
    };
    match args.mode.as_str() {
        "se" => certify_se(&args, &bound),
        "ie" => certify_ie(&args, &bound),
        "anytime" => certify_anytime(&args, &bound),
        other => usage_error(format!("unknown certify mode '{other}' (ie, se, anytime)")),
    }
}

fn certify_se(args: &CertifyArgs, bound: &funcid::BoundFunction) -> u8 {
    let grid_spec = match &args.grid {
        Some(spec) => match parse_grid(spec, bound.arity) {
            Ok(g) => g,
            Err(e) => return usage_error(e),
        },
        None => return usage_error("se mode needs --grid n=...,M=..."),
    };
    let budget = args.budget.unwrap_or(DEFAULT_CELL_BUDGET);
    let result = match se_envelope(bound.as_fn(), &grid_spec, budget) {
        Ok(r) => r,
        Err(e @ LibError::BudgetExceeded { .. }) => {
            eprintln!("inconclusive: {e}");
            return EXIT_INCONCLUSIVE;
        }
        Err(e) => return usage_error(e),
    };

    let mut report = Report::new();
    report.push("mode", "se");
    report.push("function", &bound.label);
    report.push(
        "grid",
        format!(
            "n={} M={} K={}",
            grid_spec.resolution(),
            fmt_g17(grid_spec.cap()),
            grid_spec.dim()
        ),
    );
    report.push("points-per-axis", grid_spec.point_count().to_string());
    report.push("f0", fmt_g17(result.f0));
    report.push("max-step-violation", fmt_g17(result.max_step_violation));
    let certified = result.dominated_on_grid();
    report.push(
        "verdict",
        if certified {
            "dominated-on-grid"
        } else {
            "not-se-merging"
        },
    );
    if args.full {
        let points = grid_spec.points();
        let g = points.len();
        for (level, bets) in result.bets.levels().iter().enumerate() {
            for (index, &bet) in bets.iter().enumerate() {
                let mut prefix = Vec::with_capacity(level);
                let mut rest = index;
                for _ in 0..level {
                    prefix.push(points[rest % g]);
                    rest /= g;
                }
                prefix.reverse();
                let coords: Vec<String> = prefix.iter().map(|&v| fmt_g17(v)).collect();
                report.push("bet", format!("({}) -> {}", coords.join(", "), fmt_g17(bet)));
            }
        }
    }
    if let Err(e) = deliver_report(&report, args.out.as_ref()) {
        return usage_error(e);
    }
    if certified {
        EXIT_CERTIFIED
    } else {
        EXIT_VIOLATION
    }
}

fn certify_ie(args: &CertifyArgs, bound: &funcid::BoundFunction) -> u8 {
    let atoms = match &args.atoms {
        Some(spec) => match parse_atoms(spec) {
            Ok(a) => a,
            Err(e) => return usage_error(e),
        },
        None => return usage_error("ie mode needs --atoms v1,v2,..."),
    };
    let budget = args.budget.unwrap_or(DEFAULT_IE_BUDGET);
    let check = match verify_ie_biatomic(
        bound.as_fn(),
        bound.arity,
        &atoms,
        args.prob_steps,
        budget,
    ) {
        Ok(c) => c,
        Err(e @ LibError::BudgetExceeded { .. }) => {
            eprintln!("inconclusive: {e}");
            return EXIT_INCONCLUSIVE;
        }
        Err(e) => return usage_error(e),
    };

    let mut report = Report::new();
    report.push("mode", "ie");
    report.push("function", &bound.label);
    let atom_strings: Vec<String> = atoms.iter().map(|&a| fmt_g17(a)).collect();
    report.push("atoms", atom_strings.join(","));
    report.push("prob-steps", args.prob_steps.to_string());
    report.push("candidates-per-axis", check.candidates.to_string());
    report.push("worst-mean", fmt_g17(check.worst_mean));
    for w in &check.witness {
        report.push(
            "witness",
            format!("({}, {}, {})", fmt_g17(w.x), fmt_g17(w.y), fmt_g17(w.p)),
        );
    }
    let valid = check.valid_on_grid(DOMINATION_TOL);
    report.push(
        "verdict",
        if valid {
            "certified-on-grid"
        } else {
            "counterexample-found"
        },
    );
    if let Err(e) = deliver_report(&report, args.out.as_ref()) {
        return usage_error(e);
    }
    if valid {
        EXIT_CERTIFIED
    } else {
        EXIT_VIOLATION
    }
}

fn certify_anytime(args: &CertifyArgs, bound: &funcid::BoundFunction) -> u8 {
    let horizon = bound.arity;
    let model = match parse_model(&args.model, horizon) {
        Ok(m) => m,
        Err(e) => return usage_error(e),
    };
    let rules = match parse_taus(&args.taus) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    // The prefix process pads the observed values with ones up to the
    // horizon; for the catalog martingales this is the running capital.
    let process = |prefix: &[f64]| {
        let mut padded = prefix.to_vec();
        padded.resize(horizon, 1.0);
        bound.eval(&padded)
    };
    let report_data = match check_anytime(process, model.as_ref(), &rules, args.runs, args.seed) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };

    let mut report = Report::new();
    report.push("mode", "anytime");
    report.push("function", &bound.label);
    report.push("horizon", horizon.to_string());
    report.push("model", &args.model);
    report.push("runs", args.runs.to_string());
    report.push("seed", args.seed.to_string());
    for (k, est) in report_data.fixed_time.iter().enumerate() {
        report.push(
            "fixed-k",
            format!("{} mean={} se={}", k + 1, fmt_g17(est.mean), fmt_g17(est.se)),
        );
    }
    for stopped in &report_data.stopped {
        report.push(
            "stopped",
            format!(
                "{} mean={} se={} consistent={} permutation-sum={}",
                stopped.rule,
                fmt_g17(stopped.estimate.mean),
                fmt_g17(stopped.estimate.se),
                stopped.consistent,
                fmt_g17(stopped.permutation_sum)
            ),
        );
    }
    for deviation in &report_data.deviations {
        report.push("deviation", deviation);
    }
    let consistent = report_data.consistent_with_test_martingale();
    report.push(
        "verdict",
        if consistent {
            "consistent-with-test-martingale"
        } else {
            "violation-found"
        },
    );
    if let Err(e) = deliver_report(&report, args.out.as_ref()) {
        return usage_error(e);
    }
    if consistent {
        EXIT_CERTIFIED
    } else {
        EXIT_VIOLATION
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (step, row) in rows.iter().enumerate() {
        out.push_str(&step.to_string());
        for &value in row {
            out.push(',');
            out.push_str(&fmt_g17(value));
        }
        out.push('\n');
    }
    out
}

fn cmd_simulate(args: SimulateArgs) -> u8 {
    let config = if let Some(path) = &args.config {
        match config::load_simulation(path) {
            Ok(c) => c,
            Err(e) => return usage_error(e),
        }
    } else {
        let strategies = match &args.strategies {
            None => Strategy::ALL.to_vec(),
            Some(spec) => {
                let mut out = Vec::new();
                for name in spec.split(',') {
                    match Strategy::from_name(name.trim()) {
                        Ok(s) => out.push(s),
                        Err(e) => return usage_error(e),
                    }
                }
                out
            }
        };
        SimConfig {
            k: args.k,
            runs: args.runs,
            theta_true: args.theta_true,
            theta0: args.theta0,
            prior_sd: args.prior_sd,
            uniform_hi: args.uniform_hi,
            seed: args.seed,
            strategies,
            clamp_mle: args.clamp_mle,
        }
    };

    let ts = match run_experiment(&config) {
        Ok(ts) => ts,
        Err(e) => return usage_error(e),
    };
    let means = aggregate(&ts);

    let mut header = vec!["step"];
    for strategy in &ts.strategies {
        header.push(strategy.name());
    }
    let steps = ts.horizon + 1;
    let single_rows: Vec<Vec<f64>> = (0..steps)
        .map(|k| ts.log_paths.iter().map(|paths| paths[0][k]).collect())
        .collect();
    let mean_rows: Vec<Vec<f64>> = (0..steps)
        .map(|k| means.iter().map(|m| m[k]).collect())
        .collect();

    if let Err(e) = std::fs::create_dir_all(&args.out_dir) {
        return usage_error(format!("cannot create {}: {e}", args.out_dir.display()));
    }
    let series: Vec<(String, Vec<f64>)> = ts
        .strategies
        .iter()
        .zip(&means)
        .map(|(s, m)| (s.name().to_string(), m.clone()))
        .collect();
    let chart = svg::line_chart(
        &format!(
            "mean log e-process over {} runs (theta_true = {})",
            config.runs, config.theta_true
        ),
        "mean log S_k",
        &series,
    );
    let outputs = [
        ("simulate_run.csv", csv_table(&header, &single_rows)),
        ("simulate_mean.csv", csv_table(&header, &mean_rows)),
        ("simulate_mean.svg", chart),
    ];
    for (name, contents) in &outputs {
        let path = args.out_dir.join(name);
        if let Err(e) = std::fs::write(&path, contents) {
            return usage_error(format!("cannot write {}: {e}", path.display()));
        }
        println!("wrote {}", path.display());
    }
    EXIT_CERTIFIED
}
