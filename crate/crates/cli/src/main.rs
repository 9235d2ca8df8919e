use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rdna_core::experiments::{self, SweepSettings};
use rdna_core::planner::{plan_link, LinkPlanInputs};
use rdna_core::results::{format_sig9, replications_csv, summary_csv};
use rdna_core::sim::run_batch;
use rdna_core::{ConfigError, EdgeMonitor, ReliabilityTarget, RunOptions, ScenarioConfig, SimSetup};

const SEED_ENV: &str = "RDNA_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "rdna",
    version,
    about = "Edge network latency, power and redundancy experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run replications of one scenario and write summary.csv and replications.csv.
    Run(RunArgs),
    /// Mean latency against TAP count for every variant.
    Fig4(Fig4Args),
    /// Mean power against TAP count.
    Fig5(Fig5Args),
    /// Minimal channel count against required reliability.
    Fig6(Fig6Args),
    /// Plan switching interval, backup channels and backup TAPs for one link.
    Plan(PlanArgs),
}

#[derive(Args, Debug)]
struct BatchArgs {
    /// Scenario config; the built-in preset when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Base seed; the RDNA_SEED environment variable takes precedence.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    batch: BatchArgs,
    #[arg(long)]
    smart: bool,
    #[arg(long)]
    d2d: bool,
    /// Channels per link.
    #[arg(long, default_value_t = 1)]
    w: usize,
    /// TAPs per object.
    #[arg(long, default_value_t = 1)]
    na: usize,
}

#[derive(Args, Debug)]
struct Fig4Args {
    #[command(flatten)]
    batch: BatchArgs,
    #[arg(long = "n-o", value_delimiter = ',', default_value = "50")]
    n_o: Vec<usize>,
    #[arg(long = "n-tap-range", default_value = "2..20", value_parser = parse_range)]
    n_tap_range: RangeInclusive<usize>,
}

#[derive(Args, Debug)]
struct Fig5Args {
    #[command(flatten)]
    batch: BatchArgs,
    #[arg(long = "n-tap-range", default_value = "2..20", value_parser = parse_range)]
    n_tap_range: RangeInclusive<usize>,
}

#[derive(Args, Debug)]
struct Fig6Args {
    #[arg(long)]
    out: PathBuf,
    /// Values of mu_s / lambda_p.
    #[arg(long, value_delimiter = ',', default_value = "1,2,6")]
    ratios: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    na: Vec<usize>,
    #[arg(
        long = "xi-grid",
        value_delimiter = ',',
        default_value = "0.9,0.95,0.99,0.995,0.999,0.9999,1"
    )]
    xi_grid: Vec<f64>,
    /// Assume channel knowledge at the edge.
    #[arg(long)]
    smart: bool,
    /// Fraction of PU returns the edge monitor foresees, smart mode only.
    #[arg(long, default_value_t = 1.0)]
    accuracy: f64,
    #[arg(long = "w-max", default_value_t = 32)]
    w_max: usize,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[arg(long = "lambda-p")]
    lambda_p: f64,
    #[arg(long = "xi-min")]
    xi_min: f64,
    #[arg(long = "tau-max")]
    tau_max: f64,
    #[arg(long = "mu-s", default_value_t = 6.0)]
    mu_s: f64,
    #[arg(long = "mu-p", default_value_t = 1.0)]
    mu_p: f64,
    #[arg(long, default_value_t = 0.3)]
    slot: f64,
    /// Availability of each candidate TAP.
    #[arg(
        long = "tap-availability",
        value_delimiter = ',',
        default_value = "0.95,0.9,0.95,0.9,0.95"
    )]
    tap_availability: Vec<f64>,
    #[arg(long = "w-min", default_value_t = 1)]
    w_min: usize,
    #[arg(long = "w-max", default_value_t = 16)]
    w_max: usize,
}

/// Exit 1 for bad input, 2 when the simulation itself fails.
enum Failure {
    Input(String),
    Simulation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Simulation(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Simulation(m) => m,
        }
    }
}

fn input(msg: impl ToString) -> Failure {
    Failure::Input(msg.to_string())
}

fn simulation(msg: impl ToString) -> Failure {
    Failure::Simulation(msg.to_string())
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("bad range start `{a}`: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("bad range end `{b}`: {e}"))?;
    if a == 0 || a > b {
        return Err(format!("range `{s}` must satisfy 1 <= A <= B"));
    }
    Ok(a..=b)
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

struct Batch {
    config: ScenarioConfig,
    settings: SweepSettings,
    out: PathBuf,
}

impl BatchArgs {
    fn resolve(&self) -> Result<Batch, Failure> {
        let config = match &self.scenario {
            Some(path) => ScenarioConfig::load(path).map_err(|e| match e {
                ConfigError::Io { .. } => input(e),
                _ => input(format!("{}: {e}", path.display())),
            })?,
            None => ScenarioConfig::preset(),
        };
        config.validate().map_err(input)?;
        let base_seed = match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|e| input(format!("{SEED_ENV}=`{v}` is not a u64: {e}")))?,
            Err(_) => self.seed,
        };
        if self.reps == 0 {
            return Err(input("invalid `reps`: must be at least 1"));
        }
        let parallelism = match self.threads {
            Some(0) => return Err(input("invalid `threads`: must be at least 1")),
            Some(t) => t,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        fs::create_dir_all(&self.out).map_err(|e| input(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(Batch {
            config,
            settings: SweepSettings {
                reps: self.reps,
                base_seed,
                parallelism,
            },
            out: self.out.clone(),
        })
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| simulation(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let batch = args.batch.resolve()?;
    if args.w == 0 || args.na == 0 {
        return Err(input("invalid `w`/`na`: must be at least 1"));
    }
    let setup = SimSetup::from_config(&batch.config).map_err(input)?;
    let options = RunOptions {
        smart: args.smart,
        d2d: args.d2d,
        w: args.w,
        n_a: args.na,
    };
    let s = batch.settings;
    let result = run_batch(&setup, &options, s.reps, s.base_seed, s.parallelism).map_err(simulation)?;
    write(&batch.out, "summary.csv", &summary_csv(&result.summary))?;
    write(&batch.out, "replications.csv", &replications_csv(&result.replications))
}

fn cmd_fig4(args: &Fig4Args) -> Result<(), Failure> {
    let batch = args.batch.resolve()?;
    if args.n_o.is_empty() {
        return Err(input("invalid `n-o`: empty list"));
    }
    let tables =
        experiments::fig4(&batch.config, &args.n_o, args.n_tap_range.clone(), batch.settings).map_err(simulation)?;
    for (variant, table) in tables {
        write(&batch.out, &format!("fig4_{}.csv", variant.name()), &table.to_csv())?;
    }
    Ok(())
}

fn cmd_fig5(args: &Fig5Args) -> Result<(), Failure> {
    let batch = args.batch.resolve()?;
    let table = experiments::fig5(&batch.config, args.n_tap_range.clone(), batch.settings).map_err(simulation)?;
    write(&batch.out, "fig5_baseline.csv", &table.to_csv())
}

fn cmd_fig6(args: &Fig6Args) -> Result<(), Failure> {
    if args.ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(input("invalid `ratios`: must be positive"));
    }
    if args.na.contains(&0) {
        return Err(input("invalid `na`: must be at least 1"));
    }
    if args.xi_grid.iter().any(|x| !(*x > 0.0 && *x <= 1.0)) {
        return Err(input("invalid `xi-grid`: values must lie in (0, 1]"));
    }
    if !(0.0..=1.0).contains(&args.accuracy) {
        return Err(input("invalid `accuracy`: must lie in [0, 1]"));
    }
    if args.w_max == 0 {
        return Err(input("invalid `w-max`: must be at least 1"));
    }
    let monitor = args.smart.then_some(EdgeMonitor {
        prediction_accuracy: args.accuracy,
    });
    let (table, _) = experiments::fig6(&args.ratios, &args.na, &args.xi_grid, monitor, args.w_max);
    fs::create_dir_all(&args.out).map_err(|e| input(format!("cannot create {}: {e}", args.out.display())))?;
    let name = if args.smart {
        "fig6_smart.csv"
    } else {
        "fig6_baseline.csv"
    };
    write(&args.out, name, &table.to_csv())
}

fn cmd_plan(args: &PlanArgs) -> Result<(), Failure> {
    let inputs = LinkPlanInputs {
        lambda_p: args.lambda_p,
        mu_s: args.mu_s,
        mu_p: args.mu_p,
        slot_duration: args.slot,
        tap_availabilities: args.tap_availability.clone(),
        w_min: args.w_min,
        w_max: args.w_max,
    };
    let target = ReliabilityTarget {
        xi_min: args.xi_min,
        tau_max: args.tau_max,
    };
    let plan = plan_link(&inputs, target).map_err(input)?;
    let taps: Vec<String> = plan.tap_set.iter().map(|t| t.to_string()).collect();
    println!("t_w_star,{}", format_sig9(plan.t_w_star));
    println!("w_star,{}", plan.w_star);
    println!("n_a,{}", plan.n_a);
    println!("tap_set,{}", taps.join(" "));
    println!("achieved_reliability,{}", format_sig9(plan.achieved_reliability));
    println!("achieved_latency,{}", format_sig9(plan.achieved_latency));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("bad arguments");
            eprintln!("error: {}", one_line(first.trim_start_matches("error: ")));
            return ExitCode::from(1);
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Fig4(a) => cmd_fig4(a),
        Command::Fig5(a) => cmd_fig5(a),
        Command::Fig6(a) => cmd_fig6(a),
        Command::Plan(a) => cmd_plan(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", one_line(f.message()));
            ExitCode::from(f.code())
        }
    }
}
