//! `hfb`: run experiments, sweeps and checks from the command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 config or input error,
//! 3 runtime error.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::Value;

use hidden_feedback::graph::FeedbackGraph;
use hidden_feedback::harness::{
    monte_carlo, parse_config, run_sweep, HarnessError, SweepConfig, SweepError,
};
use hidden_feedback::seed::rng_from_seed;
use hidden_feedback::verify::{run_suite, VerifyError};

use output::{write_atomic, write_checkpoints, write_json, write_phase_log, write_summary};

#[derive(Parser, Debug)]
#[command(name = "hfb", version, about = "Online learning with hidden feedback graphs")]
struct Cli {
    /// Master seed; overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replicates and checks (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment config and write its regret report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every cell of a sweep config and write a summary CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the verification suite, or the checks named with --only.
    Verify {
        #[arg(long = "only")]
        only: Vec<String>,
        /// Where to write the JSON results (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a feedback graph as JSON.
    Graphgen(GraphgenArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "family")]
struct GraphFamilyArgs {
    /// K actions in ALPHA disjoint self-looped cliques.
    #[arg(long, num_args = 2, value_names = ["K", "ALPHA"])]
    cliques: Option<Vec<usize>>,
    /// Directed Erdős–Rényi graph over K actions with edge probability P.
    #[arg(long, num_args = 2, value_names = ["K", "P"])]
    er: Option<Vec<String>>,
    /// Complete graph over K actions.
    #[arg(long, value_name = "K")]
    complete: Option<usize>,
    /// Self-loops only over K actions.
    #[arg(long, value_name = "K")]
    bandit: Option<usize>,
}

#[derive(Args, Debug)]
struct GraphgenArgs {
    #[command(flatten)]
    family: GraphFamilyArgs,
    /// Leave out self-loops (Erdős–Rényi only).
    #[arg(long)]
    no_self_loops: bool,
    /// Where to write the graph (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Checks(usize),
    Config(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Checks(_) => 1,
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Checks(n) => write!(f, "{n} check(s) failed"),
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn harness_failure(e: HarnessError) -> Failure {
    match e {
        HarnessError::Config(_) | HarnessError::Env(_) | HarnessError::Learner(_) => {
            Failure::Config(e.to_string())
        }
        _ => runtime(e),
    }
}

fn cmd_run(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let value = read_json(config)?;
    let mut cfg = parse_config(value).map_err(|(path, msg)| Failure::Config(format!("field {path}: {msg}")))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(harness_failure)?;
    info!("running {} replicates of {} over {} rounds", cfg.replicates, cfg.learner.name(), cfg.t);
    let report = monte_carlo(&cfg).map_err(harness_failure)?;
    std::fs::create_dir_all(out).map_err(runtime)?;
    write_json(&out.join("report.json"), &report).map_err(runtime)?;
    write_checkpoints(&out.join("checkpoints.csv"), &report.checkpoints).map_err(runtime)?;
    if report.per_replicate.iter().any(|r| r.phases.is_some()) {
        write_phase_log(&out.join("phase_log.csv"), &report.per_replicate).map_err(runtime)?;
    }
    info!(
        "mean pseudo-regret {:.3} (se {:.3})",
        report.pseudo_regret.mean, report.pseudo_regret.se
    );
    Ok(())
}

fn cmd_sweep(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let value = read_json(config)?;
    let mut sweep: SweepConfig = serde_path_to_error::deserialize(value)
        .map_err(|e| Failure::Config(format!("field .{}: {}", e.path(), e.inner())))?;
    if let Some(s) = seed {
        sweep.base["seed"] = s.into();
    }
    let result = run_sweep(&sweep).map_err(|e| match e {
        SweepError::Run { source, .. } => harness_failure(source),
        other => Failure::Config(other.to_string()),
    })?;
    std::fs::create_dir_all(out).map_err(runtime)?;
    for (i, (cell, report)) in result.cells.iter().enumerate() {
        let dir = out.join("cells").join(format!("cell_{i:03}"));
        std::fs::create_dir_all(&dir).map_err(runtime)?;
        write_json(&dir.join("config.json"), &cell.config).map_err(runtime)?;
        write_json(&dir.join("report.json"), report).map_err(runtime)?;
        write_checkpoints(&dir.join("checkpoints.csv"), &report.checkpoints).map_err(runtime)?;
    }
    write_summary(&out.join("summary.csv"), &result.axis_names, &result.summary).map_err(runtime)?;
    Ok(())
}

fn cmd_verify(only: &[String], out: Option<&Path>, seed: Option<u64>) -> Result<(), Failure> {
    let results = run_suite(only, seed.unwrap_or(0)).map_err(|e| match e {
        VerifyError::UnknownCheck(_) | VerifyError::Input(_) => Failure::Config(e.to_string()),
    })?;
    let json = serde_json::to_string_pretty(&results).map_err(runtime)? + "\n";
    match out {
        Some(p) => write_atomic(p, json.as_bytes()).map_err(runtime)?,
        None => print!("{json}"),
    }
    for r in &results {
        eprintln!("{:<18} {}", r.name, if r.passed() { "pass" } else { "FAIL" });
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

fn cmd_graphgen(args: &GraphgenArgs, seed: Option<u64>) -> Result<(), Failure> {
    let f = &args.family;
    let graph = if let Some(v) = &f.cliques {
        FeedbackGraph::disjoint_cliques(v[0], v[1])
    } else if let Some(v) = &f.er {
        let k: usize = v[0]
            .parse()
            .map_err(|_| Failure::Config(format!("--er: K must be an integer, got {:?}", v[0])))?;
        let p: f64 = v[1]
            .parse()
            .map_err(|_| Failure::Config(format!("--er: P must be a number, got {:?}", v[1])))?;
        let mut rng = rng_from_seed(seed.unwrap_or(0));
        FeedbackGraph::sample_erdos_renyi(k, p, !args.no_self_loops, &mut rng)
    } else if let Some(k) = f.complete {
        FeedbackGraph::complete(k)
    } else if let Some(k) = f.bandit {
        FeedbackGraph::self_loops_only(k)
    } else {
        unreachable!("clap enforces one family")
    }
    .map_err(|e| Failure::Config(e.to_string()))?;
    let json = serde_json::to_string(&graph).map_err(runtime)? + "\n";
    match &args.out {
        Some(p) => write_atomic(p, json.as_bytes()).map_err(runtime),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("hfb: cannot set up {jobs} worker threads: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match &cli.command {
        Command::Run { config, out } => cmd_run(config, out, cli.seed),
        Command::Sweep { config, out } => cmd_sweep(config, out, cli.seed),
        Command::Verify { only, out } => cmd_verify(only, out.as_deref(), cli.seed),
        Command::Graphgen(args) => cmd_graphgen(args, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hfb: {f}");
            ExitCode::from(f.code())
        }
    }
}
