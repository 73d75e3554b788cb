//! Command-line front end. [`dispatch`] parses arguments, runs one
//! subcommand and maps failures to exit codes: 0 success, 1 usage, 2 runtime.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::harness::{
    generate_synthetic, run_baseline_episode, run_episode, EpisodeLog, EpisodeOutcome, ExperimentConfig,
    RL_METHOD,
};
use crate::policy::RewardMode;
use crate::rng::RngStream;
use crate::selection::Strategy;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mbal", version, about = "Modality-balanced multimodal active learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a policy-driven episode.
    Run(ExperimentArgs),
    /// Run a baseline episode and write its curve file.
    Baseline {
        #[command(flatten)]
        common: ExperimentArgs,
        /// random | entropy | coreset | badge_lite
        #[arg(long)]
        strategy: Strategy,
    },
    /// Generate the configured synthetic dataset.
    GenData(ExperimentArgs),
    /// Print weight, gap and Shapley trajectories of episode logs.
    Analyze {
        /// Episode logs (`.jsonl`).
        #[arg(required = true)]
        logs: Vec<PathBuf>,
    },
    /// Write CSV tables (accuracy vs budget, Shapley vs round, reward vs round).
    PlotData {
        /// Episode logs (`.jsonl`).
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        /// Directory for the CSV tables.
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
    /// Print the full configuration with defaults and descriptions.
    Config(ExperimentArgs),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Config file of `key = value` lines, optionally under `[section]` headers.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for logs, curves and checkpoints.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Override a config key, e.g. `--set amcb.tau=0.25` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Reward mode: relative | absolute | incremental.
    #[arg(long)]
    reward: Option<RewardMode>,
}

/// Failure split by who is to blame.
enum Failure {
    Usage(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e),
            other => Failure::Runtime(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl ExperimentArgs {
    fn resolve(&self) -> std::result::Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                if !path.is_file() {
                    return Err(Failure::Usage(Error::Config(format!(
                        "config file {} not found",
                        path.display()
                    ))));
                }
                ExperimentConfig::load(path)?
            }
            None => ExperimentConfig::default(),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(mode) = self.reward {
            cfg.reward.mode = mode;
        }
        if let Some(dir) = cfg.checkpoint_dir.take() {
            cfg.checkpoint_dir = Some(if dir.is_relative() { self.out.join(dir) } else { dir });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_outcome(dir: &Path, stem: &str, outcome: &EpisodeOutcome) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let log_path = dir.join(format!("{stem}.jsonl"));
    let curve_path = dir.join(format!("{stem}.csv"));
    outcome.log.save(&log_path)?;
    outcome.curve.save(&curve_path)?;
    Ok((log_path, curve_path))
}

fn print_summary(outcome: &EpisodeOutcome, log: &Path, curve: &Path) -> Result<()> {
    println!("{}", serde_json::to_string(&outcome.log.summary)?);
    eprintln!("log: {}", log.display());
    eprintln!("curve: {}", curve.display());
    Ok(())
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
}

/// Text table of per-round trajectories.
pub fn analyze_text(log: &EpisodeLog) -> String {
    let mut out = String::new();
    let s = &log.summary;
    let _ = writeln!(
        out,
        "method {} seed {} rounds {} top1 {:.4} -> {:.4}",
        s.method, s.seed, s.rounds, s.initial_top1, s.final_top1
    );
    let _ = writeln!(out, "round\tlabeled\ttop1\tweights\tdelta\tphi");
    for r in &log.rounds {
        let _ = writeln!(
            out,
            "{}\t{}\t{:.4}\t{}\t{}\t{}",
            r.round,
            r.labeled,
            r.val.top1,
            fmt_vec(&r.next_weights),
            fmt_vec(&r.delta),
            fmt_vec(&r.phi)
        );
    }
    out
}

/// The three plot tables as `(file name, csv text)`.
pub fn plot_tables(logs: &[EpisodeLog]) -> Vec<(&'static str, String)> {
    let mut acc = String::from("strategy,seed,round,labeled,top1\n");
    let mut phi = String::from("strategy,seed,round,modality,phi,weight\n");
    let mut reward = String::from("strategy,seed,round,mode,raw,smoothed,baseline,advantage\n");
    for log in logs {
        let s = &log.summary;
        for r in &log.rounds {
            let _ = writeln!(acc, "{},{},{},{},{}", s.method, s.seed, r.round, r.labeled, r.val.top1);
            for (m, p) in r.phi.iter().enumerate() {
                let w = r.next_weights.get(m).copied().unwrap_or(f64::NAN);
                let _ = writeln!(phi, "{},{},{},{},{},{}", s.method, s.seed, r.round, m + 1, p, w);
            }
            if let Some(t) = &r.reward {
                let _ = writeln!(
                    reward,
                    "{},{},{},{},{},{},{},{}",
                    s.method, s.seed, r.round, t.mode, t.raw, t.smoothed, t.baseline, t.advantage
                );
            }
        }
    }
    vec![
        ("accuracy_vs_budget.csv", acc),
        ("phi_vs_round.csv", phi),
        ("reward_vs_round.csv", reward),
    ]
}

fn execute(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let outcome = run_episode(&cfg)?;
            let stem = format!("{RL_METHOD}-{}-seed{}", cfg.reward.mode, cfg.seed);
            let (log, curve) = write_outcome(&args.out, &stem, &outcome)?;
            print_summary(&outcome, &log, &curve)?;
        }
        Command::Baseline { common, strategy } => {
            let cfg = common.resolve()?;
            let outcome = run_baseline_episode(&cfg, strategy)?;
            let stem = format!("{strategy}-seed{}", cfg.seed);
            let (log, curve) = write_outcome(&common.out, &stem, &outcome)?;
            print_summary(&outcome, &log, &curve)?;
        }
        Command::GenData(args) => {
            let cfg = args.resolve()?;
            let data = generate_synthetic(&cfg.synthetic, &RngStream::new(cfg.seed, "data"))?;
            fs::create_dir_all(&args.out)?;
            let path = args.out.join(format!("synthetic-seed{}.csv", cfg.seed));
            data.save(&path)?;
            println!("{}", path.display());
        }
        Command::Analyze { logs } => {
            for path in logs {
                let log = EpisodeLog::load(&path)?;
                print!("{}", analyze_text(&log));
            }
        }
        Command::PlotData { logs, out } => {
            let logs = logs
                .iter()
                .map(|p| EpisodeLog::load(p))
                .collect::<Result<Vec<_>>>()?;
            fs::create_dir_all(&out)?;
            for (name, text) in plot_tables(&logs) {
                let path = out.join(name);
                fs::write(&path, text)?;
                println!("{}", path.display());
            }
        }
        Command::Config(args) => {
            print!("{}", args.resolve()?.to_text());
        }
    }
    Ok(())
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: usage: {}", first.trim_start_matches("error: "));
            return EXIT_USAGE;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {}: {}", e.code(), one_line(&e));
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {}: {}", e.code(), one_line(&e));
            EXIT_RUNTIME
        }
    }
}

fn one_line(e: &Error) -> String {
    e.to_string().replace('\n', " ")
}
