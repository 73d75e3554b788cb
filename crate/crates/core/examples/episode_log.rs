//! One policy-driven episode, its JSON-lines log and the per-round trajectory.

use mbal::cli::analyze_text;
use mbal::harness::{run_episode, EpisodeLog, ExperimentConfig};

fn main() -> mbal::Result<()> {
    let mut cfg = ExperimentConfig::drift_benchmark(1);
    cfg.rounds = 5;
    let out = run_episode(&cfg)?;
    let path = std::env::temp_dir().join("mbal-episode.jsonl");
    out.log.save(&path)?;
    let reloaded = EpisodeLog::load(&path)?;
    print!("{}", analyze_text(&reloaded));
    let last = reloaded.rounds.last().expect("at least one round");
    println!("last round timings (s): {:?}", last.timings);
    println!("log written to {}", path.display());
    Ok(())
}
