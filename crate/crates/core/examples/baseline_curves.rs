//! Running every baseline strategy and writing their `round,top1` curves,
//! the input for relative rewards.

use mbal::harness::{run_baseline_episode, ExperimentConfig};
use mbal::selection::Strategy;

fn main() -> mbal::Result<()> {
    let mut cfg = ExperimentConfig::drift_benchmark(0);
    cfg.rounds = 6;
    let dir = std::env::temp_dir().join("mbal-baseline-curves");
    std::fs::create_dir_all(&dir)?;
    for strategy in Strategy::ALL {
        let out = run_baseline_episode(&cfg, strategy)?;
        let path = dir.join(format!("{strategy}.csv"));
        out.curve.save(&path)?;
        let top1: Vec<String> = out.curve.top1.values().map(|v| format!("{v:.3}")).collect();
        println!("{:<10} {}  -> {}", strategy.name(), top1.join(" "), path.display());
    }
    Ok(())
}
