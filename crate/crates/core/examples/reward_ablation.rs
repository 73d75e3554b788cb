//! Relative, absolute and incremental rewards on the same seeds.

use mbal::harness::{run_baseline_episode, run_episode_with_curves, ExperimentConfig};
use mbal::policy::RewardMode;
use mbal::selection::Strategy;

fn main() -> mbal::Result<()> {
    println!("seed  mode         final top1  mean advantage");
    for seed in 0..3 {
        let base = ExperimentConfig::drift_benchmark(seed);
        let curves: Vec<_> = Strategy::ALL
            .iter()
            .map(|&s| run_baseline_episode(&base, s).map(|o| o.curve))
            .collect::<mbal::Result<_>>()?;
        for mode in RewardMode::ALL {
            let mut cfg = base.clone();
            cfg.reward.mode = mode;
            let ensemble = if mode == RewardMode::Relative { curves.clone() } else { Vec::new() };
            let out = run_episode_with_curves(&cfg, ensemble)?;
            let adv: f64 = out.log.rounds.iter().filter_map(|r| r.reward).map(|t| t.advantage).sum::<f64>()
                / out.log.rounds.len() as f64;
            println!("{seed:<5} {:<12} {:<11.4} {adv:+.4}", mode.name(), out.log.summary.final_top1);
        }
    }
    Ok(())
}
