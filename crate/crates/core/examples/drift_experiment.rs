//! Paired comparison of the policy-driven loop against random acquisition on
//! data whose informative modality depends on the class.
//!
//! ```text
//! cargo run --release --example drift_experiment -- [seeds] [key=value ...]
//! ```

use mbal::harness::{run_baseline_episode, run_episode, ExperimentConfig};
use mbal::selection::Strategy;

fn main() -> mbal::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let overrides: Vec<String> = args.collect();

    let mut wins = 0;
    let mut rises = 0;
    let mut ties = 0;
    for seed in 0..seeds {
        let mut cfg = ExperimentConfig::drift_benchmark(seed);
        for o in &overrides {
            cfg.apply_override(o)?;
        }
        let rl = run_episode(&cfg)?;
        let random = run_baseline_episode(&cfg, Strategy::Random)?;
        let (a, b) = (rl.log.summary.final_top1, random.log.summary.final_top1);
        // Post-update weights, so each value pairs with that round's model.
        let first = rl.log.rounds.first().map(|r| r.next_weights[1]).unwrap_or(0.0);
        let last = rl.log.rounds.last().map(|r| r.next_weights[1]).unwrap_or(0.0);
        wins += usize::from(a > b);
        ties += usize::from(a == b);
        rises += usize::from(last > first);
        println!(
            "seed {seed}: rl {a:.4} random {b:.4} | w2 round 1 {first:.3} -> round T {last:.3} | top1 per modality {:?}",
            rl.log.rounds.last().map(|r| r.modality_top1.clone()).unwrap_or_default()
        );
    }
    println!("rl > random in {wins}/{seeds} seeds ({ties} ties); modality-2 weight rose in {rises}/{seeds}");
    Ok(())
}
