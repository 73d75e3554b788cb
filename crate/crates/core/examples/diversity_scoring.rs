//! Clustering a pool, scoring uncertainty plus diversity and taking the
//! candidate set.

use mbal::selection::{budgeted_kmeanspp, candidate_set, score_pool, PoolEntry, DEFAULT_BETA, DEFAULT_KAPPA};
use mbal::{DirichletEvidence, ModalityWeights, RngStream};
use rand::Rng;

fn main() -> mbal::Result<()> {
    let stream = RngStream::new(7, "diversity-example");
    let mut rng = stream.rng();
    let pool: Vec<PoolEntry> = (0..400)
        .map(|id| {
            let center = (id % 4) as f64 * 3.0;
            PoolEntry {
                id,
                alphas: (0..2)
                    .map(|_| DirichletEvidence::new((0..3).map(|_| rng.random_range(1.0..12.0)).collect()))
                    .collect::<mbal::Result<_>>()
                    .expect("positive evidence"),
                fused: (0..4).map(|_| center + rng.random_range(-1.0..1.0)).collect(),
            }
        })
        .collect();

    let budget = 8;
    let points: Vec<Vec<f64>> = pool.iter().map(|e| e.fused.clone()).collect();
    let fit = budgeted_kmeanspp(&points, budget, 5, &stream.child("kmeans"))?;
    println!(
        "k-means: {} centroids, inertia {:.1} -> {:.1} in {} Lloyd steps",
        fit.centroids.len(),
        fit.seeded_inertia,
        fit.inertia,
        fit.iterations
    );

    let w = ModalityWeights::new(vec![0.7, 0.3])?;
    let scored = score_pool(&pool, &w, &fit.centroids, DEFAULT_BETA)?;
    let (u_bar, d_bar) = scored.summaries(&w);
    println!("pool summaries: u_bar {u_bar:.3}, d_bar {d_bar:.3}");

    let cands = candidate_set(&scored, budget, DEFAULT_KAPPA)?;
    println!("candidate set ({} of {}):", cands.len(), scored.len());
    for (id, q) in cands.ids.iter().zip(&cands.scores).take(10) {
        println!("  id {id:>3}  q {q:.3}");
    }
    Ok(())
}
