//! Fusing per-modality Dirichlet evidence and reading off sample difficulty.

use mbal::efda::{dirichlet_uncertainty, fuse_evidence, per_modality_uncertainty};
use mbal::{DirichletEvidence, ModalityWeights};

fn main() -> mbal::Result<()> {
    let confident = DirichletEvidence::new(vec![40.0, 2.0, 1.5])?;
    let vague = DirichletEvidence::new(vec![1.2, 1.1, 1.3])?;
    let alphas = [confident, vague];

    println!("per-modality uncertainty: {:.5?}", per_modality_uncertainty(&alphas)?);
    for w in [[1.0, 0.0], [0.5, 0.5], [0.1, 0.9]] {
        let w = ModalityWeights::new(w.to_vec())?;
        let fused = fuse_evidence(&alphas, &w)?;
        let u = dirichlet_uncertainty(&fused)?;
        println!(
            "w {:?}: alpha_f {:.3?}  E[p] {:.3?}  difficulty {:.5}",
            w.as_slice(),
            fused.as_slice(),
            fused.expected_probs(),
            u.difficulty
        );
    }
    Ok(())
}
