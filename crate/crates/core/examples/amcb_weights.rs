//! Turning per-modality validation accuracy into fusion weights.

use mbal::amcb::{contribution_gaps, update_weights, DEFAULT_EPSILON, DEFAULT_TAU};

fn main() -> mbal::Result<()> {
    // Modality 1 alone reaches 0.72, modality 2 alone 0.62, fused head 0.70.
    let delta = contribution_gaps(&[0.72, 0.62], 0.70)?;
    println!("gaps: {:?}", delta.as_slice());

    for tau in [0.1, DEFAULT_TAU, 2.0] {
        let w = update_weights(&delta, tau, DEFAULT_EPSILON)?;
        println!("tau {tau:>4}: w = {:.4?}", w.as_slice());
    }

    // Without a floor a large gap drives the weaker modality toward zero.
    let lopsided = contribution_gaps(&[0.95, 0.20], 0.90)?;
    let raw = update_weights(&lopsided, 0.1, 0.0)?;
    let floored = update_weights(&lopsided, 0.1, DEFAULT_EPSILON)?;
    println!("no floor: {:.6?}", raw.as_slice());
    println!("floored:  {:.4?}", floored.as_slice());
    Ok(())
}
