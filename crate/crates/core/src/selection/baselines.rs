//! Classical comparison strategies: random, entropy, core-set and a light
//! BADGE variant (k-means++ seeding over last-layer gradient embeddings).

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kmeans::sq_dist;
use crate::error::{invalid, precondition, Error, Result};
use crate::metrics::shannon_entropy;
use crate::rng::RngStream;
use crate::types::argmax;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Entropy,
    Coreset,
    BadgeLite,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Random, Strategy::Entropy, Strategy::Coreset, Strategy::BadgeLite];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Entropy => "entropy",
            Strategy::Coreset => "coreset",
            Strategy::BadgeLite => "badge_lite",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Strategy::Random),
            "entropy" => Ok(Strategy::Entropy),
            "coreset" => Ok(Strategy::Coreset),
            "badge_lite" | "badge-lite" | "badge" => Ok(Strategy::BadgeLite),
            other => Err(invalid(format!("unknown strategy '{other}'"))),
        }
    }
}

/// What a baseline may look at for one unlabeled instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineEntry {
    pub id: usize,
    /// Weight-fused feature `f(x)`.
    pub fused: Vec<f64>,
    /// Expected class probabilities of the fused Dirichlet.
    pub fused_probs: Vec<f64>,
    /// Softmax output of the multimodal head.
    pub head_probs: Vec<f64>,
}

/// Gradient embedding `(p - onehot(argmax p)) (x) f` of the multimodal head.
pub fn gradient_embedding(entry: &BaselineEntry) -> Vec<f64> {
    let pred = argmax(&entry.head_probs);
    let mut out = Vec::with_capacity(entry.head_probs.len() * entry.fused.len());
    for (c, &p) in entry.head_probs.iter().enumerate() {
        let g = if c == pred { p - 1.0 } else { p };
        out.extend(entry.fused.iter().map(|f| g * f));
    }
    out
}

/// Picks `b` ids from `pool` (sorted by id internally for determinism).
pub fn select_baseline(
    strategy: Strategy,
    pool: &[BaselineEntry],
    labeled_features: &[Vec<f64>],
    b: usize,
    rng: &RngStream,
) -> Result<Vec<usize>> {
    if b > pool.len() {
        return Err(precondition(format!("budget {b} exceeds pool size {}", pool.len())));
    }
    if b == 0 {
        return Ok(Vec::new());
    }
    let mut sorted: Vec<&BaselineEntry> = pool.iter().collect();
    sorted.sort_by_key(|e| e.id);
    let picks = match strategy {
        Strategy::Random => {
            let mut r = rng.rng();
            index::sample(&mut r, sorted.len(), b).into_vec()
        }
        Strategy::Entropy => {
            let ent: Vec<f64> = sorted.iter().map(|e| shannon_entropy(&e.fused_probs)).collect();
            let mut order: Vec<usize> = (0..sorted.len()).collect();
            order.sort_by(|&i, &j| ent[j].total_cmp(&ent[i]).then(i.cmp(&j)));
            order.truncate(b);
            order
        }
        Strategy::Coreset => {
            let feats: Vec<&[f64]> = sorted.iter().map(|e| e.fused.as_slice()).collect();
            k_center_greedy(&feats, labeled_features, b)
        }
        Strategy::BadgeLite => {
            let emb: Vec<Vec<f64>> = sorted.iter().map(|e| gradient_embedding(e)).collect();
            let mut r = rng.rng();
            kmeanspp_indices(&emb, b, &mut r)
        }
    };
    Ok(picks.into_iter().map(|i| sorted[i].id).collect())
}

/// Greedy k-center: repeatedly take the point farthest from everything chosen
/// so far (labeled set included). Ties go to the lowest index.
fn k_center_greedy(points: &[&[f64]], labeled: &[Vec<f64>], b: usize) -> Vec<usize> {
    let mut min_d: Vec<f64> = points
        .iter()
        .map(|p| {
            labeled
                .iter()
                .map(|l| sq_dist(p, l))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut chosen = Vec::with_capacity(b);
    let mut taken = vec![false; points.len()];
    for _ in 0..b {
        let mut best: Option<usize> = None;
        for i in 0..points.len() {
            if taken[i] {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(j) if min_d[i] > min_d[j] => best = Some(i),
                _ => {}
            }
        }
        let pick = best.expect("b <= pool size");
        taken[pick] = true;
        chosen.push(pick);
        for (i, d) in min_d.iter_mut().enumerate() {
            if !taken[i] {
                *d = d.min(sq_dist(points[i], points[pick]));
            }
        }
    }
    chosen
}

/// k-means++ seeding that returns `k` distinct indices.
fn kmeanspp_indices<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<usize> {
    let n = points.len();
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    taken[first] = true;
    let mut chosen = vec![first];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while chosen.len() < k {
        let total: f64 = (0..n).filter(|&i| !taken[i]).map(|i| d2[i]).sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for i in (0..n).filter(|&i| !taken[i] && d2[i] > 0.0) {
                pick = Some(i);
                if target < d2[i] {
                    break;
                }
                target -= d2[i];
            }
            pick.expect("positive mass implies a candidate")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        taken[pick] = true;
        chosen.push(pick);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[pick]));
        }
    }
    chosen
}
