//! Budgeted k-means++: D^2 seeding followed by a few Lloyd iterations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Result};
use crate::rng::RngStream;

/// Hard cap on Lloyd iterations.
pub const MAX_LLOYD_ITERS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroids(pub Vec<Vec<f64>>);

impl Centroids {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Centroids,
    /// Within-cluster sum of squares right after seeding.
    pub seeded_inertia: f64,
    /// Within-cluster sum of squares of the returned centroids.
    pub inertia: f64,
    pub iterations: usize,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid index (lowest on ties) and squared distance.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best
}

pub fn inertia(points: &[Vec<f64>], centroids: &Centroids) -> f64 {
    points.iter().map(|p| nearest(p, &centroids.0).1).sum()
}

fn seed<R: Rng>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = None;
            for (i, &d) in d2.iter().enumerate() {
                if d <= 0.0 {
                    continue;
                }
                if target < d {
                    chosen = Some(i);
                    break;
                }
                target -= d;
                chosen = Some(i);
            }
            chosen.unwrap_or(0)
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick].clone();
        for (dist, p) in d2.iter_mut().zip(points) {
            *dist = dist.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Clusters `points` into `min(k, n)` groups. `max_iters` is clamped to
/// [`MAX_LLOYD_ITERS`]; Lloyd stops early once assignments are stable.
pub fn budgeted_kmeanspp(
    points: &[Vec<f64>],
    k: usize,
    max_iters: usize,
    rng: &RngStream,
) -> Result<KMeansFit> {
    if points.is_empty() {
        return Err(precondition("cannot cluster an empty pool"));
    }
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(invalid("points must be finite with a common dimension"));
    }
    let k = k.min(points.len());
    let mut r = rng.rng();
    let mut centroids = seed(points, k, &mut r);
    let seeded_inertia = inertia(points, &Centroids(centroids.clone()));

    let mut assignment: Vec<usize> = vec![usize::MAX; points.len()];
    let mut iterations = 0;
    for _ in 0..max_iters.min(MAX_LLOYD_ITERS) {
        let mut changed = false;
        let mut dists = Vec::with_capacity(points.len());
        for (a, p) in assignment.iter_mut().zip(points) {
            let (c, d) = nearest(p, &centroids);
            if *a != c {
                *a = c;
                changed = true;
            }
            dists.push(d);
        }
        if !changed {
            break;
        }
        iterations += 1;

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&a, p) in assignment.iter().zip(points) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let n = counts[c] as f64;
                centroids[c] = sums[c].iter().map(|s| s / n).collect();
            } else {
                // re-seed to the point worst served by its current centroid
                let far = (0..points.len())
                    .fold(0, |best, i| if dists[i] > dists[best] { i } else { best });
                centroids[c] = points[far].clone();
                dists[far] = 0.0;
            }
        }
    }
    let centroids = Centroids(centroids);
    let inertia = inertia(points, &centroids);
    Ok(KMeansFit {
        centroids,
        seeded_inertia,
        inertia,
        iterations,
    })
}

/// Euclidean distance to the nearest centroid.
pub fn diversity_distance(f: &[f64], centroids: &Centroids) -> Result<f64> {
    if centroids.is_empty() {
        return Err(invalid("no centroids"));
    }
    if centroids.0.iter().any(|c| c.len() != f.len()) {
        return Err(invalid("feature and centroid dimensions differ"));
    }
    Ok(nearest(f, &centroids.0).1.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_k_points_become_centroids() {
        let pts = vec![vec![0.0, 0.0], vec![5.0, 1.0], vec![-3.0, 2.0], vec![1.0, 9.0]];
        let fit = budgeted_kmeanspp(&pts, 4, 5, &RngStream::new(1, "km")).unwrap();
        let mut got = fit.centroids.0.clone();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want = pts.clone();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);
        assert_eq!(fit.inertia, 0.0);
    }

    #[test]
    fn k_clamped_to_pool() {
        let pts = vec![vec![1.0], vec![2.0]];
        let fit = budgeted_kmeanspp(&pts, 10, 5, &RngStream::new(1, "km")).unwrap();
        assert_eq!(fit.centroids.len(), 2);
    }

    #[test]
    fn separated_blobs() {
        let mut pts = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.05;
            pts.push(vec![t, 1.0 - t]);
            pts.push(vec![100.0 + t, 50.0 - t]);
        }
        for seed in 0..20 {
            let fit = budgeted_kmeanspp(&pts, 2, 5, &RngStream::new(seed, "blobs")).unwrap();
            let mut in_a = 0;
            let mut in_b = 0;
            for c in fit.centroids.points() {
                if (0.0..=1.0).contains(&c[0]) && (0.0..=1.0).contains(&c[1]) {
                    in_a += 1;
                }
                if (100.0..=101.0).contains(&c[0]) && (49.0..=50.0).contains(&c[1]) {
                    in_b += 1;
                }
            }
            assert_eq!((in_a, in_b), (1, 1), "seed {seed}");
        }
    }

    #[test]
    fn deterministic_given_stream() {
        let pts: Vec<Vec<f64>> = (0..50).map(|i| vec![(i * 7 % 13) as f64, (i % 5) as f64]).collect();
        let a = budgeted_kmeanspp(&pts, 4, 5, &RngStream::new(2, "km")).unwrap();
        let b = budgeted_kmeanspp(&pts, 4, 5, &RngStream::new(2, "km")).unwrap();
        assert_eq!(a.centroids, b.centroids);
    }

    #[test]
    fn distance_examples() {
        let c = Centroids(vec![vec![0.0, 0.0]]);
        assert_eq!(diversity_distance(&[3.0, 4.0], &c).unwrap(), 5.0);
        assert_eq!(diversity_distance(&[0.0, 0.0], &c).unwrap(), 0.0);
        let c = Centroids(vec![vec![0.0, 0.0], vec![10.0, 0.0]]);
        assert_eq!(diversity_distance(&[6.0, 0.0], &c).unwrap(), 4.0);
        assert!(diversity_distance(&[1.0], &c).is_err());
    }

    proptest! {
        #[test]
        fn lloyd_never_increases_objective(
            pts in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 1..60),
            k in 1usize..8,
            seed in 0u64..1000,
        ) {
            let fit = budgeted_kmeanspp(&pts, k, 5, &RngStream::new(seed, "prop")).unwrap();
            prop_assert!(fit.inertia <= fit.seeded_inertia + 1e-9 * fit.seeded_inertia.max(1.0));
            prop_assert_eq!(fit.centroids.len(), k.min(pts.len()));
            prop_assert!(fit.iterations <= MAX_LLOYD_ITERS);
        }
    }
}
