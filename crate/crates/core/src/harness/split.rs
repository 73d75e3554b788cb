//! Stratified validation / seed-set / pool partitioning.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;

use super::data::Dataset;
use crate::error::{invalid, Result};
use crate::rng::RngStream;
use crate::types::PoolPartition;

/// Splits `dataset` into a stratified validation set (per-class share
/// `val_fraction`, rounded, at least one), a stratified seed set of
/// `seed_size` labeled ids, and the remaining unlabeled pool.
pub fn stratified_split(
    dataset: &Dataset,
    val_fraction: f64,
    seed_size: usize,
    rng: &RngStream,
) -> Result<PoolPartition> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(invalid("validation fraction must be in (0,1); a validation split is required"));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.classes];
    for x in &dataset.instances {
        let y = x
            .label
            .ok_or_else(|| invalid(format!("instance {} has no label; cannot stratify", x.id)))?;
        by_class[y].push(x.id);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(invalid(format!("class {c} has no samples")));
    }

    let mut r = rng.rng();
    let mut validation = BTreeSet::new();
    let mut rest: Vec<Vec<usize>> = Vec::with_capacity(by_class.len());
    for ids in &mut by_class {
        ids.sort_unstable();
        ids.shuffle(&mut r);
        let n_val = ((ids.len() as f64 * val_fraction).round() as usize).clamp(1, ids.len());
        validation.extend(ids[..n_val].iter().copied());
        rest.push(ids[n_val..].to_vec());
    }

    let available: usize = rest.iter().map(Vec::len).sum();
    if seed_size > available {
        return Err(invalid(format!(
            "seed set of {seed_size} exceeds the {available} non-validation samples"
        )));
    }
    let quotas = largest_remainder(&rest.iter().map(Vec::len).collect::<Vec<_>>(), seed_size);
    let mut labeled = BTreeSet::new();
    let mut unlabeled = BTreeSet::new();
    for (ids, q) in rest.iter().zip(quotas) {
        labeled.extend(ids[..q].iter().copied());
        unlabeled.extend(ids[q..].iter().copied());
    }
    Ok(PoolPartition {
        labeled,
        unlabeled,
        validation,
    })
}

/// Integer allocation of `total` proportional to `sizes`, capped by each size.
fn largest_remainder(sizes: &[usize], total: usize) -> Vec<usize> {
    let sum: usize = sizes.iter().sum();
    if sum == 0 {
        return vec![0; sizes.len()];
    }
    let exact: Vec<f64> = sizes.iter().map(|&s| s as f64 * total as f64 / sum as f64).collect();
    let mut alloc: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = total - alloc.iter().sum::<usize>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if alloc[i] < sizes[i] {
            alloc[i] += 1;
            left -= 1;
        }
    }
    alloc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::MultimodalInstance;

    fn two_class(n_per: usize) -> Dataset {
        let instances = (0..2 * n_per)
            .map(|id| MultimodalInstance {
                id,
                label: Some(id % 2),
                features: vec![vec![id as f64]],
            })
            .collect();
        Dataset::new(2, vec![1], instances).unwrap()
    }

    #[test]
    fn proportional_validation() {
        let d = two_class(100);
        let p = stratified_split(&d, 0.2, 10, &RngStream::new(1, "split")).unwrap();
        let per_class = |set: &BTreeSet<usize>, c: usize| set.iter().filter(|id| *id % 2 == c).count();
        assert_eq!(per_class(&p.validation, 0), 20);
        assert_eq!(per_class(&p.validation, 1), 20);
        assert_eq!(per_class(&p.labeled, 0), 5);
        assert_eq!(p.total(), 200);
        assert!(p.is_disjoint());
    }

    #[test]
    fn validation_is_required() {
        let d = two_class(10);
        assert!(stratified_split(&d, 0.0, 2, &RngStream::new(1, "split")).is_err());
    }

    #[test]
    fn deterministic_partition() {
        let d = two_class(50);
        let a = stratified_split(&d, 0.3, 7, &RngStream::new(9, "split")).unwrap();
        let b = stratified_split(&d, 0.3, 7, &RngStream::new(9, "split")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.labeled.len(), 7);
    }

    #[test]
    fn empty_class_rejected() {
        let instances = (0..4)
            .map(|id| MultimodalInstance {
                id,
                label: Some(0),
                features: vec![vec![0.0]],
            })
            .collect();
        let d = Dataset::new(2, vec![1], instances).unwrap();
        assert!(stratified_split(&d, 0.5, 1, &RngStream::new(0, "split")).is_err());
    }

    #[test]
    fn remainder_allocation_sums() {
        assert_eq!(largest_remainder(&[5, 5, 5], 7).iter().sum::<usize>(), 7);
        assert_eq!(largest_remainder(&[1, 10], 5), vec![0, 5]);
    }
}
