//! Seed-deterministic train/test splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ClassId, SampleMatrix};
use crate::error::{Error, Result};

/// Disjoint train/test partition of a segment set.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<SampleMatrix>,
    pub test: Vec<SampleMatrix>,
    pub seed: u64,
}

/// Which subset a segment index landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    Train,
    Test,
}

/// Partitions `0..labels.len()` into (train, test) index lists.
///
/// |test| = round(test_fraction · N). Stratified mode allocates per-class
/// test counts by largest remainder, so each class deviates from the exact
/// class ratio by at most one segment. Both index lists come back sorted.
pub fn split_indices(
    labels: &[ClassId],
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test_fraction must be in (0,1), got {test_fraction}"
        )));
    }
    let n = labels.len();
    let test_total = (test_fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut test_marks = vec![false; n];
    if stratified {
        let n_classes = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(1);
        let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
        for (i, &l) in labels.iter().enumerate() {
            per_class[l as usize].push(i);
        }
        // largest-remainder apportionment of the grand total
        let quotas: Vec<f64> = per_class
            .iter()
            .map(|idx| test_fraction * idx.len() as f64)
            .collect();
        let mut counts: Vec<usize> = quotas.iter().map(|&q| q.floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..n_classes).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &c in order.iter().take(test_total.saturating_sub(assigned)) {
            counts[c] += 1;
        }
        for (c, idx) in per_class.iter().enumerate() {
            let mut shuffled = idx.clone();
            shuffled.shuffle(&mut rng);
            for &i in shuffled.iter().take(counts[c].min(shuffled.len())) {
                test_marks[i] = true;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for &i in order.iter().take(test_total) {
            test_marks[i] = true;
        }
    }

    let mut train = Vec::with_capacity(n - test_total);
    let mut test = Vec::with_capacity(test_total);
    for (i, &is_test) in test_marks.iter().enumerate() {
        if is_test {
            test.push(i);
        } else {
            train.push(i);
        }
    }
    Ok((train, test))
}

/// Subject-disjoint alternative: whole subjects move to the test side, in
/// seeded shuffle order, until the test segment count reaches
/// round(test_fraction · N).
pub fn subject_disjoint_indices(
    labels: &[ClassId],
    subjects: &[String],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if labels.len() != subjects.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: subjects.len(),
        });
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test_fraction must be in (0,1), got {test_fraction}"
        )));
    }
    let n = labels.len();
    let target = (test_fraction * n as f64).round() as usize;

    // unique subjects in first-appearance order, then seeded shuffle
    let mut uniq: Vec<&String> = Vec::new();
    for s in subjects {
        if !uniq.contains(&s) {
            uniq.push(s);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    uniq.shuffle(&mut rng);

    let mut test_subjects: Vec<&String> = Vec::new();
    let mut covered = 0usize;
    for s in uniq {
        if covered >= target {
            break;
        }
        covered += subjects.iter().filter(|&x| x == s).count();
        test_subjects.push(s);
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, s) in subjects.iter().enumerate() {
        if test_subjects.contains(&s) {
            test.push(i);
        } else {
            train.push(i);
        }
    }
    Ok((train, test))
}

/// Consumes a segment-matrix set and partitions it.
pub fn make_split(
    segments: Vec<SampleMatrix>,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<DatasetSplit> {
    let labels: Vec<ClassId> = segments.iter().map(|m| m.label).collect();
    let (_, test_idx) = split_indices(&labels, test_fraction, seed, stratified)?;
    let mut is_test = vec![false; segments.len()];
    for &i in &test_idx {
        is_test[i] = true;
    }
    let mut train = Vec::with_capacity(segments.len() - test_idx.len());
    let mut test = Vec::with_capacity(test_idx.len());
    for (i, m) in segments.into_iter().enumerate() {
        if is_test[i] {
            test.push(m);
        } else {
            train.push(m);
        }
    }
    Ok(DatasetSplit { train, test, seed })
}
