//! Exact brute-force k-nearest-neighbor classification.

use crate::audio::ClassId;
use crate::error::{Error, Result};

/// Stored training set; prediction scans it exhaustively.
#[derive(Debug, Clone)]
pub struct KnnModel {
    pub(crate) k: usize,
    pub(crate) dim: usize,
    pub(crate) points: Vec<Vec<f64>>,
    pub(crate) labels: Vec<ClassId>,
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn knn_fit(features: &[Vec<f64>], labels: &[ClassId], k: usize) -> Result<KnnModel> {
    if features.is_empty() {
        return Err(Error::EmptyModel);
    }
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    if k == 0 || k > features.len() {
        return Err(Error::InvalidConfig(format!(
            "k={k} must be in 1..={}",
            features.len()
        )));
    }
    let dim = features[0].len();
    for row in features {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
    }
    Ok(KnnModel {
        k,
        dim,
        points: features.to_vec(),
        labels: labels.to_vec(),
    })
}

/// Majority label among the k nearest training points by Euclidean
/// distance. Equal distances rank by lower training index; a tied vote
/// goes to the tied class whose representative appears first in nearness
/// order (for all-distinct votes that is the single nearest neighbor).
pub fn knn_predict(model: &KnnModel, query: &[f64]) -> Result<ClassId> {
    if model.points.is_empty() {
        return Err(Error::EmptyModel);
    }
    if query.len() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: query.len(),
        });
    }

    let mut ranked: Vec<(f64, usize)> = model
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| (squared_distance(p, query), i))
        .collect();
    ranked.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked.truncate(model.k);

    let n_classes = model.labels.iter().map(|&l| l as usize + 1).max().unwrap();
    let mut votes = vec![0usize; n_classes];
    for &(_, i) in &ranked {
        votes[model.labels[i] as usize] += 1;
    }
    let top = *votes.iter().max().unwrap();
    for &(_, i) in &ranked {
        if votes[model.labels[i] as usize] == top {
            return Ok(model.labels[i]);
        }
    }
    unreachable!("some neighbor always carries the top vote");
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x - y;
            d * d
        })
        .sum()
}
