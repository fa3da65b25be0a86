//! Soft-margin SVM trained by SMO-style pairwise dual coordinate ascent,
//! extended to multi-class by one-vs-one voting.
//!
//! The solver is fully deterministic: the first multiplier comes from an
//! index-order sweep over KKT violators, the second maximizes |E1−E2|
//! with lowest-index tie-breaking, and there is no randomness anywhere.

use crate::audio::ClassId;
use crate::error::{Error, Result};

/// Kernel function with resolved hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(&x, &y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a
                    .iter()
                    .zip(b)
                    .map(|(&x, &y)| {
                        let d = x - y;
                        d * d
                    })
                    .sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Default RBF width: 1 / (feature_dim · variance of the flattened
/// training matrix). Degenerate (constant) data falls back to 1/dim.
pub fn auto_gamma(features: &[Vec<f64>]) -> f64 {
    let dim = features.first().map_or(1, |r| r.len()).max(1);
    let total = (features.len() * dim) as f64;
    if total == 0.0 {
        return 1.0 / dim as f64;
    }
    let mean: f64 = features.iter().flatten().sum::<f64>() / total;
    let var: f64 = features
        .iter()
        .flatten()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<f64>()
        / total;
    if var > 0.0 {
        1.0 / (dim as f64 * var)
    } else {
        1.0 / dim as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-3,
            max_passes: 1000,
        }
    }
}

/// One binary machine of the one-vs-one ensemble. A positive decision
/// value votes for `class_pos`.
#[derive(Debug, Clone)]
pub struct BinarySvm {
    pub(crate) class_pos: ClassId,
    pub(crate) class_neg: ClassId,
    pub(crate) support_vectors: Vec<Vec<f64>>,
    /// alpha_i · y_i per support vector.
    pub(crate) coeffs: Vec<f64>,
    pub(crate) bias: f64,
}

impl BinarySvm {
    pub fn decision(&self, kernel: &Kernel, query: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coeffs)
            .map(|(sv, &c)| c * kernel.eval(sv, query))
            .sum::<f64>()
            + self.bias
    }
}

#[derive(Debug, Clone)]
pub struct SvmModel {
    pub(crate) kernel: Kernel,
    pub(crate) dim: usize,
    pub(crate) machines: Vec<BinarySvm>,
    /// False when some pair hit the sweep cap before clearing every KKT
    /// violation; the model is still usable (best effort).
    pub converged: bool,
}

impl SvmModel {
    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Trains one soft-margin binary SVM per class pair. KKT violations are
/// swept until none exceeds `params.tol` or `params.max_passes` full
/// sweeps have run (then [`SvmModel::converged`] is false).
pub fn svm_fit(
    features: &[Vec<f64>],
    labels: &[ClassId],
    kernel: Kernel,
    params: SvmParams,
) -> Result<SvmModel> {
    if features.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    if params.c <= 0.0 {
        return Err(Error::InvalidConfig(format!("C must be > 0, got {}", params.c)));
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

    let mut classes: Vec<ClassId> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }

    let mut machines = Vec::new();
    let mut converged = true;
    for (i, &pos) in classes.iter().enumerate() {
        for &neg in &classes[i + 1..] {
            let idx: Vec<usize> = (0..labels.len())
                .filter(|&j| labels[j] == pos || labels[j] == neg)
                .collect();
            let x: Vec<&[f64]> = idx.iter().map(|&j| features[j].as_slice()).collect();
            let y: Vec<f64> = idx
                .iter()
                .map(|&j| if labels[j] == pos { 1.0 } else { -1.0 })
                .collect();
            let solution = smo_solve(&x, &y, &kernel, &params);
            converged &= solution.converged;

            let mut support_vectors = Vec::new();
            let mut coeffs = Vec::new();
            for (k, &a) in solution.alphas.iter().enumerate() {
                if a > 1e-12 {
                    support_vectors.push(x[k].to_vec());
                    coeffs.push(a * y[k]);
                }
            }
            machines.push(BinarySvm {
                class_pos: pos,
                class_neg: neg,
                support_vectors,
                coeffs,
                bias: solution.bias,
            });
        }
    }

    Ok(SvmModel {
        kernel,
        dim,
        machines,
        converged,
    })
}

/// Pairwise vote; ties break by summed signed decision values in favor of
/// each class, then by lower class id.
pub fn svm_predict(model: &SvmModel, query: &[f64]) -> Result<ClassId> {
    if model.machines.is_empty() {
        return Err(Error::EmptyModel);
    }
    if query.len() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: query.len(),
        });
    }
    let n_classes = model
        .machines
        .iter()
        .map(|m| m.class_pos.max(m.class_neg) as usize + 1)
        .max()
        .unwrap();
    let mut votes = vec![0usize; n_classes];
    let mut scores = vec![0.0f64; n_classes];
    for m in &model.machines {
        let d = m.decision(&model.kernel, query);
        if d > 0.0 {
            votes[m.class_pos as usize] += 1;
        } else {
            votes[m.class_neg as usize] += 1;
        }
        scores[m.class_pos as usize] += d;
        scores[m.class_neg as usize] -= d;
    }
    let top = *votes.iter().max().unwrap();
    let winner = (0..n_classes)
        .filter(|&c| votes[c] == top)
        .max_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(b.cmp(&a)))
        .unwrap();
    Ok(winner as ClassId)
}

struct SmoSolution {
    alphas: Vec<f64>,
    bias: f64,
    converged: bool,
}

/// Platt-style SMO on a precomputed Gram matrix. `y` entries are ±1.
fn smo_solve(x: &[&[f64]], y: &[f64], kernel: &Kernel, params: &SvmParams) -> SmoSolution {
    let n = x.len();
    let c = params.c;
    let tol = params.tol;

    let mut gram = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(x[i], x[j]);
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }

    let mut alphas = vec![0.0f64; n];
    let mut bias = 0.0f64;
    // error cache: E_i = f(x_i) − y_i; all alphas start at zero
    let mut err: Vec<f64> = y.iter().map(|&v| -v).collect();

    let mut take_step = |i1: usize,
                         i2: usize,
                         alphas: &mut Vec<f64>,
                         bias: &mut f64,
                         err: &mut Vec<f64>|
     -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1_old, a2_old) = (alphas[i1], alphas[i2]);
        let (y1, y2) = (y[i1], y[i2]);
        let (e1, e2) = (err[i1], err[i2]);
        let s = y1 * y2;
        let (lo, hi) = if (y1 - y2).abs() > 0.5 {
            ((a2_old - a1_old).max(0.0), (c + a2_old - a1_old).min(c))
        } else {
            ((a1_old + a2_old - c).max(0.0), (a1_old + a2_old).min(c))
        };
        if lo >= hi {
            return false;
        }
        let k11 = gram[i1 * n + i1];
        let k12 = gram[i1 * n + i2];
        let k22 = gram[i2 * n + i2];
        let eta = k11 + k22 - 2.0 * k12;
        if eta <= 0.0 {
            // degenerate pair (e.g. duplicated points); skip it
            return false;
        }
        let mut a2 = a2_old + y2 * (e1 - e2) / eta;
        a2 = a2.clamp(lo, hi);
        if (a2 - a2_old).abs() < 1e-10 * (a2 + a2_old + 1e-10) {
            return false;
        }
        let a1 = (a1_old + s * (a2_old - a2)).clamp(0.0, c);

        let d1 = y1 * (a1 - a1_old);
        let d2 = y2 * (a2 - a2_old);
        let b1 = *bias - e1 - d1 * k11 - d2 * k12;
        let b2 = *bias - e2 - d1 * k12 - d2 * k22;
        let new_bias = if a1 > 0.0 && a1 < c {
            b1
        } else if a2 > 0.0 && a2 < c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = new_bias - *bias;
        for k in 0..n {
            err[k] += d1 * gram[i1 * n + k] + d2 * gram[i2 * n + k] + db;
        }
        alphas[i1] = a1;
        alphas[i2] = a2;
        *bias = new_bias;
        true
    };

    let mut converged = false;
    for _ in 0..params.max_passes {
        let mut changed = 0usize;
        for i2 in 0..n {
            let r2 = err[i2] * y[i2];
            let violates =
                (r2 < -tol && alphas[i2] < c) || (r2 > tol && alphas[i2] > 0.0);
            if !violates {
                continue;
            }
            // second-choice heuristic: largest |E1 − E2|, lowest index wins
            let e2 = err[i2];
            let mut best = None;
            let mut best_gap = -1.0;
            for (i1, &e1) in err.iter().enumerate() {
                if i1 == i2 {
                    continue;
                }
                let gap = (e1 - e2).abs();
                if gap > best_gap {
                    best_gap = gap;
                    best = Some(i1);
                }
            }
            let stepped = best
                .map(|i1| take_step(i1, i2, &mut alphas, &mut bias, &mut err))
                .unwrap_or(false)
                || (0..n).any(|i1| take_step(i1, i2, &mut alphas, &mut bias, &mut err));
            if stepped {
                changed += 1;
            }
        }
        if changed == 0 {
            converged = true;
            break;
        }
    }

    SmoSolution {
        alphas,
        bias,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train_accuracy(model: &SvmModel, x: &[Vec<f64>], y: &[ClassId]) -> f64 {
        let hits = x
            .iter()
            .zip(y)
            .filter(|(q, &l)| svm_predict(model, q).unwrap() == l)
            .count();
        hits as f64 / x.len() as f64
    }

    fn blobs_2d() -> (Vec<Vec<f64>>, Vec<ClassId>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            let t = i as f64 * 0.1;
            x.push(vec![2.0 + t, 2.0 - t]);
            y.push(0);
            x.push(vec![-2.0 - t, -2.0 + t]);
            y.push(1);
        }
        (x, y)
    }

    #[test]
    fn separable_blobs_reach_full_training_accuracy_with_linear_kernel() {
        let (x, y) = blobs_2d();
        let model = svm_fit(&x, &y, Kernel::Linear, SvmParams::default()).unwrap();
        assert!(model.converged);
        assert_eq!(train_accuracy(&model, &x, &y), 1.0);
    }

    #[test]
    fn xor_needs_the_rbf_kernel() {
        let x = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ];
        let y: Vec<ClassId> = vec![0, 0, 1, 1];
        let params = SvmParams {
            c: 10.0,
            ..SvmParams::default()
        };
        let rbf = svm_fit(&x, &y, Kernel::Rbf { gamma: 1.0 }, params).unwrap();
        assert_eq!(train_accuracy(&rbf, &x, &y), 1.0, "rbf must solve xor");

        let linear = svm_fit(&x, &y, Kernel::Linear, params).unwrap();
        assert!(
            train_accuracy(&linear, &x, &y) <= 0.75,
            "a hyperplane cannot solve xor"
        );
    }

    #[test]
    fn duplicated_training_set_predicts_identically() {
        let (x, y) = blobs_2d();
        let params = SvmParams {
            c: 10.0,
            ..SvmParams::default()
        };
        let base = svm_fit(&x, &y, Kernel::Linear, params).unwrap();

        let mut x2 = x.clone();
        x2.extend(x.iter().cloned());
        let mut y2 = y.clone();
        y2.extend(y.iter().copied());
        let doubled = svm_fit(&x2, &y2, Kernel::Linear, params).unwrap();

        for i in -6i32..=6 {
            for j in -6i32..=6 {
                let q = vec![i as f64 * 0.7, j as f64 * 0.7];
                assert_eq!(
                    svm_predict(&base, &q).unwrap(),
                    svm_predict(&doubled, &q).unwrap(),
                    "disagreement at {q:?}"
                );
            }
        }
    }

    #[test]
    fn mirrored_queries_get_opposite_labels() {
        // symmetric two-class problem about the plane x0 = 0
        let mut x = Vec::new();
        let mut y: Vec<ClassId> = Vec::new();
        for i in 0..8 {
            let off = i as f64 * 0.25;
            x.push(vec![1.0 + off, off]);
            y.push(0);
            x.push(vec![-1.0 - off, off]);
            y.push(1);
        }
        let model = svm_fit(&x, &y, Kernel::Linear, SvmParams::default()).unwrap();
        for i in 0..8 {
            let q = vec![0.5 + i as f64 * 0.3, i as f64 * 0.2];
            let mirrored = vec![-q[0], q[1]];
            let a = svm_predict(&model, &q).unwrap();
            let b = svm_predict(&model, &mirrored).unwrap();
            assert_ne!(a, b, "mirror symmetry broken at {q:?}");
        }
    }

    #[test]
    fn three_class_query_deep_in_a_region_wins_its_pairs() {
        let mut x = Vec::new();
        let mut y: Vec<ClassId> = Vec::new();
        let centers = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)];
        for (c, &(cx, cy)) in centers.iter().enumerate() {
            for k in 0..6 {
                let t = k as f64 * 0.15;
                x.push(vec![cx + t, cy - t]);
                y.push(c as ClassId);
            }
        }
        let model = svm_fit(&x, &y, Kernel::Linear, SvmParams::default()).unwrap();
        assert_eq!(model.machines.len(), 3); // one per pair
        for (c, &(cx, cy)) in centers.iter().enumerate() {
            assert_eq!(svm_predict(&model, &[cx, cy]).unwrap(), c as ClassId);
        }
        assert_eq!(train_accuracy(&model, &x, &y), 1.0);
    }

    #[test]
    fn dual_coefficients_stay_inside_the_box() {
        let (x, y) = blobs_2d();
        let params = SvmParams {
            c: 0.5,
            ..SvmParams::default()
        };
        let model = svm_fit(&x, &y, Kernel::Rbf { gamma: 0.3 }, params).unwrap();
        for m in &model.machines {
            for &coeff in &m.coeffs {
                // |alpha_i · y_i| = alpha_i ∈ (0, C]
                assert!(coeff.abs() > 0.0 && coeff.abs() <= 0.5 + 1e-9);
            }
            assert!(m.decision(&model.kernel, &x[0]).is_finite());
        }
    }

    #[test]
    fn linear_predictions_invariant_under_feature_rescaling_with_compensated_c() {
        let (x, y) = blobs_2d();
        let c = 1.0;
        let s = 3.0f64;
        let base = svm_fit(
            &x,
            &y,
            Kernel::Linear,
            SvmParams { c, ..SvmParams::default() },
        )
        .unwrap();
        let x_scaled: Vec<Vec<f64>> = x
            .iter()
            .map(|r| r.iter().map(|&v| v * s).collect())
            .collect();
        let scaled = svm_fit(
            &x_scaled,
            &y,
            Kernel::Linear,
            SvmParams {
                c: c / (s * s),
                ..SvmParams::default()
            },
        )
        .unwrap();
        for i in -5i32..=5 {
            for j in -5i32..=5 {
                let q = vec![i as f64 * 0.8, j as f64 * 0.8];
                let qs: Vec<f64> = q.iter().map(|&v| v * s).collect();
                assert_eq!(
                    svm_predict(&base, &q).unwrap(),
                    svm_predict(&scaled, &qs).unwrap()
                );
            }
        }
    }

    #[test]
    fn rejects_single_class_and_bad_dims() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            svm_fit(&x, &[0, 0], Kernel::Linear, SvmParams::default()),
            Err(Error::SingleClass)
        ));
        let model = svm_fit(&x, &[0, 1], Kernel::Linear, SvmParams::default()).unwrap();
        assert!(matches!(
            svm_predict(&model, &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(svm_fit(
            &x,
            &[0, 1],
            Kernel::Linear,
            SvmParams { c: -1.0, ..SvmParams::default() }
        )
        .is_err());
    }

    #[test]
    fn auto_gamma_matches_definition() {
        let x = vec![vec![0.0, 2.0], vec![2.0, 0.0]];
        // flattened values [0,2,2,0]: mean 1, var 1 -> gamma = 1/(2*1)
        assert!((auto_gamma(&x) - 0.5).abs() < 1e-12);
    }
}
