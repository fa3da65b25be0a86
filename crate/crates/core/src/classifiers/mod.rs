//! The transfer-target classifiers: KNN (default k=3), one-vs-one
//! soft-margin SVM, and a CART decision tree with reduced-error pruning.
//!
//! Distance- and margin-based methods (KNN, SVM) expect standardized
//! features; trees are scale-invariant and take them raw. The
//! [`TrainedClassifier`] wrapper carries the fitted scaler alongside the
//! model so persisted classifiers predict directly from raw features.

pub mod knn;
pub mod persist;
pub mod scaling;
pub mod svm;
pub mod tree;

pub use knn::{knn_fit, knn_predict, KnnModel};
pub use scaling::StandardScaler;
pub use svm::{svm_fit, svm_predict, Kernel, SvmModel, SvmParams};
pub use tree::{tree_fit, tree_predict, tree_prune, TreeModel, TreeNode, TreeParams};

use crate::audio::ClassId;
use crate::error::Result;

/// A fitted model plus the feature scaler (if any) it was trained behind.
#[derive(Debug, Clone)]
pub struct TrainedClassifier {
    pub scaler: Option<StandardScaler>,
    pub kind: ClassifierKind,
}

#[derive(Debug, Clone)]
pub enum ClassifierKind {
    Knn(KnnModel),
    Svm(SvmModel),
    Tree(TreeModel),
}

impl TrainedClassifier {
    pub fn predict(&self, raw_features: &[f64]) -> Result<ClassId> {
        let scaled;
        let x: &[f64] = match &self.scaler {
            Some(s) => {
                scaled = s.transform(raw_features);
                &scaled
            }
            None => raw_features,
        };
        match &self.kind {
            ClassifierKind::Knn(m) => knn_predict(m, x),
            ClassifierKind::Svm(m) => svm_predict(m, x),
            ClassifierKind::Tree(m) => tree_predict(m, x),
        }
    }

    pub fn method_name(&self) -> &'static str {
        match self.kind {
            ClassifierKind::Knn(_) => "KNN",
            ClassifierKind::Svm(_) => "SVM",
            ClassifierKind::Tree(_) => "DT",
        }
    }
}
