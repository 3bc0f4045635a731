//! Labeled feature matrices.
//!
//! Samples are stored as columns of an `M × N` matrix. On construction the
//! columns are stably reordered so that each class occupies one contiguous
//! block, class 1 first. The original position of every column is kept in
//! [`LabeledDataset::source_index`].
//!
//! Labels are 1-based everywhere in the public interface.

mod io;
mod split;

use std::ops::Range;

use nalgebra::{DMatrix, DMatrixView};

use crate::error::{Error, Result};

pub use io::{
    load_binary, load_csv, load_dataset, load_features_csv, save_binary, save_csv, DatasetFormat,
    FeatureTable,
};
pub use split::{split, Partition, SplitMode, SplitSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: DMatrix<f64>,
    labels: Vec<usize>,
    class_sizes: Vec<usize>,
    source_index: Vec<usize>,
}

impl LabeledDataset {
    /// Builds a dataset from columns in arbitrary order and canonicalizes it.
    ///
    /// Every label must lie in `1..=num_classes` and every class must have at
    /// least one sample.
    pub fn new(features: DMatrix<f64>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let source: Vec<usize> = (0..labels.len()).collect();
        Self::with_source_index(features, labels, num_classes, source)
    }

    pub(crate) fn with_source_index(
        features: DMatrix<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        source_index: Vec<usize>,
    ) -> Result<Self> {
        if features.ncols() != labels.len() {
            return Err(Error::ShapeMismatch {
                what: "label count",
                expected: features.ncols(),
                found: labels.len(),
            });
        }
        if num_classes == 0 {
            return Err(Error::EmptyClass { class: 1 });
        }
        for (j, &label) in labels.iter().enumerate() {
            if label == 0 || label > num_classes {
                return Err(Error::UnknownLabel {
                    record: j,
                    label: label.to_string(),
                });
            }
        }
        for (j, column) in features.column_iter().enumerate() {
            if let Some(f) = column.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue {
                    record: j,
                    feature: f,
                });
            }
        }

        let mut class_sizes = vec![0usize; num_classes];
        for &label in &labels {
            class_sizes[label - 1] += 1;
        }
        if let Some(c) = class_sizes.iter().position(|&n| n == 0) {
            return Err(Error::EmptyClass { class: c + 1 });
        }

        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by_key(|&j| labels[j]);
        let features = features.select_columns(&order);
        let labels = order.iter().map(|&j| labels[j]).collect();
        let source_index = order.iter().map(|&j| source_index[j]).collect();

        Ok(Self {
            features,
            labels,
            class_sizes,
            source_index,
        })
    }

    /// Feature dimension `M`.
    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    /// Sample count `N`.
    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    /// Position of each (canonical) column in the data it was built from.
    pub fn source_index(&self) -> &[usize] {
        &self.source_index
    }

    /// Column range of class `class` (1-based).
    pub fn class_range(&self, class: usize) -> Range<usize> {
        assert!(class >= 1 && class <= self.num_classes(), "class out of range");
        let start: usize = self.class_sizes[..class - 1].iter().sum();
        start..start + self.class_sizes[class - 1]
    }

    /// Column ranges of all classes, in label order.
    pub fn class_ranges(&self) -> Vec<Range<usize>> {
        (1..=self.num_classes()).map(|c| self.class_range(c)).collect()
    }

    /// The class block `Y^c`.
    pub fn class_block(&self, class: usize) -> DMatrixView<'_, f64> {
        let r = self.class_range(class);
        self.features.columns(r.start, r.len())
    }

    /// Sub-dataset made of the given canonical column positions.
    ///
    /// The class count is preserved, so every class must still be present.
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        let features = self.features.select_columns(positions);
        let labels = positions.iter().map(|&j| self.labels[j]).collect();
        let source = positions.iter().map(|&j| self.source_index[j]).collect();
        Self::with_source_index(features, labels, self.num_classes(), source)
    }

    /// Returns a copy whose columns have unit Euclidean norm.
    pub fn normalize_columns(&self) -> Result<Self> {
        let mut features = self.features.clone();
        for (j, mut column) in features.column_iter_mut().enumerate() {
            let norm = column.norm();
            if norm == 0.0 {
                return Err(Error::DegenerateSample { column: j });
            }
            column /= norm;
        }
        Ok(Self {
            features,
            labels: self.labels.clone(),
            class_sizes: self.class_sizes.clone(),
            source_index: self.source_index.clone(),
        })
    }
}
