//! Alternating minimization of the structured dictionary objective.
//!
//! ```text
//! Σ_c ‖Y^c − D X^c‖² + β‖X^c‖² + λ‖P^c X^c‖² + γ tr(X^c L^c X^cᵀ),   ‖d_k‖ = 1
//! ```
//!
//! Each outer iteration updates the codes class by class with the
//! dictionary fixed, then the atoms block by block (shared block first)
//! with the codes fixed. Everything runs on the calling thread, so a given
//! set of [`Hyperparameters`] (seed included) reproduces the same history
//! bit for bit on the same machine.

mod atoms;
mod codes;
mod init;
mod kmeans;
mod objective;
mod train;

use std::ops::Range;

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use crate::error::{Error, Result};

pub use atoms::{update_atoms_class, AtomStep, AtomUpdateOutcome, DEAD_ATOM_THRESHOLD};
pub use codes::update_codes_class;
pub use init::{init_codes, init_dictionary};
pub use kmeans::kmeans;
pub use objective::{objective, ObjectiveBreakdown};
pub use train::{train, train_with_observer, IterationRecord, TrainObserver, TrainState};

/// λ at or above which the restricted particular-atom update may kick in.
pub const FAST_UPDATE_MIN_LAMBDA: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CodeUpdateMode {
    /// Column-by-column exact minimization using the latest neighbours.
    #[default]
    Sequential,
    /// One matrix-form sweep with the previous block on the right-hand side.
    Batch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMethod {
    /// Per-class k-means for particular atoms, k-means on ridge residuals for
    /// shared atoms.
    #[default]
    ClassKMeans,
    /// Every atom is a randomly chosen, normalized training sample.
    RandomSamples,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    /// Ridge weight β, strictly positive.
    pub beta: f64,
    /// Cross-label suppression weight λ.
    pub lambda: f64,
    /// Group (graph) regularization weight γ.
    pub gamma: f64,
    pub max_iters: usize,
    /// Stop once `|J_t − J_{t−1}| / J_{t−1}` falls below this.
    pub rel_tol: f64,
    pub code_update_mode: CodeUpdateMode,
    /// Update particular atoms from their own class block only, when
    /// `lambda >= FAST_UPDATE_MIN_LAMBDA`.
    pub fast_particular_update: bool,
    pub init: InitMethod,
    pub kmeans_iters: usize,
    pub kmeans_restarts: usize,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            beta: 2e-3,
            lambda: 2e2,
            gamma: 1.0,
            max_iters: 30,
            rel_tol: 1e-4,
            code_update_mode: CodeUpdateMode::Sequential,
            fast_particular_update: false,
            init: InitMethod::ClassKMeans,
            kmeans_iters: 100,
            kmeans_restarts: 3,
            seed: 0,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHyperparameter(msg));
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(format!("beta must be finite and > 0, got {}", self.beta));
        }
        for (name, v) in [("lambda", self.lambda), ("gamma", self.gamma)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return bad(format!("rel_tol must be > 0, got {}", self.rel_tol));
        }
        if self.kmeans_iters == 0 || self.kmeans_restarts == 0 {
            return bad("k-means needs at least one iteration and one restart".into());
        }
        Ok(())
    }

    pub(crate) fn uses_fast_update(&self, block: usize) -> bool {
        self.fast_particular_update && block >= 1 && self.lambda >= FAST_UPDATE_MIN_LAMBDA
    }
}

/// Codes `X` (`K × N`) with columns aligned to a class-grouped dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeMatrix {
    values: DMatrix<f64>,
    class_blocks: Vec<Range<usize>>,
}

impl CodeMatrix {
    pub fn new(values: DMatrix<f64>, class_sizes: &[usize]) -> Result<Self> {
        let n: usize = class_sizes.iter().sum();
        if values.ncols() != n {
            return Err(Error::ShapeMismatch {
                what: "code matrix column count",
                expected: n,
                found: values.ncols(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("codes"));
        }
        let mut start = 0;
        let class_blocks = class_sizes
            .iter()
            .map(|&s| {
                let r = start..start + s;
                start += s;
                r
            })
            .collect();
        Ok(Self {
            values,
            class_blocks,
        })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.values
    }

    pub fn num_atoms(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.class_blocks.len()
    }

    pub fn class_blocks(&self) -> &[Range<usize>] {
        &self.class_blocks
    }

    /// `X^c` for class `class` (1-based).
    pub fn block(&self, class: usize) -> DMatrixView<'_, f64> {
        let r = &self.class_blocks[class - 1];
        self.values.columns(r.start, r.len())
    }

    pub fn block_mut(&mut self, class: usize) -> DMatrixViewMut<'_, f64> {
        let r = self.class_blocks[class - 1].clone();
        self.values.columns_mut(r.start, r.len())
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }
}
