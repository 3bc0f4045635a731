//! Structured dictionaries.
//!
//! Atoms are laid out canonically: the `K⁰` shared atoms first, then the
//! label-particular atoms of class 1, class 2, and so on. Index sets,
//! suppression selectors, classifiers and the model file all rely on this
//! ordering.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on `‖d_k‖ = 1` accepted when validating a dictionary.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelLayout {
    shared: usize,
    per_class: Vec<usize>,
}

impl LabelLayout {
    /// `per_class[c - 1]` is the number of atoms owned by class `c`.
    pub fn new(shared: usize, per_class: Vec<usize>) -> Result<Self> {
        if per_class.is_empty() {
            return Err(Error::InvalidLayout("at least one class is required".into()));
        }
        if let Some(c) = per_class.iter().position(|&k| k == 0) {
            return Err(Error::InvalidLayout(format!(
                "class {} has no label-particular atoms",
                c + 1
            )));
        }
        Ok(Self { shared, per_class })
    }

    /// Same atom count for every class.
    pub fn uniform(classes: usize, per_class: usize, shared: usize) -> Result<Self> {
        Self::new(shared, vec![per_class; classes])
    }

    pub fn num_classes(&self) -> usize {
        self.per_class.len()
    }

    pub fn shared_count(&self) -> usize {
        self.shared
    }

    pub fn particular_counts(&self) -> &[usize] {
        &self.per_class
    }

    /// Total atom count `K`.
    pub fn num_atoms(&self) -> usize {
        self.shared + self.per_class.iter().sum::<usize>()
    }

    /// Atom indices of block `block`: `0` is the shared block, `c ≥ 1` is class `c`.
    pub fn block_range(&self, block: usize) -> Range<usize> {
        assert!(block <= self.num_classes(), "block {block} out of range");
        if block == 0 {
            return 0..self.shared;
        }
        let start = self.shared + self.per_class[..block - 1].iter().sum::<usize>();
        start..start + self.per_class[block - 1]
    }

    pub fn shared_range(&self) -> Range<usize> {
        self.block_range(0)
    }

    pub fn class_range(&self, class: usize) -> Result<Range<usize>> {
        self.check_class(class)?;
        Ok(self.block_range(class))
    }

    /// Block that owns atom `atom` (0 for shared).
    pub fn owner(&self, atom: usize) -> usize {
        (0..=self.num_classes())
            .find(|&b| self.block_range(b).contains(&atom))
            .expect("atom index out of range")
    }

    pub fn check_class(&self, class: usize) -> Result<()> {
        if class == 0 || class > self.num_classes() {
            return Err(Error::ClassOutOfRange {
                class,
                classes: self.num_classes(),
            });
        }
        Ok(())
    }

    pub fn suppression_selector(&self, class: usize) -> Result<SuppressionSelector> {
        self.check_class(class)?;
        let own = self.block_range(class);
        let active = (self.shared..self.num_atoms())
            .filter(|k| !own.contains(k))
            .collect();
        Ok(SuppressionSelector { class, active })
    }
}

/// Diagonal 0/1 selector of the coefficients a class-`c` sample places on
/// other classes' particular atoms, stored as its active index list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuppressionSelector {
    class: usize,
    active: Vec<usize>,
}

impl SuppressionSelector {
    pub fn class(&self) -> usize {
        self.class
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// `‖P x‖²`.
    pub fn apply(&self, x: &[f64], atoms: usize) -> Result<f64> {
        if x.len() != atoms {
            return Err(Error::ShapeMismatch {
                what: "code length",
                expected: atoms,
                found: x.len(),
            });
        }
        Ok(self.active.iter().map(|&m| x[m] * x[m]).sum())
    }

    /// Diagonal of `PᵀP` as a length-`atoms` 0/1 vector.
    pub fn mask(&self, atoms: usize) -> DVector<f64> {
        let mut m = DVector::zeros(atoms);
        for &k in &self.active {
            m[k] = 1.0;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredDictionary {
    atoms: DMatrix<f64>,
    layout: LabelLayout,
}

impl StructuredDictionary {
    /// Validates shape, finiteness and unit column norms.
    pub fn new(atoms: DMatrix<f64>, layout: LabelLayout) -> Result<Self> {
        if atoms.ncols() != layout.num_atoms() {
            return Err(Error::ShapeMismatch {
                what: "dictionary atom count",
                expected: layout.num_atoms(),
                found: atoms.ncols(),
            });
        }
        for (k, col) in atoms.column_iter().enumerate() {
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidAtom {
                    atom: k,
                    reason: "non-finite entry".into(),
                });
            }
            let norm = col.norm();
            if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
                return Err(Error::InvalidAtom {
                    atom: k,
                    reason: format!("norm {norm} is not 1"),
                });
            }
        }
        Ok(Self { atoms, layout })
    }

    /// Normalizes every column, then validates.
    pub fn from_unnormalized(mut atoms: DMatrix<f64>, layout: LabelLayout) -> Result<Self> {
        for (k, mut col) in atoms.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::InvalidAtom {
                    atom: k,
                    reason: "cannot normalize".into(),
                });
            }
            col /= norm;
        }
        Self::new(atoms, layout)
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub(crate) fn atoms_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.atoms
    }

    pub fn layout(&self) -> &LabelLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.ncols()
    }

    /// Atom indices of the shared block followed by class `class`'s block.
    pub fn combined_indices(&self, class: usize) -> Result<Vec<usize>> {
        let own = self.layout.class_range(class)?;
        Ok(self.layout.shared_range().chain(own).collect())
    }

    /// `[D⁰, D^c]`.
    pub fn combined_part_dictionary(&self, class: usize) -> Result<DMatrix<f64>> {
        Ok(self.atoms.select_columns(&self.combined_indices(class)?))
    }
}
