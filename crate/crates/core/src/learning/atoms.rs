use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use super::{CodeMatrix, Hyperparameters};
use crate::dictionary::{LabelLayout, StructuredDictionary};
use crate::error::{Error, Result};

/// Below this `‖Z̃ x̄ᵢᵀ‖` an atom counts as dead and is replaced.
pub const DEAD_ATOM_THRESHOLD: f64 = 1e-10;

/// Reconstruction error around one least-squares atom step, measured over
/// all training columns before the new atom is rescaled to unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomStep {
    pub atom: usize,
    pub reconstruction_before: f64,
    pub reconstruction_after: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomUpdateOutcome {
    /// Atoms replaced by a worst-reconstructed sample; their code rows are zeroed.
    pub dead_atoms: Vec<usize>,
    /// One entry per live atom when tracing is on.
    pub steps: Vec<AtomStep>,
}

/// Updates the atoms of block `block` (0 = shared, `c` = class `c`) one at a
/// time with the codes fixed; atoms outside the block are untouched. Every
/// least-squares step is recorded in [`AtomUpdateOutcome::steps`].
pub fn update_atoms_class(
    y: &DMatrix<f64>,
    codes: &mut CodeMatrix,
    dictionary: &mut StructuredDictionary,
    block: usize,
    hp: &Hyperparameters,
) -> Result<AtomUpdateOutcome> {
    if block > dictionary.layout().num_classes() {
        return Err(Error::ClassOutOfRange {
            class: block,
            classes: dictionary.layout().num_classes(),
        });
    }
    if y.shape() != (dictionary.dim(), codes.values().ncols()) {
        return Err(Error::ShapeMismatch {
            what: "training matrix columns",
            expected: codes.values().ncols(),
            found: y.ncols(),
        });
    }
    let layout = dictionary.layout().clone();
    let ranges = codes.class_blocks().to_vec();
    let mut residual = y - dictionary.atoms() * codes.values();
    Ok(update_block(
        y,
        &ranges,
        &mut residual,
        codes.values_mut(),
        dictionary.atoms_mut(),
        &layout,
        block,
        hp,
        true,
    ))
}

/// Block update against a residual `R = Y − DX` kept current by rank-one
/// corrections. For atom `i`, `Z̃ = R + d_i x̄_i` and the new direction is
/// `Z̃ x̄_iᵀ = R x̄_iᵀ + ‖x̄_i‖² d_i`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn update_block(
    y: &DMatrix<f64>,
    class_ranges: &[Range<usize>],
    residual: &mut DMatrix<f64>,
    codes: &mut DMatrix<f64>,
    atoms: &mut DMatrix<f64>,
    layout: &LabelLayout,
    block: usize,
    hp: &Hyperparameters,
    trace: bool,
) -> AtomUpdateOutcome {
    let n = y.ncols();
    let cols = if hp.uses_fast_update(block) {
        class_ranges[block - 1].clone()
    } else {
        0..n
    };
    let candidates = if block == 0 {
        0..n
    } else {
        class_ranges[block - 1].clone()
    };
    let mut used = Vec::new();
    let mut outcome = AtomUpdateOutcome::default();

    for i in layout.block_range(block) {
        let row: DVector<f64> = codes.row(i).transpose();
        let sub = row.rows(cols.start, cols.len());
        let energy = sub.norm_squared();
        let old = atoms.column(i).clone_owned();
        let mut direction = residual.columns(cols.start, cols.len()) * sub;
        direction.axpy(energy, &old, 1.0);
        let length = direction.norm();

        if energy == 0.0 || length < DEAD_ATOM_THRESHOLD {
            replace_dead_atom(y, residual, codes, atoms, i, &row, candidates.clone(), &mut used);
            outcome.dead_atoms.push(i);
            continue;
        }

        if trace {
            let before = residual.norm_squared();
            let unscaled = &direction / energy;
            let mut after = residual.clone();
            after.ger(-1.0, &(&unscaled - &old), &row, 1.0);
            outcome.steps.push(AtomStep {
                atom: i,
                reconstruction_before: before,
                reconstruction_after: after.norm_squared(),
            });
        }

        let new = direction / length;
        residual.ger(-1.0, &(&new - &old), &row, 1.0);
        atoms.column_mut(i).copy_from(&new);
    }
    outcome
}

/// Swaps atom `i` for the normalized sample with the largest residual among
/// `candidates` and zeroes its code row.
#[allow(clippy::too_many_arguments)]
fn replace_dead_atom(
    y: &DMatrix<f64>,
    residual: &mut DMatrix<f64>,
    codes: &mut DMatrix<f64>,
    atoms: &mut DMatrix<f64>,
    i: usize,
    row: &DVector<f64>,
    candidates: Range<usize>,
    used: &mut Vec<usize>,
) {
    let old = atoms.column(i).clone_owned();
    residual.ger(1.0, &old, row, 1.0);
    codes.row_mut(i).fill(0.0);

    let worst = candidates
        .filter(|j| !used.contains(j) && y.column(*j).norm() > 0.0)
        .map(|j| (j, residual.column(j).norm_squared()))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
    if let Some((j, _)) = worst {
        used.push(j);
        let fresh = y.column(j).normalize();
        atoms.column_mut(i).copy_from(&fresh);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::LabelLayout;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_atom_single_sample() {
        let layout = LabelLayout::uniform(1, 1, 0).unwrap();
        let mut d = StructuredDictionary::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), layout).unwrap();
        let y = DMatrix::from_column_slice(2, 1, &[3.0, 4.0]);
        let mut x = CodeMatrix::new(DMatrix::from_element(1, 1, 1.0), &[1]).unwrap();
        let out = update_atoms_class(&y, &mut x, &mut d, 1, &Hyperparameters::default()).unwrap();
        assert!(out.dead_atoms.is_empty());
        assert!((d.atoms()[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((d.atoms()[(1, 0)] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn zero_code_row_triggers_replacement() {
        let layout = LabelLayout::uniform(2, 1, 0).unwrap();
        let mut d = StructuredDictionary::new(DMatrix::identity(3, 2), layout).unwrap();
        let y = DMatrix::from_column_slice(3, 3, &[1., 0., 0., 0., 2., 2., 0., 0., 1.]);
        let values = DMatrix::from_row_slice(2, 3, &[1., 0., 0., 0., 0., 0.]);
        let mut x = CodeMatrix::new(values, &[1, 2]).unwrap();
        let out = update_atoms_class(&y, &mut x, &mut d, 2, &Hyperparameters::default()).unwrap();
        assert_eq!(out.dead_atoms, vec![1]);
        // class 2 columns are 1 and 2; column 1 has the larger residual
        let expect = DVector::from_column_slice(&[0.0, 1.0, 1.0]).normalize();
        assert!((d.atoms().column(1) - expect).amax() < 1e-15);
        assert!(x.values().row(1).iter().all(|&v| v == 0.0));
        assert_eq!(d.atoms().column(0), DMatrix::<f64>::identity(3, 2).column(0));
    }

    #[test]
    fn least_squares_step_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let layout = LabelLayout::uniform(2, 2, 1).unwrap();
        let raw = DMatrix::from_fn(6, 5, |_, _| rng.random::<f64>() - 0.5);
        let d0 = StructuredDictionary::from_unnormalized(raw, layout).unwrap();
        let y = DMatrix::from_fn(6, 8, |_, _| rng.random::<f64>());
        let values = DMatrix::from_fn(5, 8, |_, _| rng.random::<f64>() - 0.5);
        let x0 = CodeMatrix::new(values, &[4, 4]).unwrap();

        // updating block 1 touches atoms 1, 2 in order; check the first
        let i = 1;
        let xi = x0.values().row(i).transpose();
        let mut z = &y - d0.atoms() * x0.values();
        z.ger(1.0, &d0.atoms().column(i).clone_owned(), &xi, 1.0);
        let closed = &z * &xi / xi.norm_squared();
        // scalar calculus: f(d) = ‖Z − d x‖², so f(closed + t e) − f(closed) = t²‖x‖²‖e‖²
        let f = |dv: &DVector<f64>| {
            let mut r = z.clone();
            r.ger(-1.0, dv, &xi, 1.0);
            r.norm_squared()
        };
        let base = f(&closed);
        for k in 0..6 {
            let mut e = DVector::zeros(6);
            e[k] = 1e-3;
            let bumped = f(&(&closed + &e));
            assert!(bumped > base);
            assert!((bumped - base - 1e-6 * xi.norm_squared()).abs() < 1e-10);
        }

        let mut d = d0.clone();
        let mut x = x0.clone();
        let out = update_atoms_class(&y, &mut x, &mut d, 1, &Hyperparameters::default()).unwrap();
        assert_eq!(out.steps[0].atom, i);
        assert!((out.steps[0].reconstruction_after - base).abs() < 1e-10 * base.max(1.0));
        let unit = closed.normalize();
        assert!((d.atoms().column(i) - unit).amax() < 1e-12);
        for step in &out.steps {
            assert!(step.reconstruction_after <= step.reconstruction_before * (1.0 + 1e-10));
        }
        // atoms outside block 1 untouched
        for k in [0, 3, 4] {
            assert_eq!(d.atoms().column(k), d0.atoms().column(k));
        }
    }
}
