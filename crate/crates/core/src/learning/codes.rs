use nalgebra::{DMatrix, DMatrixView, DVector};

use super::{CodeUpdateMode, Hyperparameters};
use crate::dictionary::{StructuredDictionary, SuppressionSelector};
use crate::error::{Error, Result};
use crate::laplacian::ClassLaplacian;
use crate::linalg::{spd_factor, SpdFactor};

/// New codes for one class block with the dictionary fixed.
///
/// Sequential mode sweeps the columns in order, each solve seeing the
/// already-updated neighbours; every step is the exact minimizer of the
/// objective over that column. Batch mode solves all columns at once
/// against the previous block.
pub fn update_codes_class(
    yc: DMatrixView<'_, f64>,
    dictionary: &StructuredDictionary,
    selector: &SuppressionSelector,
    laplacian: &ClassLaplacian,
    xc_prev: DMatrixView<'_, f64>,
    hp: &Hyperparameters,
) -> Result<DMatrix<f64>> {
    let d = dictionary.atoms();
    if yc.nrows() != d.nrows() {
        return Err(Error::ShapeMismatch {
            what: "feature dimension",
            expected: d.nrows(),
            found: yc.nrows(),
        });
    }
    if xc_prev.shape() != (d.ncols(), yc.ncols()) {
        return Err(Error::ShapeMismatch {
            what: "previous code block columns",
            expected: yc.ncols(),
            found: xc_prev.ncols(),
        });
    }
    let gram = d.tr_mul(d);
    let dty = d.tr_mul(&yc);
    let mut xc = xc_prev.clone_owned();
    solve_class_block(&gram, &dty, selector, laplacian, &mut xc, hp)?;
    Ok(xc)
}

/// `DᵀD + λ·diag(PᵀP) + (β + γ·ℓ)I`.
pub(crate) fn class_system(
    gram: &DMatrix<f64>,
    selector: &SuppressionSelector,
    hp: &Hyperparameters,
    laplacian_diag: f64,
) -> DMatrix<f64> {
    let mut a = gram.clone();
    let shift = hp.beta + hp.gamma * laplacian_diag;
    for i in 0..a.nrows() {
        a[(i, i)] += shift;
    }
    for &k in selector.active() {
        a[(k, k)] += hp.lambda;
    }
    a
}

/// Updates `xc` in place given the Gram matrix and `Dᵀ Y^c`.
pub(crate) fn solve_class_block(
    gram: &DMatrix<f64>,
    dty: &DMatrix<f64>,
    selector: &SuppressionSelector,
    laplacian: &ClassLaplacian,
    xc: &mut DMatrix<f64>,
    hp: &Hyperparameters,
) -> Result<()> {
    let class = selector.class();
    let factor = |diag: f64| -> Result<SpdFactor> {
        spd_factor(class_system(gram, selector, hp, diag), || {
            format!("code system of class {class}")
        })
    };

    match hp.code_update_mode {
        CodeUpdateMode::Sequential => {
            let factor = factor(laplacian.diag())?;
            // coupling to the others: −γ Σ_{j≠i} L(i,j) x_j = −γ·off·(S − x_i)
            let coupling = -hp.gamma * laplacian.off_diag();
            let mut sum: DVector<f64> = xc.column_sum();
            let mut rhs = DVector::zeros(xc.nrows());
            for i in 0..xc.ncols() {
                rhs.copy_from(&dty.column(i));
                if coupling != 0.0 {
                    rhs.axpy(coupling, &(&sum - xc.column(i)), 1.0);
                }
                factor.solve_mut(&mut rhs);
                sum += &rhs - xc.column(i);
                xc.column_mut(i).copy_from(&rhs);
            }
        }
        CodeUpdateMode::Batch => {
            let factor = factor(1.0)?;
            let mut rhs = dty.clone();
            if hp.gamma != 0.0 {
                rhs -= laplacian.rhs_term(xc.columns(0, xc.ncols()))? * hp.gamma;
            }
            factor.solve_mut(&mut rhs);
            *xc = rhs;
        }
    }
    if xc.iter().any(|v| !v.is_finite()) {
        return Err(Error::Factorization {
            context: format!("non-finite codes for class {class}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::LabelLayout;
    use crate::linalg::ridge_codes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dictionary(rng: &mut ChaCha8Rng, m: usize, layout: LabelLayout) -> StructuredDictionary {
        let raw = DMatrix::from_fn(m, layout.num_atoms(), |_, _| rng.random::<f64>() - 0.5);
        StructuredDictionary::from_unnormalized(raw, layout).unwrap()
    }

    #[test]
    fn no_regularizers_gives_ridge_codes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let layout = LabelLayout::uniform(2, 3, 1).unwrap();
        let d = random_dictionary(&mut rng, 6, layout.clone());
        let yc = DMatrix::from_fn(6, 4, |_, _| rng.random::<f64>());
        let prev = DMatrix::from_fn(7, 4, |_, _| rng.random::<f64>());
        let sel = layout.suppression_selector(1).unwrap();
        let lap = ClassLaplacian::new(4).unwrap();
        let oracle = ridge_codes(d.atoms(), &yc, 0.1).unwrap();
        for mode in [CodeUpdateMode::Sequential, CodeUpdateMode::Batch] {
            let hp = Hyperparameters { beta: 0.1, lambda: 0.0, gamma: 0.0, code_update_mode: mode, ..Default::default() };
            let x = update_codes_class(yc.columns(0, 4), &d, &sel, &lap, prev.columns(0, 4), &hp).unwrap();
            assert!((x - &oracle).amax() < 1e-10);
        }
    }

    #[test]
    fn single_sample_batch_uses_previous_code() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let layout = LabelLayout::uniform(2, 2, 0).unwrap();
        let d = random_dictionary(&mut rng, 5, layout.clone());
        let yc = DMatrix::from_fn(5, 1, |_, _| rng.random::<f64>());
        let prev = DMatrix::from_fn(4, 1, |_, _| rng.random::<f64>());
        let sel = layout.suppression_selector(2).unwrap();
        let lap = ClassLaplacian::new(1).unwrap();
        let hp = Hyperparameters { beta: 0.2, lambda: 3.0, gamma: 0.7, code_update_mode: CodeUpdateMode::Batch, ..Default::default() };
        let x = update_codes_class(yc.columns(0, 1), &d, &sel, &lap, prev.columns(0, 1), &hp).unwrap();

        let mut a = d.atoms().transpose() * d.atoms();
        for i in 0..4 {
            a[(i, i)] += 0.2 + 0.7;
        }
        for k in [0, 1] {
            a[(k, k)] += 3.0;
        }
        let rhs = d.atoms().transpose() * &yc + &prev * 0.7;
        let oracle = a.lu().solve(&rhs).unwrap();
        assert!((x - oracle).amax() < 1e-10);
    }

    #[test]
    fn modes_agree_without_coupling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layout = LabelLayout::uniform(3, 2, 2).unwrap();
        for _ in 0..10 {
            let d = random_dictionary(&mut rng, 7, layout.clone());
            let yc = DMatrix::from_fn(7, 5, |_, _| rng.random::<f64>());
            let prev = DMatrix::from_fn(8, 5, |_, _| rng.random::<f64>());
            let sel = layout.suppression_selector(3).unwrap();
            let lap = ClassLaplacian::new(5).unwrap();
            let mut hp = Hyperparameters { beta: 0.05, lambda: 12.0, gamma: 0.0, ..Default::default() };
            let seq = update_codes_class(yc.columns(0, 5), &d, &sel, &lap, prev.columns(0, 5), &hp).unwrap();
            hp.code_update_mode = CodeUpdateMode::Batch;
            let batch = update_codes_class(yc.columns(0, 5), &d, &sel, &lap, prev.columns(0, 5), &hp).unwrap();
            assert!((seq - batch).amax() < 1e-10);
        }
    }

    #[test]
    fn shape_errors() {
        let layout = LabelLayout::uniform(1, 2, 0).unwrap();
        let d = StructuredDictionary::new(DMatrix::identity(3, 2), layout.clone()).unwrap();
        let sel = layout.suppression_selector(1).unwrap();
        let lap = ClassLaplacian::new(2).unwrap();
        let hp = Hyperparameters::default();
        let y = DMatrix::zeros(4, 2);
        let x = DMatrix::zeros(2, 2);
        assert!(update_codes_class(y.columns(0, 2), &d, &sel, &lap, x.columns(0, 2), &hp).is_err());
    }
}
