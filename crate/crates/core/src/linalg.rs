//! Small dense helpers shared by the learner and the classifiers.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

pub type SpdFactor = Cholesky<f64, Dyn>;

/// Cholesky factorization; failure means the input was not SPD, which for
/// the systems assembled here only happens with non-finite data.
pub fn spd_factor(a: DMatrix<f64>, context: impl FnOnce() -> String) -> Result<SpdFactor> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Factorization {
            context: format!("{}: non-finite entries", context()),
        });
    }
    Cholesky::new(a).ok_or_else(|| Error::Factorization { context: context() })
}

/// `AᵀA + βI`.
pub fn ridge_gram(a: &DMatrix<f64>, beta: f64) -> DMatrix<f64> {
    let mut g = a.tr_mul(a);
    for i in 0..g.nrows() {
        g[(i, i)] += beta;
    }
    g
}

/// Ridge codes `(AᵀA + βI)⁻¹ Aᵀ Y`.
pub fn ridge_codes(a: &DMatrix<f64>, y: &DMatrix<f64>, beta: f64) -> Result<DMatrix<f64>> {
    let factor = spd_factor(ridge_gram(a, beta), || "ridge normal equations".into())?;
    let codes = factor.solve(&a.tr_mul(y));
    if codes.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ridge codes"));
    }
    Ok(codes)
}
