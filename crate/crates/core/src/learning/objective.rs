use nalgebra::DMatrix;

use super::{CodeMatrix, Hyperparameters};
use crate::dictionary::{LabelLayout, StructuredDictionary};
use crate::error::{Error, Result};
use crate::laplacian::BlockLaplacian;

/// The four weighted terms of the training objective.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObjectiveBreakdown {
    /// `Σ_c ‖Y^c − D X^c‖²`
    pub reconstruction: f64,
    /// `β ‖X‖²`
    pub ridge: f64,
    /// `λ Σ_c ‖P^c X^c‖²`
    pub suppression: f64,
    /// `γ tr(X L Xᵀ)`
    pub group: f64,
    pub total: f64,
}

impl ObjectiveBreakdown {
    pub fn new(reconstruction: f64, ridge: f64, suppression: f64, group: f64) -> Self {
        Self {
            reconstruction,
            ridge,
            suppression,
            group,
            total: reconstruction + ridge + suppression + group,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.reconstruction, self.ridge, self.suppression, self.group, self.total]
            .iter()
            .all(|v| v.is_finite())
    }
}

pub fn objective(
    y: &DMatrix<f64>,
    dictionary: &StructuredDictionary,
    codes: &CodeMatrix,
    layout: &LabelLayout,
    laplacian: &BlockLaplacian,
    hp: &Hyperparameters,
) -> Result<ObjectiveBreakdown> {
    let x = codes.values();
    if y.nrows() != dictionary.dim() {
        return Err(Error::ShapeMismatch {
            what: "feature dimension",
            expected: dictionary.dim(),
            found: y.nrows(),
        });
    }
    if x.shape() != (layout.num_atoms(), y.ncols()) {
        return Err(Error::ShapeMismatch {
            what: "code matrix columns",
            expected: y.ncols(),
            found: x.ncols(),
        });
    }
    if codes.num_classes() != layout.num_classes() {
        return Err(Error::LabelMismatch(format!(
            "codes have {} class blocks, layout has {} classes",
            codes.num_classes(),
            layout.num_classes()
        )));
    }

    let reconstruction = (y - dictionary.atoms() * x).norm_squared();
    let ridge = hp.beta * x.norm_squared();
    let mut suppression = 0.0;
    for c in 1..=layout.num_classes() {
        let sel = layout.suppression_selector(c)?;
        let block = codes.block(c);
        for col in block.column_iter() {
            suppression += sel.active().iter().map(|&k| col[k] * col[k]).sum::<f64>();
        }
    }
    let group = hp.gamma * laplacian.total_variation(x)?;
    Ok(ObjectiveBreakdown::new(
        reconstruction,
        ridge,
        hp.lambda * suppression,
        group,
    ))
}
