//! Block-structure diagnostics: how a class's codes spread over the atoms.

use nalgebra::DVector;

use crate::classify::Model;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct InspectReport {
    /// `profiles[c - 1][k]`: mean `|x(k)|` over the class-`c` samples, with
    /// codes taken over the whole dictionary as at GCC query time.
    pub profiles: Vec<Vec<f64>>,
    /// Mean profile value on the class's own atoms divided by the mean on
    /// other classes' particular atoms (shared atoms excluded). `+∞` when
    /// there are no other classes or their mass is zero.
    pub block_ratios: Vec<f64>,
}

pub fn inspect(model: &Model, data: &LabeledDataset) -> Result<InspectReport> {
    if data.num_classes() > model.num_classes() {
        return Err(Error::LabelMismatch(format!(
            "data has {} classes, model has {}",
            data.num_classes(),
            model.num_classes()
        )));
    }
    let layout = model.dictionary().layout();
    let k = layout.num_atoms();
    let mut profiles = vec![vec![0.0; k]; model.num_classes()];
    for c in 1..=data.num_classes() {
        let block = data.class_block(c);
        let mut acc = DVector::zeros(k);
        for col in block.column_iter() {
            acc += model.gcc_code(col)?.abs();
        }
        acc /= block.ncols() as f64;
        profiles[c - 1] = acc.as_slice().to_vec();
    }

    let block_ratios = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let own = layout.block_range(i + 1);
            let own_mean = own.clone().map(|m| p[m]).sum::<f64>() / own.len() as f64;
            let others: Vec<usize> = (layout.shared_count()..k).filter(|m| !own.contains(m)).collect();
            let other_sum: f64 = others.iter().map(|&m| p[m]).sum();
            if others.is_empty() || other_sum == 0.0 {
                f64::INFINITY
            } else {
                own_mean / (other_sum / others.len() as f64)
            }
        })
        .collect();
    Ok(InspectReport {
        profiles,
        block_ratios,
    })
}
