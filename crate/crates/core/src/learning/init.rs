use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{kmeans, CodeMatrix, Hyperparameters, InitMethod};
use crate::dataset::LabeledDataset;
use crate::dictionary::{LabelLayout, StructuredDictionary};
use crate::error::{Error, Result};
use crate::linalg::ridge_codes;

pub(crate) fn check_layout(train: &LabeledDataset, layout: &LabelLayout) -> Result<()> {
    if layout.num_classes() != train.num_classes() {
        return Err(Error::LabelMismatch(format!(
            "layout has {} classes, dataset has {}",
            layout.num_classes(),
            train.num_classes()
        )));
    }
    for (c, (&k, &n)) in layout
        .particular_counts()
        .iter()
        .zip(train.class_sizes())
        .enumerate()
    {
        if n < k {
            return Err(Error::InsufficientSamples {
                class: c + 1,
                needed: k,
                available: n,
            });
        }
    }
    if layout.shared_count() > train.len() {
        return Err(Error::InsufficientSamples {
            class: 0,
            needed: layout.shared_count(),
            available: train.len(),
        });
    }
    Ok(())
}

/// Builds the starting dictionary.
///
/// With [`InitMethod::ClassKMeans`], class `c`'s atoms are k-means centroids
/// of `Y^c`; each class is then ridge-coded over its own atoms and the
/// shared atoms are k-means centroids of the pooled residuals.
pub fn init_dictionary(
    train: &LabeledDataset,
    layout: &LabelLayout,
    hp: &Hyperparameters,
) -> Result<StructuredDictionary> {
    hp.validate()?;
    check_layout(train, layout)?;
    let m = train.dim();
    let mut atoms = DMatrix::zeros(m, layout.num_atoms());

    match hp.init {
        InitMethod::ClassKMeans => {
            let mut residuals = DMatrix::zeros(m, train.len());
            for c in 1..=layout.num_classes() {
                let yc = train.class_block(c).clone_owned();
                let kc = layout.block_range(c).len();
                let part = kmeans(&yc, kc, hp.kmeans_iters, hp.kmeans_restarts, stream_seed(hp.seed, c))?;
                if layout.shared_count() > 0 {
                    let codes = ridge_codes(&part, &yc, hp.beta)?;
                    let r = train.class_range(c);
                    residuals
                        .columns_mut(r.start, r.len())
                        .copy_from(&(&yc - &part * codes));
                }
                let r = layout.block_range(c);
                atoms.columns_mut(r.start, r.len()).copy_from(&part);
            }
            if layout.shared_count() > 0 {
                let shared = kmeans(
                    &residuals,
                    layout.shared_count(),
                    hp.kmeans_iters,
                    hp.kmeans_restarts,
                    stream_seed(hp.seed, 0),
                )?;
                atoms.columns_mut(0, layout.shared_count()).copy_from(&shared);
            }
        }
        InitMethod::RandomSamples => {
            let k = layout.num_atoms();
            if k > train.len() {
                return Err(Error::InsufficientSamples {
                    class: 0,
                    needed: k,
                    available: train.len(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
            for (slot, j) in sample(&mut rng, train.len(), k).into_iter().enumerate() {
                let col = train.features().column(j);
                let norm = col.norm();
                if norm == 0.0 {
                    return Err(Error::DegenerateSample { column: j });
                }
                atoms.column_mut(slot).copy_from(&(col / norm));
            }
        }
    }
    StructuredDictionary::new(atoms, layout.clone())
}

/// Ridge codes of every training sample over the whole dictionary.
pub fn init_codes(
    train: &LabeledDataset,
    dictionary: &StructuredDictionary,
    beta: f64,
) -> Result<CodeMatrix> {
    if train.dim() != dictionary.dim() {
        return Err(Error::ShapeMismatch {
            what: "feature dimension",
            expected: dictionary.dim(),
            found: train.dim(),
        });
    }
    let codes = ridge_codes(dictionary.atoms(), train.features(), beta)?;
    CodeMatrix::new(codes, train.class_sizes())
}

fn stream_seed(seed: u64, stream: usize) -> u64 {
    seed ^ (stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}
