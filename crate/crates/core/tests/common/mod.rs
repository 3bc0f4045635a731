#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use structdict::dataset::LabeledDataset;

/// Gaussian classes with unit within-class standard deviation whose means
/// sit on orthogonal random directions, `separation` apart pairwise, around
/// a common center of norm `offset`.
pub struct Blobs {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

pub fn gaussian_blobs(
    seed: u64,
    dim: usize,
    classes: usize,
    train_per_class: usize,
    test_per_class: usize,
    separation: f64,
    offset: f64,
) -> Blobs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = DMatrix::from_fn(dim, classes + 1, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = basis.qr().q();
    let radius = separation / 2f64.sqrt();
    let center = q.column(classes) * offset;
    let means: Vec<_> = (0..classes).map(|c| &center + q.column(c) * radius).collect();

    let mut draw = |per_class: usize| {
        let n = classes * per_class;
        let mut y = DMatrix::zeros(dim, n);
        for j in 0..n {
            for i in 0..dim {
                let z: f64 = StandardNormal.sample(&mut rng);
                y[(i, j)] = means[j / per_class][i] + z;
            }
        }
        let labels = (0..n).map(|j| 1 + j / per_class).collect();
        LabeledDataset::new(y, labels, classes).unwrap()
    };
    let train = draw(train_per_class);
    let test = draw(test_per_class);
    Blobs { train, test }
}

/// Euclidean 1-nearest-neighbour accuracy; ties go to the earlier sample.
pub fn one_nn_accuracy(train: &LabeledDataset, test: &LabeledDataset) -> f64 {
    let mut correct = 0;
    for (j, q) in test.features().column_iter().enumerate() {
        let mut best = (f64::INFINITY, 0);
        for (i, t) in train.features().column_iter().enumerate() {
            let d = (q - t).norm_squared();
            if d < best.0 {
                best = (d, train.labels()[i]);
            }
        }
        if best.1 == test.labels()[j] {
            correct += 1;
        }
    }
    correct as f64 / test.len() as f64
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() * 2.0 - 1.0)
}

/// Three classes that all carry a strong component in a common 2-D subspace
/// plus a weaker component in a class-specific subspace of dimension `sub`.
pub fn common_plus_specific(seed: u64, per_class: usize, sub: usize) -> LabeledDataset {
    let (m, classes, common, specific, noise) = (20, 3, 10.0, 2.0, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
    let basis = DMatrix::from_fn(m, 2 + classes * sub, |_, _| g()).qr().q();
    let n = classes * per_class;
    let mut y = DMatrix::zeros(m, n);
    for j in 0..n {
        let c = j / per_class;
        let mut col = basis.column(0) * (common * (1.0 + 0.2 * g()))
            + basis.column(1) * (common * 0.5 * g());
        for s in 0..sub {
            col += basis.column(2 + c * sub + s) * (specific * g());
        }
        for i in 0..m {
            col[i] += noise * g();
        }
        y.set_column(j, &col);
    }
    LabeledDataset::new(y, (0..n).map(|j| 1 + j / per_class).collect(), classes).unwrap()
}
