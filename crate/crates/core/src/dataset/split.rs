use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitMode {
    /// Fixed number of training samples per class.
    PerClassCount(usize),
    /// Fraction of every class used for training, rounded to the nearest count.
    Fraction(f64),
    /// Stratified k-fold cross-validation.
    KFold(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(mode: SplitMode, seed: u64) -> Self {
        Self { mode, seed }
    }
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

/// Stratified split. Holdout modes return one partition, k-fold returns `k`.
///
/// Each class is shuffled by one seeded generator, in label order; holdout
/// takes a prefix for training and k-fold deals positions round-robin. Both
/// sides must keep at least one sample of every class.
pub fn split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<Vec<Partition>> {
    let min_size = *ds.class_sizes().iter().min().expect("at least one class");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shuffled: Vec<Vec<usize>> = ds
        .class_ranges()
        .into_iter()
        .map(|r| {
            let mut idx: Vec<usize> = r.collect();
            idx.shuffle(&mut rng);
            idx
        })
        .collect();

    let holdout = |counts: Vec<usize>| -> Result<Vec<Partition>> {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (idx, &count) in shuffled.iter().zip(&counts) {
            train.extend_from_slice(&idx[..count]);
            test.extend_from_slice(&idx[count..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        Ok(vec![Partition {
            train: ds.select(&train)?,
            test: ds.select(&test)?,
        }])
    };

    match spec.mode {
        SplitMode::PerClassCount(count) => {
            if count == 0 || count >= min_size {
                return Err(Error::InvalidSplit(format!(
                    "{count} training samples per class requested; every class needs \
                     between 1 and N^c - 1 (smallest class has {min_size})"
                )));
            }
            holdout(vec![count; ds.num_classes()])
        }
        SplitMode::Fraction(ratio) => {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::InvalidSplit(format!(
                    "fraction {ratio} is outside (0, 1)"
                )));
            }
            let counts: Vec<usize> = ds
                .class_sizes()
                .iter()
                .map(|&n| (ratio * n as f64).round() as usize)
                .collect();
            for (c, (&count, &n)) in counts.iter().zip(ds.class_sizes()).enumerate() {
                if count == 0 || count >= n {
                    return Err(Error::InvalidSplit(format!(
                        "fraction {ratio} leaves class {} with {count} of {n} samples for training",
                        c + 1
                    )));
                }
            }
            holdout(counts)
        }
        SplitMode::KFold(k) => {
            if k < 2 || k > min_size {
                return Err(Error::InvalidSplit(format!(
                    "{k} folds requested; need 2 <= k <= {min_size} (smallest class)"
                )));
            }
            (0..k)
                .map(|fold| {
                    let mut train = Vec::new();
                    let mut test = Vec::new();
                    for idx in &shuffled {
                        for (pos, &j) in idx.iter().enumerate() {
                            if pos % k == fold {
                                test.push(j);
                            } else {
                                train.push(j);
                            }
                        }
                    }
                    train.sort_unstable();
                    test.sort_unstable();
                    Ok(Partition {
                        train: ds.select(&train)?,
                        test: ds.select(&test)?,
                    })
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn shaped(classes: usize, per_class: usize) -> LabeledDataset {
        let n = classes * per_class;
        let y = DMatrix::from_fn(3, n, |i, j| (i * n + j) as f64);
        let labels = (0..n).map(|j| 1 + j / per_class).collect();
        LabeledDataset::new(y, labels, classes).unwrap()
    }

    fn sources(ds: &LabeledDataset) -> Vec<usize> {
        ds.source_index().to_vec()
    }

    #[test]
    fn six_per_person_on_yale_shape() {
        let ds = shaped(15, 11);
        let parts = split(&ds, &SplitSpec::new(SplitMode::PerClassCount(6), 0)).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].train.len(), 90);
        assert_eq!(parts[0].test.len(), 75);
        assert!(parts[0].train.class_sizes().iter().all(|&n| n == 6));
    }

    #[test]
    fn half_of_sixty_four() {
        let ds = shaped(3, 64);
        let p = &split(&ds, &SplitSpec::new(SplitMode::Fraction(0.5), 3)).unwrap()[0];
        assert_eq!(p.train.class_sizes(), &[32, 32, 32]);
        assert_eq!(p.test.class_sizes(), &[32, 32, 32]);
    }

    #[test]
    fn deterministic_and_partitioning() {
        let ds = shaped(4, 9);
        let spec = SplitSpec::new(SplitMode::PerClassCount(4), 42);
        let a = &split(&ds, &spec).unwrap()[0];
        let b = &split(&ds, &spec).unwrap()[0];
        assert_eq!(sources(&a.train), sources(&b.train));
        let mut all = sources(&a.train);
        all.extend(sources(&a.test));
        all.sort_unstable();
        assert_eq!(all, (0..36).collect::<Vec<_>>());
        let other = &split(&ds, &SplitSpec::new(SplitMode::PerClassCount(4), 43)).unwrap()[0];
        assert_ne!(sources(&a.train), sources(&other.train));
    }

    #[test]
    fn folds_cover_every_column_once() {
        let ds = shaped(3, 7);
        let parts = split(&ds, &SplitSpec::new(SplitMode::KFold(7), 1)).unwrap();
        assert_eq!(parts.len(), 7);
        let mut tested: Vec<usize> = parts.iter().flat_map(|p| sources(&p.test)).collect();
        tested.sort_unstable();
        assert_eq!(tested, (0..21).collect::<Vec<_>>());
        for p in &parts {
            assert_eq!(p.train.len() + p.test.len(), 21);
            assert_eq!(p.test.class_sizes(), &[1, 1, 1]);
        }
    }

    #[test]
    fn rejects_infeasible_requests() {
        let ds = shaped(2, 5);
        for mode in [
            SplitMode::PerClassCount(5),
            SplitMode::PerClassCount(0),
            SplitMode::Fraction(1.0),
            SplitMode::Fraction(0.01),
            SplitMode::KFold(1),
            SplitMode::KFold(6),
        ] {
            assert!(
                matches!(split(&ds, &SplitSpec::new(mode, 0)), Err(Error::InvalidSplit(_))),
                "{mode:?}"
            );
        }
    }
}
