mod common;

use common::random_matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use structdict::dataset::{load_binary, load_csv, save_binary, save_csv, split, LabeledDataset, SplitMode, SplitSpec};

fn yale_shaped() -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(38);
    let n = 2414;
    let features = random_matrix(&mut rng, 300, n);
    let mut labels: Vec<usize> = (0..n).map(|j| 1 + j % 38).collect();
    for j in (1..n).rev() {
        labels.swap(j, rng.random_range(0..=j));
    }
    LabeledDataset::new(features, labels, 38).unwrap()
}

#[test]
fn binary_round_trip_at_full_shape() {
    let ds = yale_shaped();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("yale.xldd");
    save_binary(&ds, &path).unwrap();
    let back = load_binary(&path).unwrap();
    assert_eq!((back.dim(), back.len(), back.num_classes()), (300, 2414, 38));
    assert_eq!(back.features(), ds.features());
    assert_eq!(back.labels(), ds.labels());
}

#[test]
fn csv_round_trip_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let features = random_matrix(&mut rng, 7, 12) * 1e3;
    let labels = (0..12).map(|j| 1 + j % 3).collect();
    let ds = LabeledDataset::new(features, labels, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    save_csv(&ds, &path).unwrap();
    let back = load_csv(&path).unwrap();
    assert_eq!(back.features(), ds.features());
    assert_eq!(back.labels(), ds.labels());
}

#[test]
fn yale_protocol_split() {
    let ds = yale_shaped();
    let parts = split(&ds, &SplitSpec::new(SplitMode::PerClassCount(32), 0)).unwrap();
    assert_eq!(parts.len(), 1);
    let p = &parts[0];
    assert_eq!(p.train.len(), 38 * 32);
    assert_eq!(p.train.len() + p.test.len(), 2414);
    assert!(p.train.class_sizes().iter().all(|&s| s == 32));
}
