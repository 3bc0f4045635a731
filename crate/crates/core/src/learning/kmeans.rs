use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Lloyd's k-means with k-means++ seeding, best of `restarts` by
/// within-cluster sum of squares. Columns of `points` are the samples.
///
/// Returned centroids are normalized to unit length. A centroid that
/// collapses to zero is replaced by the largest member of its cluster (or
/// of all points, failing that); if every point is zero the centroid
/// becomes a coordinate axis.
pub fn kmeans(
    points: &DMatrix<f64>,
    k: usize,
    iters: usize,
    restarts: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let n = points.ncols();
    if k == 0 || k > n {
        return Err(Error::InsufficientSamples {
            class: 0,
            needed: k.max(1),
            available: n,
        });
    }

    let mut best: Option<(f64, DMatrix<f64>, Vec<usize>)> = None;
    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64);
        let (inertia, centroids, assign) = lloyd(points, k, iters, &mut rng);
        if best.as_ref().is_none_or(|(b, _, _)| inertia < *b) {
            best = Some((inertia, centroids, assign));
        }
    }
    let (_, mut centroids, assign) = best.expect("at least one restart");
    normalize_centroids(points, &mut centroids, &assign);
    Ok(centroids)
}

fn sq_dist(points: &DMatrix<f64>, j: usize, c: &DMatrix<f64>, i: usize) -> f64 {
    points
        .column(j)
        .iter()
        .zip(c.column(i).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn plus_plus(points: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.ncols();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut nearest: Vec<f64> = (0..n)
        .map(|j| {
            let c = chosen[0];
            points.column(j).metric_distance(&points.column(c)).powi(2)
        })
        .collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (j, &w) in nearest.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(j);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // every point coincides with a centre; take any unused index
            let free: Vec<usize> = (0..n).filter(|j| !chosen.contains(j)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (j, w) in nearest.iter_mut().enumerate() {
            let d = points.column(j).metric_distance(&points.column(next)).powi(2);
            if d < *w {
                *w = d;
            }
        }
    }
    points.select_columns(&chosen)
}

fn lloyd(
    points: &DMatrix<f64>,
    k: usize,
    iters: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, DMatrix<f64>, Vec<usize>) {
    let n = points.ncols();
    let mut centroids = plus_plus(points, k, rng);
    let mut assign = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];

    for _ in 0..iters.max(1) {
        let mut changed = false;
        for j in 0..n {
            let (mut best_i, mut best_d) = (0, f64::INFINITY);
            for i in 0..k {
                let d = sq_dist(points, j, &centroids, i);
                if d < best_d {
                    best_i = i;
                    best_d = d;
                }
            }
            changed |= assign[j] != best_i;
            assign[j] = best_i;
            dist[j] = best_d;
        }

        let mut sums = DMatrix::zeros(points.nrows(), k);
        let mut counts = vec![0usize; k];
        for j in 0..n {
            let mut col = sums.column_mut(assign[j]);
            col += points.column(j);
            counts[assign[j]] += 1;
        }
        for i in 0..k {
            if counts[i] == 0 {
                // refill with the point farthest from its own centroid
                let far = (0..n)
                    .filter(|&j| counts[assign[j]] > 1)
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)));
                if let Some(j) = far {
                    let old = assign[j];
                    let mut src = sums.column_mut(old);
                    src -= points.column(j);
                    counts[old] -= 1;
                    sums.column_mut(i).copy_from(&points.column(j));
                    counts[i] = 1;
                    assign[j] = i;
                    dist[j] = 0.0;
                    changed = true;
                }
            }
        }
        for (i, &n) in counts.iter().enumerate().take(k) {
            if n > 0 {
                let mean = sums.column(i) / n as f64;
                centroids.column_mut(i).copy_from(&mean);
            }
        }
        if !changed {
            break;
        }
    }

    let inertia = (0..n).map(|j| sq_dist(points, j, &centroids, assign[j])).sum();
    (inertia, centroids, assign)
}

fn normalize_centroids(points: &DMatrix<f64>, centroids: &mut DMatrix<f64>, assign: &[usize]) {
    let largest = |members: &mut dyn Iterator<Item = usize>| -> Option<usize> {
        members
            .map(|j| (j, points.column(j).norm()))
            .filter(|&(_, norm)| norm > 0.0)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(j, _)| j)
    };
    for i in 0..centroids.ncols() {
        let norm = centroids.column(i).norm();
        if norm > 1e-12 {
            let unit = centroids.column(i) / norm;
            centroids.column_mut(i).copy_from(&unit);
            continue;
        }
        let pick = largest(&mut (0..points.ncols()).filter(|&j| assign[j] == i))
            .or_else(|| largest(&mut (0..points.ncols())));
        let replacement = match pick {
            Some(j) => points.column(j).normalize(),
            None => {
                let mut axis = DVector::zeros(points.nrows());
                axis[i % points.nrows()] = 1.0;
                axis
            }
        };
        centroids.column_mut(i).copy_from(&replacement);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn k_equals_n_returns_normalized_points() {
        let pts = DMatrix::from_column_slice(2, 3, &[3., 4., -1., 0., 0., 2.]);
        let c = kmeans(&pts, 3, 10, 2, 1).unwrap();
        let mut found = [false; 3];
        for col in c.column_iter() {
            for (j, hit) in found.iter_mut().enumerate() {
                if (col - pts.column(j).normalize()).amax() < 1e-12 {
                    *hit = true;
                }
            }
        }
        assert_eq!(found, [true; 3]);
    }

    #[test]
    fn single_centroid_is_normalized_mean() {
        let pts = DMatrix::from_column_slice(2, 3, &[1., 0., 0., 1., 2., 2.]);
        let c = kmeans(&pts, 1, 10, 1, 0).unwrap();
        let mean = DVector::from_column_slice(&[1.0, 1.0]).normalize();
        assert!((c.column(0) - mean).amax() < 1e-12);
    }

    #[test]
    fn separated_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let centers = [[5.0, 1.0], [-1.0, 6.0]];
        let pts = DMatrix::from_fn(2, 80, |i, j| centers[j / 40][i] + noise.sample(&mut rng));
        let c = kmeans(&pts, 2, 100, 3, 4).unwrap();
        for blob in 0..2 {
            let mean = pts.columns(blob * 40, 40).column_mean().normalize();
            let close = c.column_iter().any(|col| (col - &mean).norm() < 0.1);
            assert!(close, "blob {blob} not recovered");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = DMatrix::from_fn(5, 30, |_, _| rng.random::<f64>());
        assert_eq!(kmeans(&pts, 4, 50, 3, 9).unwrap(), kmeans(&pts, 4, 50, 3, 9).unwrap());
    }

    #[test]
    fn errors_and_degenerate_inputs() {
        let pts = DMatrix::from_element(3, 2, 1.0);
        assert!(kmeans(&pts, 3, 10, 1, 0).is_err());
        // duplicates: both centroids must still be unit vectors
        let c = kmeans(&pts, 2, 10, 1, 0).unwrap();
        for col in c.column_iter() {
            assert!((col.norm() - 1.0).abs() < 1e-12);
        }
        let zeros = DMatrix::zeros(3, 4);
        let c = kmeans(&zeros, 2, 10, 1, 0).unwrap();
        for col in c.column_iter() {
            assert!((col.norm() - 1.0).abs() < 1e-12);
        }
    }
}
