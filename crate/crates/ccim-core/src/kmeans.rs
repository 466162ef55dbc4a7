//! K-means++ seeding and Lloyd iterations over feature rows.
//!
//! Deterministic for a fixed seed: the D^2 sampling stream, tie-breaking
//! (lowest index), and accumulation order are all fixed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{squared_distance, Matrix};

/// Result of a Lloyd fit. `centers` are the arithmetic means of the final
/// clusters, `inertia` the sum of squared distances to them, and
/// `inertia_trace` the per-iteration objective (nonincreasing).
#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub centers: Matrix,
    pub inertia: f64,
    pub inertia_trace: Vec<f64>,
}

impl ClusterAssignment {
    pub fn n_clusters(&self) -> usize {
        self.centers.rows()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_clusters()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Choose `n` distinct rows of `points` by D^2 sampling.
pub fn kmeanspp_init(points: &Matrix, n: usize, seed: u64) -> Result<Matrix> {
    let n_points = points.rows();
    if n < 1 || n > n_points {
        return Err(Error::Size(format!(
            "cluster count must be in [1, {n_points}], got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut taken = vec![false; n_points];

    let first = rng.random_range(0..n_points);
    chosen.push(first);
    taken[first] = true;

    // Squared distance to the nearest chosen center, maintained incrementally.
    let mut d2: Vec<f64> = (0..n_points)
        .map(|i| squared_distance(points.row(i), points.row(first)))
        .collect();

    while chosen.len() < n {
        let total: f64 = d2
            .iter()
            .zip(&taken)
            .filter(|(_, &t)| !t)
            .map(|(d, _)| *d)
            .sum();
        let pick = if total > 0.0 {
            let mut u = rng.random_range(0.0..total);
            let mut pick = None;
            for i in 0..n_points {
                if taken[i] {
                    continue;
                }
                u -= d2[i];
                if u < 0.0 && d2[i] > 0.0 {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can exhaust the loop; fall back to the last point
            // with positive weight.
            pick.unwrap_or_else(|| {
                (0..n_points)
                    .rev()
                    .find(|&i| !taken[i] && d2[i] > 0.0)
                    .or_else(|| (0..n_points).find(|&i| !taken[i]))
                    .unwrap()
            })
        } else {
            // Every remaining point coincides with a center; indices must
            // still be distinct.
            (0..n_points).find(|&i| !taken[i]).unwrap()
        };
        chosen.push(pick);
        taken[pick] = true;
        for i in 0..n_points {
            let d = squared_distance(points.row(i), points.row(pick));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }

    let mut centers = Matrix::zeros(n, points.cols());
    for (r, &idx) in chosen.iter().enumerate() {
        centers.row_mut(r).copy_from_slice(points.row(idx));
    }
    Ok(centers)
}

/// Lloyd iterations from the given centers until the largest center shift
/// drops below `tol` or `max_iter` is reached. Empty clusters are repaired
/// by re-seeding to the point farthest from its current center.
pub fn kmeans_fit(
    points: &Matrix,
    init_centers: &Matrix,
    max_iter: usize,
    tol: f64,
) -> Result<ClusterAssignment> {
    let n_points = points.rows();
    let k = init_centers.rows();
    if !points.is_finite() || !init_centers.is_finite() {
        return Err(Error::NonFinite("kmeans input".into()));
    }
    if init_centers.cols() != points.cols() {
        return Err(Error::Dimension(format!(
            "centers have {} columns, points have {}",
            init_centers.cols(),
            points.cols()
        )));
    }
    if k < 1 || k > n_points {
        return Err(Error::Size(format!(
            "cluster count must be in [1, {n_points}], got {k}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tol must be > 0, got {tol}")));
    }
    if max_iter < 1 {
        return Err(Error::Parameter("max_iter must be >= 1".into()));
    }

    let mut centers = init_centers.clone();
    let mut labels = vec![0usize; n_points];
    let mut trace = Vec::new();

    for _ in 0..max_iter {
        let mut inertia = assign(points, &centers, &mut labels);
        inertia = repair_empty_clusters(points, &mut centers, &mut labels, inertia);
        trace.push(inertia);

        let new_centers = cluster_means(points, &labels, k, points.cols());
        let mut shift: f64 = 0.0;
        for j in 0..k {
            shift = shift.max(squared_distance(new_centers.row(j), centers.row(j)).sqrt());
        }
        centers = new_centers;
        if shift < tol {
            break;
        }
    }

    // Centers are now the means of the last assignment; report the objective
    // against them.
    let final_inertia: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| squared_distance(points.row(i), centers.row(l)))
        .sum();
    trace.push(final_inertia);

    Ok(ClusterAssignment {
        labels,
        centers,
        inertia: final_inertia,
        inertia_trace: trace,
    })
}

/// Nearest-center assignment (lowest index wins ties). Returns the inertia.
fn assign(points: &Matrix, centers: &Matrix, labels: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for i in 0..points.rows() {
        let row = points.row(i);
        let mut best = 0usize;
        let mut best_d = squared_distance(row, centers.row(0));
        for j in 1..centers.rows() {
            let d = squared_distance(row, centers.row(j));
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        labels[i] = best;
        inertia += best_d;
    }
    inertia
}

/// Give every empty cluster the point farthest from its assigned center,
/// stealing only from clusters that keep at least one member. Returns the
/// updated inertia.
fn repair_empty_clusters(
    points: &Matrix,
    centers: &mut Matrix,
    labels: &mut [usize],
    inertia: f64,
) -> f64 {
    let k = centers.rows();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    if sizes.iter().all(|&s| s > 0) {
        return inertia;
    }

    let mut inertia = inertia;
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for i in 0..points.rows() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            let d = squared_distance(points.row(i), centers.row(labels[i]));
            match far {
                Some((_, fd)) if d <= fd => {}
                _ => far = Some((i, d)),
            }
        }
        // k <= n_points guarantees a donor cluster exists.
        let (p, d) = far.expect("no donor cluster for empty-cluster repair");
        sizes[labels[p]] -= 1;
        labels[p] = j;
        sizes[j] = 1;
        centers.row_mut(j).copy_from_slice(points.row(p));
        inertia = (inertia - d).max(0.0);
    }
    inertia
}

fn cluster_means(points: &Matrix, labels: &[usize], k: usize, dim: usize) -> Matrix {
    let mut means = Matrix::zeros(k, dim);
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        let row = points.row(i);
        let mean = means.row_mut(l);
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for (l, &c) in counts.iter().enumerate() {
        if c > 0 {
            let inv = 1.0 / c as f64;
            for m in means.row_mut(l) {
                *m *= inv;
            }
        }
    }
    means
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn two_blobs(seed: u64, dim: usize, per_blob: usize, sigma: f64) -> (Matrix, Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rows = Vec::new();
        for sign in [1.0f64, -1.0] {
            for _ in 0..per_blob {
                let row: Vec<f64> = (0..dim).map(|_| 5.0 * sign + noise.sample(&mut rng)).collect();
                rows.push(row);
            }
        }
        let points = Matrix::from_rows(rows).unwrap();
        let mut mean_a = vec![0.0; dim];
        let mut mean_b = vec![0.0; dim];
        for i in 0..per_blob {
            for c in 0..dim {
                mean_a[c] += points.get(i, c) / per_blob as f64;
                mean_b[c] += points.get(per_blob + i, c) / per_blob as f64;
            }
        }
        (points, mean_a, mean_b)
    }

    #[test]
    fn identical_points_single_cluster() {
        let points = Matrix::from_rows(vec![vec![3.5, -1.0]; 12]).unwrap();
        let init = kmeanspp_init(&points, 1, 0).unwrap();
        let fit = kmeans_fit(&points, &init, 300, 1e-6).unwrap();
        assert_eq!(fit.inertia, 0.0);
        assert_eq!(fit.labels, vec![0; 12]);
        // one assignment pass plus the final objective
        assert!(fit.inertia_trace.len() <= 2);
    }

    #[test]
    fn two_blob_centers_recovered() {
        let (points, mean_a, mean_b) = two_blobs(42, 8, 100, 0.5);
        let init = kmeanspp_init(&points, 2, 7).unwrap();
        let fit = kmeans_fit(&points, &init, 300, 1e-6).unwrap();
        // match fitted centers to blob means by proximity
        for target in [&mean_a, &mean_b] {
            let best = (0..2)
                .map(|j| squared_distance(fit.centers.row(j), target).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 0.15, "center misses blob mean by {best}");
        }
    }

    #[test]
    fn line_partition_matches_brute_force() {
        let points = Matrix::from_rows(vec![vec![0.0], vec![1.0], vec![10.0]]).unwrap();

        // Oracle: enumerate all 2-partitions of three points.
        let mut best_inertia = f64::INFINITY;
        let mut best_mask = 0u8;
        for mask in 1..7u8 {
            let (mut sum_a, mut n_a, mut sum_b, mut n_b) = (0.0, 0, 0.0, 0);
            for (i, v) in [0.0, 1.0, 10.0].iter().enumerate() {
                if mask & (1 << i) != 0 {
                    sum_a += v;
                    n_a += 1;
                } else {
                    sum_b += v;
                    n_b += 1;
                }
            }
            if n_a == 0 || n_b == 0 {
                continue;
            }
            let (ma, mb) = (sum_a / n_a as f64, sum_b / n_b as f64);
            let inertia: f64 = [0.0, 1.0, 10.0]
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let m = if mask & (1 << i) != 0 { ma } else { mb };
                    (v - m) * (v - m)
                })
                .sum();
            if inertia < best_inertia {
                best_inertia = inertia;
                best_mask = mask;
            }
        }
        assert_eq!(best_mask & 0b011, 0b011 & best_mask); // sanity: mask usable
        assert!((best_inertia - 0.5).abs() < 1e-12);

        let init = kmeanspp_init(&points, 2, 0).unwrap();
        let fit = kmeans_fit(&points, &init, 300, 1e-9).unwrap();
        assert!((fit.inertia - best_inertia).abs() < 1e-12);
        assert_eq!(fit.labels[0], fit.labels[1]);
        assert_ne!(fit.labels[0], fit.labels[2]);
    }

    #[test]
    fn init_is_deterministic_and_distinct() {
        let (points, _, _) = two_blobs(3, 4, 30, 1.0);
        let a = kmeanspp_init(&points, 5, 99).unwrap();
        let b = kmeanspp_init(&points, 5, 99).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        let c = kmeanspp_init(&points, 5, 100).unwrap();
        assert_ne!(a.as_slice(), c.as_slice());
    }

    #[test]
    fn init_exhaustion_is_a_permutation() {
        let points =
            Matrix::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 3.0]])
                .unwrap();
        let centers = kmeanspp_init(&points, 4, 5).unwrap();
        let mut seen = [false; 4];
        for r in 0..4 {
            let idx = (0..4)
                .find(|&i| squared_distance(centers.row(r), points.row(i)) == 0.0)
                .expect("center not an input row");
            assert!(!seen[idx], "row picked twice");
            seen[idx] = true;
        }
    }

    #[test]
    fn too_many_clusters_rejected() {
        let points = Matrix::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(matches!(
            kmeanspp_init(&points, 3, 0),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn inertia_trace_nonincreasing() {
        for seed in 0..8u64 {
            let (points, _, _) = two_blobs(seed, 6, 50, 2.0);
            let init = kmeanspp_init(&points, 4, seed).unwrap();
            let fit = kmeans_fit(&points, &init, 300, 1e-9).unwrap();
            for w in fit.inertia_trace.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-9 * (1.0 + w[0]),
                    "trace increased: {} -> {}",
                    w[0],
                    w[1]
                );
            }
            let sizes = fit.cluster_sizes();
            assert!(sizes.iter().all(|&s| s > 0), "empty cluster survived");
        }
    }

    #[test]
    fn duplicate_points_still_fill_all_clusters() {
        // 3 distinct values, 5 clusters: repair must keep every id populated.
        let mut rows = vec![vec![0.0]; 4];
        rows.extend(vec![vec![1.0]; 4]);
        rows.extend(vec![vec![5.0]; 4]);
        let points = Matrix::from_rows(rows).unwrap();
        let init = kmeanspp_init(&points, 5, 1).unwrap();
        let fit = kmeans_fit(&points, &init, 50, 1e-9).unwrap();
        assert!(fit.cluster_sizes().iter().all(|&s| s > 0));
    }
}
