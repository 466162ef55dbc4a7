//! Principal component analysis used to shrink context features before
//! clustering.
//!
//! Fitting centers the data and eigendecomposes whichever Gram matrix is
//! smaller (`d x d` covariance when samples outnumber features, `n x n`
//! otherwise), so a handful of very wide rows is as cheap as many narrow
//! ones. Centering and rotation only; no whitening.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Fitted PCA basis: `components` holds one orthonormal direction per row,
/// ordered by nonincreasing `explained_variance`. Zero entries in
/// `explained_variance` flag directions that carry no data variance
/// (degenerate input); those rows are canonical filler vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Matrix,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.rows()
    }

    pub fn zero_variance_count(&self) -> usize {
        self.explained_variance
            .iter()
            .filter(|&&v| v == 0.0)
            .count()
    }
}

/// Fit the top `d_p` principal directions of `features`.
pub fn pca_fit(features: &Matrix, d_p: usize) -> Result<PcaModel> {
    let n = features.rows();
    let d = features.cols();
    if d_p < 1 || d_p > n.min(d) {
        return Err(Error::Dimension(format!(
            "d_p must be in [1, min(n_samples, dim)] = [1, {}], got {d_p}",
            n.min(d)
        )));
    }
    if !features.is_finite() {
        return Err(Error::NonFinite("feature matrix".into()));
    }

    let mean = features.mean_row();
    let mut centered = features.clone();
    for r in 0..n {
        let row = centered.row_mut(r);
        for (v, m) in row.iter_mut().zip(&mean) {
            *v -= m;
        }
    }

    // Divisor for the sample covariance; a single row has zero variance.
    let var_scale = if n > 1 { 1.0 / (n as f64 - 1.0) } else { 0.0 };

    let (mut components, mut variances) = if d <= n {
        // d x d scatter matrix X^T X.
        let mut scatter = Matrix::zeros(d, d);
        for row in centered.iter_rows() {
            scatter.add_outer(1.0, row, row);
        }
        let (evals, evecs) = jacobi_eigh(&scatter);
        let mut comps = Matrix::zeros(d_p, d);
        let mut vars = vec![0.0; d_p];
        for j in 0..d_p {
            comps.row_mut(j).copy_from_slice(evecs.row(j));
            vars[j] = evals[j].max(0.0) * var_scale;
        }
        (comps, vars)
    } else {
        // n x n Gram matrix X X^T shares its nonzero spectrum with X^T X;
        // left vectors map back through X^T u / sigma.
        let mut gram = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let g = dot(centered.row(i), centered.row(j));
                gram.set(i, j, g);
                gram.set(j, i, g);
            }
        }
        let (evals, evecs) = jacobi_eigh(&gram);
        let frob_sq: f64 = evals.iter().map(|v| v.max(0.0)).sum();
        let tiny = 1e-12 * (1.0 + frob_sq);
        let mut comps = Matrix::zeros(d_p, d);
        let mut vars = vec![0.0; d_p];
        for j in 0..d_p {
            let ev = evals[j].max(0.0);
            if ev > tiny {
                let w = centered.matvec_t(evecs.row(j))?;
                let inv = 1.0 / ev.sqrt();
                for (c, wi) in comps.row_mut(j).iter_mut().zip(&w) {
                    *c = wi * inv;
                }
                vars[j] = ev * var_scale;
            }
            // zero rows are filled by the completion pass below
        }
        (comps, vars)
    };

    complete_orthonormal(&mut components, &variances);
    canonicalize_signs(&mut components);

    // Clamp tiny negative eigenvalues and enforce the nonincreasing contract.
    for j in 1..variances.len() {
        if variances[j] > variances[j - 1] {
            variances[j] = variances[j - 1];
        }
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance: variances,
    })
}

/// Center rows with the fitted mean and rotate into component space.
pub fn pca_project(model: &PcaModel, features: &Matrix) -> Result<Matrix> {
    let d = model.input_dim();
    if features.cols() != d {
        return Err(Error::Dimension(format!(
            "pca_project: model dimension {d}, features have {} columns",
            features.cols()
        )));
    }
    let d_p = model.output_dim();
    let mut out = Matrix::zeros(features.rows(), d_p);
    let mut centered = vec![0.0; d];
    for r in 0..features.rows() {
        for (c, (v, m)) in features.row(r).iter().zip(&model.mean).enumerate() {
            centered[c] = v - m;
        }
        let out_row = out.row_mut(r);
        for j in 0..d_p {
            out_row[j] = dot(&centered, model.components.row(j));
        }
    }
    Ok(out)
}

/// Replace near-zero component rows with canonical basis vectors
/// orthogonalized against the rest, keeping the basis orthonormal when the
/// data does not span `d_p` directions.
fn complete_orthonormal(components: &mut Matrix, variances: &[f64]) {
    let d = components.cols();
    for j in 0..components.rows() {
        let nrm = dot(components.row(j), components.row(j)).sqrt();
        if variances[j] > 0.0 && nrm > 0.5 {
            // Well-defined direction; tighten normalization.
            let inv = 1.0 / nrm;
            for v in components.row_mut(j) {
                *v *= inv;
            }
            continue;
        }
        // Degenerate slot: find a canonical direction independent of the rows
        // already placed.
        let mut filled = false;
        for axis in 0..d {
            let mut cand = vec![0.0; d];
            cand[axis] = 1.0;
            for k in 0..components.rows() {
                if k == j {
                    continue;
                }
                let row_k = components.row(k);
                let row_norm = dot(row_k, row_k);
                if row_norm < 0.25 {
                    continue;
                }
                let proj = dot(&cand, row_k);
                for (cv, rv) in cand.iter_mut().zip(row_k) {
                    *cv -= proj * rv;
                }
            }
            let res = dot(&cand, &cand).sqrt();
            if res > 0.5 {
                let inv = 1.0 / res;
                for (slot, cv) in components.row_mut(j).iter_mut().zip(&cand) {
                    *slot = cv * inv;
                }
                filled = true;
                break;
            }
        }
        debug_assert!(filled, "could not complete orthonormal basis");
    }
}

/// Eigenvectors are sign-ambiguous; make the largest-magnitude entry of each
/// row positive so fits are deterministic.
fn canonicalize_signs(components: &mut Matrix) {
    for j in 0..components.rows() {
        let row = components.row_mut(j);
        let mut best = 0usize;
        for (i, v) in row.iter().enumerate() {
            if v.abs() > row[best].abs() {
                best = i;
            }
        }
        if row[best] < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns eigenvalues in nonincreasing order and the matching eigenvectors
/// as rows of the returned matrix.
pub(crate) fn jacobi_eigh(sym: &Matrix) -> (Vec<f64>, Matrix) {
    let m = sym.rows();
    debug_assert_eq!(m, sym.cols());
    let mut a = sym.clone();
    let mut v = Matrix::identity(m, m);

    let frob_sq: f64 = a.as_slice().iter().map(|x| x * x).sum();
    let stop = 1e-30 * (1.0 + frob_sq);

    for _sweep in 0..100 {
        let mut off_sq = 0.0;
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a.get(p, q);
                off_sq += 2.0 * apq * apq;
            }
        }
        if off_sq <= stop {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- J^T A J restricted to the (p, q) plane.
                for k in 0..m {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..m {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..m {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        a.get(j, j)
            .partial_cmp(&a.get(i, i))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let evals: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut evecs = Matrix::zeros(m, m);
    for (out_r, &col) in order.iter().enumerate() {
        for k in 0..m {
            evecs.set(out_r, k, v.get(k, col));
        }
    }
    (evals, evecs)
}
