//! Eigendecomposition of complex-symmetric matrices under the bilinear
//! (unconjugated) inner product `u^T v`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Threshold below which a bilinear eigenvector norm flags an exceptional point.
pub const EPS_EXCEPTIONAL: f64 = 1e-8;

/// Relative spread under which eigenvalues are treated as one degenerate cluster.
const CLUSTER_TOL: f64 = 1e-9;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<C64>,
    /// Column `k` is the eigenvector of `values[k]`, normalized so `v^T v = 1`.
    pub vectors: CMatrix,
}

pub fn bilinear(u: &CVector, v: &CVector) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}

/// Diagonalizes a complex-symmetric matrix.
///
/// Eigenvalues are ordered by increasing imaginary part (fastest decay
/// first), ties broken by real part. Degenerate clusters are spanned by a
/// null-space basis and re-orthogonalized under the bilinear form.
pub fn eig_symmetric(matrix: &CMatrix) -> Result<SymmetricEigen> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols());
    if n == 0 {
        return Ok(SymmetricEigen {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let mut values: Vec<C64> = matrix
        .clone()
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular")
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));

    let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        let found = clusters
            .iter_mut()
            .find(|c| (values[c[0]] - values[k]).norm() < CLUSTER_TOL * scale);
        match found {
            Some(c) => c.push(k),
            None => clusters.push(vec![k]),
        }
    }

    let mut vectors = CMatrix::zeros(n, n);
    for cluster in &clusters {
        let mean = cluster.iter().map(|&k| values[k]).sum::<C64>() / cluster.len() as f64;
        for &k in cluster {
            values[k] = mean;
        }
        let basis = null_space(matrix, mean, cluster.len());
        for (j, v) in basis.iter().enumerate() {
            let residual = (matrix * v - v * mean).norm() / v.norm();
            if residual > 1e-6 * scale {
                // Fewer independent eigenvectors than the multiplicity.
                return Err(Error::ExceptionalPoint {
                    index: cluster[j],
                    norm: 0.0,
                });
            }
        }
        let basis = if cluster.len() == 1 {
            basis
        } else {
            bilinear_gram_schmidt(basis, cluster[0])?
        };
        for (j, &k) in cluster.iter().enumerate() {
            let mut v = basis[j].clone();
            if cluster.len() == 1 {
                v = refine(matrix, values[k], v);
            }
            let norm2 = bilinear(&v, &v);
            if norm2.norm() < EPS_EXCEPTIONAL * v.norm_squared() {
                return Err(Error::ExceptionalPoint {
                    index: k,
                    norm: norm2.norm() / v.norm_squared(),
                });
            }
            v /= norm2.sqrt();
            vectors.set_column(k, &v);
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Right singular vectors of `matrix - lambda I` for the `dim` smallest singular values.
fn null_space(matrix: &CMatrix, lambda: C64, dim: usize) -> Vec<CVector> {
    let n = matrix.nrows();
    let shifted = matrix - CMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    order
        .into_iter()
        .take(dim)
        .map(|row| v_t.row(row).transpose().map(|z| z.conj()))
        .collect()
}

/// One step of inverse iteration to polish a simple eigenvector.
fn refine(matrix: &CMatrix, lambda: C64, v: CVector) -> CVector {
    let n = matrix.nrows();
    let shift = lambda + C64::new(1e-10, 1e-10) * (1.0 + lambda.norm());
    let shifted = matrix - CMatrix::identity(n, n) * shift;
    match shifted.lu().solve(&v) {
        Some(w) if w.iter().all(|z| z.is_finite()) && w.norm() > 0.0 => {
            let w = w.normalize();
            let residual = (matrix * &w - &w * lambda).norm();
            let old = (matrix * &v - &v * lambda).norm();
            if residual <= old {
                w
            } else {
                v
            }
        }
        _ => v,
    }
}

/// Produces a basis of the same span with `u_i^T u_j = delta_ij`.
fn bilinear_gram_schmidt(mut pool: Vec<CVector>, first_index: usize) -> Result<Vec<CVector>> {
    let mut out: Vec<CVector> = Vec::with_capacity(pool.len());
    while !pool.is_empty() {
        // The sum of two isotropic vectors is usually not isotropic.
        if pool.len() > 1 {
            let best = best_pivot(&pool);
            if bilinear(&pool[best], &pool[best]).norm() < 0.1 {
                let extra = &pool[0] + &pool[1];
                pool[0] = extra;
            }
        }
        let best = best_pivot(&pool);
        let v = pool.swap_remove(best);
        let norm2 = bilinear(&v, &v);
        if norm2.norm() < EPS_EXCEPTIONAL * v.norm_squared() {
            return Err(Error::ExceptionalPoint {
                index: first_index + out.len(),
                norm: norm2.norm() / v.norm_squared(),
            });
        }
        let u = &v / norm2.sqrt();
        for w in pool.iter_mut() {
            let proj = bilinear(&u, w);
            *w -= &u * proj;
            let len = w.norm();
            if len > 0.0 {
                *w /= C64::from(len);
            }
        }
        out.push(u);
    }
    Ok(out)
}

fn best_pivot(pool: &[CVector]) -> usize {
    pool.iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            let na = bilinear(a, a).norm() / a.norm_squared();
            let nb = bilinear(b, b).norm() / b.norm_squared();
            na.total_cmp(&nb)
        })
        .map(|(i, _)| i)
        .unwrap()
}

/// `(omega I - matrix)^{-1}`, or `None` when numerically singular.
pub fn resolvent(matrix: &CMatrix, omega: C64) -> Option<CMatrix> {
    let n = matrix.nrows();
    (CMatrix::identity(n, n) * omega - matrix).try_inverse()
}
