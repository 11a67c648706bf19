//! Small dense helpers shared by `scalar` and `hyper`.

use crate::error::{FinslerError, Result};
use nalgebra::DMatrix;

/// Eigenvalues of `G⁻¹H` for symmetric `H` and positive-definite `G`,
/// ascending, together with the `G`-orthonormal eigenvectors as columns.
pub fn generalized_symmetric_eigen(h: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = g.clone().cholesky().ok_or_else(|| FinslerError::Singular {
        what: "induced metric".to_string(),
    })?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| FinslerError::Singular {
            what: "induced metric".to_string(),
        })?;
    let hs = &l_inv * h * l_inv.transpose();
    let hs = (&hs + hs.transpose()) * 0.5;
    let eig = hs.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, l_inv.transpose() * vecs))
}

/// Eigenvalues of a general square matrix as `(re, im)` pairs.
pub fn complex_eigenvalues(a: &DMatrix<f64>) -> Vec<(f64, f64)> {
    a.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
}

/// Euclidean-orthonormal basis of the complement of `v` (columns).
pub fn complement_basis(v: &[f64]) -> DMatrix<f64> {
    let n = v.len();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let u: Vec<f64> = v.iter().map(|a| a / norm).collect();
    let skip = (0..n).max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs())).unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for k in (0..n).filter(|&k| k != skip) {
        let mut w = vec![0.0; n];
        w[k] = 1.0;
        for b in std::iter::once(&u).chain(basis.iter()) {
            let p: f64 = w.iter().zip(b).map(|(a, c)| a * c).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= p * bi;
            }
        }
        let nw = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        basis.push(w.into_iter().map(|a| a / nw).collect());
    }
    DMatrix::from_fn(n, n - 1, |r, c| basis[c][r])
}

/// Groups sorted values into clusters separated by more than `gap`;
/// returns the multiplicity of each cluster.
pub fn multiplicities(sorted: &[f64], gap: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut count = 0;
    for (i, v) in sorted.iter().enumerate() {
        if i > 0 && v - sorted[i - 1] > gap {
            out.push(count);
            count = 0;
        }
        count += 1;
    }
    if count > 0 {
        out.push(count);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_eigen_of_scaled_identity() {
        let g = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let h = DMatrix::from_row_slice(2, 2, &[8.0, 0.0, 0.0, -1.0]);
        let (vals, vecs) = generalized_symmetric_eigen(&h, &g).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 2.0).abs() < 1e-14);
        let gram = vecs.transpose() * &g * &vecs;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn complement_is_orthonormal() {
        let v = [0.3, -1.0, 0.2];
        let b = complement_basis(&v);
        let vv = nalgebra::DVector::from_column_slice(&v);
        assert!((b.transpose() * vv).amax() < 1e-15);
        assert!((b.transpose() * &b - DMatrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn clusters_by_gap() {
        assert_eq!(multiplicities(&[-1.0, -1.0 + 1e-7, 1.0], 1e-5), vec![2, 1]);
    }
}
