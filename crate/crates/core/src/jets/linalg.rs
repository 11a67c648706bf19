use super::{Jet, JetError};

/// Solves `mat · x = rhs` with jet entries by Gaussian elimination, pivoting on
/// the value parts.
pub fn solve(mat: &[Vec<Jet>], rhs: &[Jet]) -> Result<Vec<Jet>, JetError> {
    let n = rhs.len();
    let mut a: Vec<Vec<Jet>> = mat.to_vec();
    let mut b: Vec<Jet> = rhs.to_vec();
    let scale = a
        .iter()
        .flat_map(|r| r.iter().map(|j| j.value().abs()))
        .fold(0.0, f64::max);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs()))
            .expect("non-empty column");
        if a[pivot][col].value().abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(JetError::Singular("jet linear solve"));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for row in col + 1..n {
            let factor = &a[row][col] * &inv;
            for k in col..n {
                let t = &factor * &a[col][k];
                a[row][k] = &a[row][k] - &t;
            }
            let t = &factor * &b[col];
            b[row] = &b[row] - &t;
        }
    }
    let mut x: Vec<Jet> = b.clone();
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = &acc - &(&a[row][k] * &x[k]);
        }
        x[row] = &acc / &a[row][row];
    }
    Ok(x)
}

/// Matrix inverse with jet entries.
pub fn inverse(mat: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>, JetError> {
    let n = mat.len();
    let space = mat[0][0].space().clone();
    let mut cols = Vec::with_capacity(n);
    for c in 0..n {
        let e: Vec<Jet> = (0..n)
            .map(|r| Jet::constant(&space, if r == c { 1.0 } else { 0.0 }))
            .collect();
        cols.push(solve(mat, &e)?);
    }
    Ok((0..n).map(|r| (0..n).map(|c| cols[c][r].clone()).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::seed;

    #[test]
    fn inverse_times_matrix_is_identity() {
        let v = seed(&[0.2, 0.7], 3).unwrap();
        let m = vec![
            vec![&v[0] + 2.0, v[1].clone()],
            vec![v[0].sin().unwrap(), &v[1] * &v[1] + 1.0],
        ];
        let inv = inverse(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s = &(&m[i][0] * &inv[0][j]) + &(&m[i][1] * &inv[1][j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s.value() - expect).abs() < 1e-14);
                for c in &s.coeffs()[1..] {
                    assert!(c.abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let v = seed(&[1.0], 1).unwrap();
        let m = vec![vec![v[0].clone(), v[0].clone()], vec![v[0].clone(), v[0].clone()]];
        assert!(inverse(&m).is_err());
    }
}
