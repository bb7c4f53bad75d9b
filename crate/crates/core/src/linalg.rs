//! Small dense helpers (n <= 3 in practice).

use nalgebra::{DMatrix, DVector};

use crate::error::{FinslerError, Result};

/// Cholesky-style SPD test: every pivot of the factorization must exceed `tol`
/// (scaled by the largest diagonal entry). Pivots are ratios of consecutive
/// leading minors, so this is leading-minor positivity.
pub fn is_spd(m: &DMatrix<f64>, tol: f64) -> bool {
    let n = m.nrows();
    if n != m.ncols() {
        return false;
    }
    if !m.iter().all(|v| v.is_finite()) {
        return false;
    }
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(1.0_f64, f64::max);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= tol * scale {
            return false;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = 0.5 * (m[(i, j)] + m[(j, i)]);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    true
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue and its eigenvector.
pub fn min_eigen(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = symmetrize(m).symmetric_eigen();
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    (val, eig.eigenvectors.column(idx).into_owned())
}

pub fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let det = m.determinant();
    let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(m.nrows() as i32) {
        return Err(FinslerError::Singular(format!("determinant {det:e}")));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| FinslerError::Singular("inversion failed".into()))
}

/// Principal square root of a symmetric positive definite matrix.
pub fn spd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spd_power(m, 0.5)
}

pub fn spd_inv_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    spd_power(m, -0.5)
}

fn spd_power(m: &DMatrix<f64>, p: f64) -> Result<DMatrix<f64>> {
    let eig = symmetrize(m).symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
        return Err(FinslerError::Precondition("matrix is not positive definite".into()));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.powf(p)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Orthogonal map sending `w` to `|w| e1` (identity when `w` is already
/// on the positive first axis or is zero). In 2D this is a rotation, in
/// higher dimensions a Householder reflection.
pub fn align_to_first_axis(w: &DVector<f64>) -> DMatrix<f64> {
    let n = w.len();
    let norm = w.norm();
    if norm == 0.0 {
        return DMatrix::identity(n, n);
    }
    if n == 2 {
        let (c, s) = (w[0] / norm, w[1] / norm);
        return DMatrix::from_row_slice(2, 2, &[c, s, -s, c]);
    }
    let mut u = w.clone();
    u[0] -= norm;
    let un = u.norm();
    if un <= 1e-15 * norm {
        return DMatrix::identity(n, n);
    }
    u /= un;
    DMatrix::identity(n, n) - (&u * u.transpose()) * 2.0
}

pub fn quad_form(m: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    (y.transpose() * m * y)[(0, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_detection() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!(is_spd(&a, 1e-10));
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(!is_spd(&b, 1e-10));
        let c = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!(!is_spd(&c, 1e-10));
    }

    #[test]
    fn sqrt_squares_back() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let s = spd_sqrt(&a).unwrap();
        assert!((&s * &s - &a).norm() < 1e-12);
        let si = spd_inv_sqrt(&a).unwrap();
        assert!((&si * &s - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn alignment_hits_first_axis() {
        for w in [vec![0.0, 3.0], vec![-1.0, -2.0], vec![1.0, 2.0, -2.0]] {
            let w = DVector::from_vec(w);
            let r = align_to_first_axis(&w);
            let out = &r * &w;
            assert!((out[0] - w.norm()).abs() < 1e-12);
            assert!(out.rows(1, w.len() - 1).norm() < 1e-12);
            assert!((r.transpose() * &r - DMatrix::identity(w.len(), w.len())).norm() < 1e-12);
        }
    }
}
