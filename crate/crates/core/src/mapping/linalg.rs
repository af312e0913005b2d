use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Matrices up to this size use Laplace expansion, so every adjugate entry is
/// a literal cofactor polynomial in the matrix entries.
const LAPLACE_LIMIT: usize = 7;

fn minor(m: &DMatrix<f64>, row: usize, col: usize) -> DMatrix<f64> {
    m.clone().remove_row(row).remove_column(col)
}

/// Determinant by cofactor expansion along the first row (LU above `LAPLACE_LIMIT`).
pub fn determinant(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(laplace_det(m))
}

fn laplace_det(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    match n {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ if n > LAPLACE_LIMIT => m.clone().lu().determinant(),
        _ => (0..n)
            .filter(|&j| m[(0, j)] != 0.0)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[(0, j)] * laplace_det(&minor(m, 0, j))
            })
            .sum(),
    }
}

/// Transpose of the cofactor matrix, so that `M adj(M) = det(M) I`.
pub fn adjugate(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    if n == 1 {
        return Ok(DMatrix::from_element(1, 1, 1.0));
    }
    let mut adj = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[(j, i)] = sign * laplace_det(&minor(m, i, j));
        }
    }
    Ok(adj)
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Frobenius-norm residual `||M adj(M) - det(M) I||`.
pub fn adjugate_residual(m: &DMatrix<f64>, adj: &DMatrix<f64>, det: f64) -> f64 {
    let n = m.nrows();
    (m * adj - DMatrix::<f64>::identity(n, n) * det).norm()
}
