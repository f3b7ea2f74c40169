//! Matrix helpers: Gauss-Jordan inversion over jets, and f64 inversion,
//! conditioning and Cholesky through nalgebra.

use nalgebra::DMatrix;

use crate::error::{GeometryError, Result};
use crate::jets::Jet;
use crate::tensor::Tensor;

/// Inverts a square jet matrix with partial pivoting on the values.
pub fn invert_jets(m: &Tensor<Jet>, point: &[f64]) -> Result<Tensor<Jet>> {
    let n = m.shape()[0];
    let scale = m.iter().fold(0.0f64, |acc, j| acc.max(j.value().abs()));
    let mut a: Vec<Vec<Jet>> = (0..n).map(|i| (0..n).map(|j| m[[i, j]].clone()).collect()).collect();
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))
            .unwrap();
        let pivot = a[pivot_row][col].value();
        if !(pivot.abs() > 1e-13 * scale.max(f64::MIN_POSITIVE)) {
            return Err(GeometryError::DegenerateMetric {
                point: point.to_vec(),
                pivot,
            });
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let r = a[col][col].recip();
        for j in 0..n {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            if factor.is_constant() && factor.value() == 0.0 {
                continue;
            }
            for j in 0..n {
                let t = &factor * &a[col][j];
                a[row][j] -= t;
                let t = &factor * &inv[col][j];
                inv[row][j] -= t;
            }
        }
    }
    Ok(Tensor::from_fn(&[n, n], |i| inv[i[0]][i[1]].clone()))
}

fn to_dmatrix(m: &Tensor<f64>) -> DMatrix<f64> {
    let n = m.shape()[0];
    DMatrix::from_fn(n, n, |i, j| m[[i, j]])
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &Tensor<f64>) -> f64 {
    let sv = to_dmatrix(m).singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a square matrix, refusing condition numbers above `max_condition`.
pub fn invert(m: &Tensor<f64>, max_condition: f64) -> Result<Tensor<f64>> {
    let condition = condition_number(m);
    if !(condition <= max_condition) {
        return Err(GeometryError::IllConditioned { condition });
    }
    let inv = to_dmatrix(m)
        .try_inverse()
        .ok_or(GeometryError::IllConditioned { condition })?;
    let n = m.shape()[0];
    Ok(Tensor::from_fn(&[n, n], |i| inv[(i[0], i[1])]))
}

pub fn is_positive_definite(m: &Tensor<f64>) -> bool {
    to_dmatrix(m).cholesky().is_some()
}

pub fn matmul(a: &Tensor<f64>, b: &Tensor<f64>) -> Tensor<f64> {
    let (n, k, m) = (a.shape()[0], a.shape()[1], b.shape()[1]);
    assert_eq!(k, b.shape()[0]);
    Tensor::from_fn(&[n, m], |i| (0..k).map(|t| a[[i[0], t]] * b[[t, i[1]]]).sum())
}

pub fn identity(n: usize) -> Tensor<f64> {
    Tensor::from_fn(&[n, n], |i| if i[0] == i[1] { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_inverse_matches_closed_form_2x2() {
        let x = Jet::variable(1, 0, 0.5, 2);
        let m = Tensor::from_fn(&[2, 2], |i| match (i[0], i[1]) {
            (0, 0) => &x + 2.0,
            (1, 1) => Jet::constant(1.0),
            _ => &x * 0.5,
        });
        let inv = invert_jets(&m, &[0.5]).unwrap();
        // det = (x+2) - x^2/4
        let det = |t: f64| (t + 2.0) - t * t / 4.0;
        let h = 1e-6;
        let inv00 = |t: f64| 1.0 / det(t);
        let fd = (inv00(0.5 + h) - inv00(0.5 - h)) / (2.0 * h);
        assert!((inv[[0, 0]].value() - inv00(0.5)).abs() < 1e-14);
        assert!((inv[[0, 0]].partial(&[0]) - fd).abs() < 1e-8);
    }

    #[test]
    fn singular_jet_matrix_is_degenerate() {
        let m = Tensor::from_fn(&[2, 2], |_| Jet::constant(1.0));
        assert!(matches!(
            invert_jets(&m, &[0.0]),
            Err(GeometryError::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn f64_inverse_and_conditioning() {
        let m = Tensor::from_fn(&[2, 2], |i| if i[0] == i[1] { 4.0 } else { 1.0 });
        let inv = invert(&m, 1e12).unwrap();
        assert!(matmul(&m, &inv).max_abs_diff(&identity(2)) < 1e-15);
        let bad = Tensor::from_fn(&[2, 2], |i| if i == [1, 1] { 1e-14 } else if i[0] == i[1] { 1.0 } else { 0.0 });
        assert!(matches!(invert(&bad, 1e12), Err(GeometryError::IllConditioned { .. })));
        assert!(is_positive_definite(&m));
        assert!(!is_positive_definite(&Tensor::from_fn(&[2, 2], |i| if i[0] == i[1] { -1.0 } else { 0.0 })));
    }
}
