//! Central finite differences and small symmetric eigenvalue helpers used by
//! the verification checks.

use nalgebra::SymmetricEigen;

use crate::{Matrix, Vector};

/// Relative step for first derivatives: `h_k = 1e-5 · max(1, |x_k|)`.
pub const GRADIENT_STEP: f64 = 1e-5;
/// Relative step for second derivatives. Round-off in a second difference
/// scales like `ε·|f|/h²`, so this sits near `ε^{1/4}` instead of `ε^{1/3}`.
pub const HESSIAN_STEP: f64 = 1e-4;

fn step(x: f64, rel: f64) -> f64 {
    rel * x.abs().max(1.0)
}

pub fn central_gradient<F>(f: F, x: &Vector, rel_step: f64) -> Vector
where
    F: Fn(&Vector) -> f64,
{
    let mut grad = Vector::zeros(x.len());
    let mut probe = x.clone();
    for k in 0..x.len() {
        let h = step(x[k], rel_step);
        probe[k] = x[k] + h;
        let up = f(&probe);
        probe[k] = x[k] - h;
        let dn = f(&probe);
        probe[k] = x[k];
        grad[k] = (up - dn) / (2.0 * h);
    }
    grad
}

/// Jacobian of a vector map; column `t` holds `∂f/∂x_t`.
pub fn central_jacobian<F>(f: F, x: &Vector, rel_step: f64) -> Matrix
where
    F: Fn(&Vector) -> Vector,
{
    let n = x.len();
    let mut probe = x.clone();
    let mut columns = Vec::with_capacity(n);
    for t in 0..n {
        let h = step(x[t], rel_step);
        probe[t] = x[t] + h;
        let up = f(&probe);
        probe[t] = x[t] - h;
        let dn = f(&probe);
        probe[t] = x[t];
        columns.push((up - dn) / (2.0 * h));
    }
    Matrix::from_columns(&columns)
}

pub fn central_hessian<F>(f: F, x: &Vector, rel_step: f64) -> Matrix
where
    F: Fn(&Vector) -> f64,
{
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|&xi| step(xi, rel_step)).collect();
    let mut hess = Matrix::zeros(n, n);
    let mut probe = x.clone();
    let eval = |probe: &mut Vector, i: usize, si: f64, j: usize, sj: f64| {
        probe[i] += si * h[i];
        probe[j] += sj * h[j];
        let v = f(probe);
        probe[i] = x[i];
        probe[j] = x[j];
        v
    };
    for i in 0..n {
        for j in i..n {
            let value = if i == j {
                let center = f(x);
                probe[i] = x[i] + h[i];
                let up = f(&probe);
                probe[i] = x[i] - h[i];
                let dn = f(&probe);
                probe[i] = x[i];
                (up - 2.0 * center + dn) / (h[i] * h[i])
            } else {
                let pp = eval(&mut probe, i, 1.0, j, 1.0);
                let pm = eval(&mut probe, i, 1.0, j, -1.0);
                let mp = eval(&mut probe, i, -1.0, j, 1.0);
                let mm = eval(&mut probe, i, -1.0, j, -1.0);
                (pp - pm - mp + mm) / (4.0 * h[i] * h[j])
            };
            hess[(i, j)] = value;
            hess[(j, i)] = value;
        }
    }
    hess
}

/// Eigenvalues of the symmetric part `(A + Aᵀ)/2`, ascending.
pub fn symmetric_part_eigenvalues(a: &Matrix) -> Vec<f64> {
    let sym = (a + a.transpose()) * 0.5;
    let mut values: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(|x, y| x.total_cmp(y));
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gradient_and_hessian_of_quadratic() {
        let q = Matrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let f = |x: &Vector| 0.5 * x.dot(&(&q * x)) + x[0];
        let x = Vector::from_column_slice(&[0.7, -1.2]);
        let g = central_gradient(f, &x, GRADIENT_STEP);
        assert_relative_eq!(
            g,
            &q * &x + Vector::from_column_slice(&[1.0, 0.0]),
            epsilon = 1e-9
        );
        let h = central_hessian(f, &x, HESSIAN_STEP);
        assert_relative_eq!(h, q, epsilon = 1e-6);
    }

    #[test]
    fn jacobian_of_linear_map() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 4.0]);
        let x = Vector::from_column_slice(&[5.0, 6.0]);
        let j = central_jacobian(|y| &a * y, &x, GRADIENT_STEP);
        assert_relative_eq!(j, a, epsilon = 1e-8);
    }

    #[test]
    fn symmetric_part_spectrum() {
        let a = Matrix::from_row_slice(2, 2, &[-2.0, 1.0, -1.0, -3.0]);
        let ev = symmetric_part_eigenvalues(&a);
        assert_relative_eq!(ev[0], -3.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1], -2.0, epsilon = 1e-12);
    }
}
