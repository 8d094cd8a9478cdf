//! Closed-form reference solutions for squared-loss ridge regression.
//!
//! Used as the independent yardstick for solver stopping and testing: the
//! primal optimum solves the normal equations `(XX^⊤ + λn I) w = X y`, and
//! the dual optimum follows from `α_j* = −φ_j'(⟨X_{:j}, w*⟩) = y_j − z_j*`.
//! Dense linear algebra, intended for desk-scale instances only.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::DualIndexedSparseMatrix;
use crate::solver::residuals;

/// Solves `(XX^⊤ + λn I) w = X y` for the ridge optimum `w*`.
pub fn ridge_primal_solution(x: &DualIndexedSparseMatrix, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let (d, n) = (x.d(), x.n());
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let mut gram = DMatrix::<f64>::zeros(d, d);
    // XX^T accumulated column by column
    for j in 0..n {
        let col = x.col(j);
        for &(i1, v1) in col {
            for &(i2, v2) in col {
                gram[(i1, i2)] += v1 * v2;
            }
        }
    }
    let ln = lambda * n as f64;
    for i in 0..d {
        gram[(i, i)] += ln;
    }
    let mut rhs = DVector::<f64>::zeros(d);
    for (j, &yj) in y.iter().enumerate() {
        for &(i, v) in x.col(j) {
            rhs[i] += v * yj;
        }
    }
    let sol = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::BoundViolated("singular ridge system".into()))?;
    Ok(sol.iter().copied().collect())
}

/// The dual optimum `α* = y − X^⊤ w*` matching a primal ridge optimum.
pub fn ridge_dual_solution(x: &DualIndexedSparseMatrix, y: &[f64], w_star: &[f64]) -> Vec<f64> {
    let z = residuals(x, w_star);
    y.iter().zip(z).map(|(&yj, zj)| yj - zj).collect()
}
