//! Jacobi-preconditioned conjugate residual iteration for symmetric positive
//! definite systems.

use super::sparse::Csr;
use crate::error::{Result, VflError};

#[derive(Debug, Clone)]
pub struct SolveStats {
    pub iterations: usize,
    /// Preconditioned residual norm `sqrt(r · P⁻¹ r)` per iteration, starting
    /// with the initial guess. Non-increasing in exact arithmetic.
    pub history: Vec<f64>,
    /// Final `‖b − A x‖ / ‖b‖`.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` starting from `x`, to `‖b − Ax‖ ≤ tol ‖b‖`.
pub fn conjugate_residual(a: &Csr, b: &[f64], x: &mut [f64], tol: f64) -> Result<SolveStats> {
    let n = a.n;
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats { iterations: 0, history: vec![0.0], relative_residual: 0.0 });
    }
    let pinv: Vec<f64> = a.diagonal().iter().map(|&d| 1.0 / d).collect();
    let mut r = a.mul(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&pinv).map(|(r, p)| r * p).collect();
    let mut az = a.mul(&z);
    let mut p = z.clone();
    let mut ap = az.clone();
    let mut q = vec![0.0; n];
    let mut rho = dot(&z, &az);
    let mut history = vec![dot(&r, &z).sqrt()];
    let max_iter = 10 * n + 100;
    let mut it = 0;
    while norm(&r) > tol * bnorm {
        if it == max_iter || !(rho > 0.0) {
            return Err(VflError::SolverDivergence { residual: norm(&r) / bnorm, iterations: it });
        }
        for i in 0..n {
            q[i] = pinv[i] * ap[i];
        }
        let alpha = rho / dot(&ap, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] -= alpha * q[i];
        }
        a.mul_into(&z, &mut az);
        let rho_new = dot(&z, &az);
        let beta = rho_new / rho;
        rho = rho_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
            ap[i] = az[i] + beta * ap[i];
        }
        history.push(dot(&r, &z).sqrt());
        it += 1;
    }
    // guard against drift of the recurrence
    let ax = a.mul(x);
    let true_res = ax.iter().zip(b).map(|(ax, b)| (b - ax) * (b - ax)).sum::<f64>().sqrt() / bnorm;
    if !(true_res <= 10.0 * tol) {
        return Err(VflError::SolverDivergence { residual: true_res, iterations: it });
    }
    Ok(SolveStats { iterations: it, history, relative_residual: true_res })
}
