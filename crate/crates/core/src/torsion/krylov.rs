//! Jacobi-preconditioned Krylov solvers over a matrix-free operator.
//!
//! Reductions are chunked in a fixed order, so results do not depend on the
//! number of worker threads.

use rayon::prelude::*;

use crate::error::{LabError, Result};

const CHUNK: usize = 4096;

pub trait LinearOperator: Sync {
    fn len(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Target `‖b - Ax‖ / ‖b‖`.
    pub target: f64,
    /// Residual still accepted when the iteration budget runs out.
    pub fallback: f64,
    pub max_iterations: usize,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect::<Vec<f64>>()
        .into_iter()
        .sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y ← y + α x`
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn residual<A: LinearOperator>(op: &A, b: &[f64], x: &[f64], scratch: &mut [f64]) -> Vec<f64> {
    op.apply(x, scratch);
    b.par_iter().zip(scratch.par_iter()).map(|(bi, ai)| bi - ai).collect()
}

fn finish(x_norm_res: f64, b_norm: f64, iterations: usize, tol: &Tolerances, converged: bool) -> Result<SolveStats> {
    let relative_residual = x_norm_res / b_norm;
    if converged || relative_residual <= tol.fallback {
        Ok(SolveStats {
            iterations,
            relative_residual,
        })
    } else {
        Err(LabError::SolverFailure {
            iterations,
            residual: relative_residual,
        })
    }
}

/// Preconditioned conjugate gradients for symmetric positive definite operators.
///
/// The recurrence residual drifts away from the true one near roundoff, so
/// the iteration restarts from the true residual until both agree.
pub fn conjugate_gradient<A: LinearOperator>(op: &A, b: &[f64], x: &mut [f64], tol: &Tolerances) -> Result<SolveStats> {
    let n = op.len();
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut ap = vec![0.0; n];
    let mut it = 0;
    let mut best = f64::INFINITY;
    loop {
        let mut r = residual(op, b, x, &mut ap);
        let mut res = norm(&r);
        // stop once a restart no longer improves the true residual
        if res <= tol.target * b_norm || res >= 0.5 * best || it >= tol.max_iterations {
            return finish(res, b_norm, it, tol, res <= tol.target * b_norm);
        }
        best = res;
        let mut z: Vec<f64> = r.par_iter().zip(inv_diag.par_iter()).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while it < tol.max_iterations && res > 0.1 * tol.target * b_norm {
            op.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            axpy(alpha, &p, x);
            axpy(-alpha, &ap, &mut r);
            z.par_iter_mut()
                .zip(r.par_iter().zip(inv_diag.par_iter()))
                .for_each(|(zi, (ri, di))| *zi = ri * di);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            p.par_iter_mut().zip(z.par_iter()).for_each(|(pi, zi)| *pi = zi + beta * *pi);
            res = norm(&r);
            it += 1;
        }
    }
}

/// Right-preconditioned BiCGSTAB for nonsymmetric operators, restarted
/// from the true residual on breakdown or recurrence drift.
pub fn bicgstab<A: LinearOperator>(op: &A, b: &[f64], x: &mut [f64], tol: &Tolerances) -> Result<SolveStats> {
    let n = op.len();
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();
    let precond = |v: &[f64]| -> Vec<f64> { v.par_iter().zip(inv_diag.par_iter()).map(|(a, d)| a * d).collect() };
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inner_target = 0.1 * tol.target * b_norm;
    let mut scratch = vec![0.0; n];
    let mut it = 0;
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    loop {
        let mut r = residual(op, b, x, &mut scratch);
        let mut res = norm(&r);
        if res <= tol.target * b_norm || it >= tol.max_iterations {
            return finish(res, b_norm, it, tol, res <= tol.target * b_norm);
        }
        if res >= 0.5 * best {
            stalled += 1;
            if stalled >= 3 {
                return finish(res, b_norm, it, tol, false);
            }
        } else {
            stalled = 0;
        }
        best = best.min(res);
        let r_hat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut t = vec![0.0; n];
        while it < tol.max_iterations && res > inner_target {
            it += 1;
            let rho_next = dot(&r_hat, &r);
            if rho_next.abs() < 1e-300 || omega == 0.0 {
                break;
            }
            let beta = (rho_next / rho) * (alpha / omega);
            rho = rho_next;
            p.par_iter_mut()
                .zip(r.par_iter().zip(v.par_iter()))
                .for_each(|(pi, (ri, vi))| *pi = ri + beta * (*pi - omega * vi));
            let p_hat = precond(&p);
            op.apply(&p_hat, &mut v);
            let denom = dot(&r_hat, &v);
            if denom == 0.0 {
                break;
            }
            alpha = rho / denom;
            axpy(-alpha, &v, &mut r); // r now holds s
            axpy(alpha, &p_hat, x);
            res = norm(&r);
            if res <= inner_target {
                break;
            }
            let s_hat = precond(&r);
            op.apply(&s_hat, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &r) / tt } else { 0.0 };
            axpy(omega, &s_hat, x);
            axpy(-omega, &t, &mut r);
            res = norm(&r);
        }
    }
}
