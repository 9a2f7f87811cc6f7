//! Dense tableau simplex for `max cᵀx` subject to `Ax ≤ b`, `x ≥ 0`, `b ≥ 0`.
//!
//! Sized for a few hundred constraints. Bland's rule keeps degenerate
//! problems from cycling.

use crate::error::{LabError, Result};

const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

pub fn maximize(objective: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = objective.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(LabError::LinearProgram("inconsistent dimensions".into()));
    }
    if b.iter().any(|&v| v < 0.0) {
        return Err(LabError::LinearProgram("origin must be feasible (b ≥ 0)".into()));
    }
    // rows: constraints [A | I | b]; last row: reduced costs [-c | 0 | 0]
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for j in 0..n {
        t[m][j] = -objective[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 50 * (n + m) + 1000;
    for _ in 0..max_iter {
        let Some(col) = (0..n + m).find(|&j| t[m][j] < -PIVOT_EPS) else {
            let mut x = vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = t[i][width - 1];
                }
            }
            return Ok(LpSolution {
                objective: t[m][width - 1],
                x,
            });
        };
        let mut row = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][col] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][col];
                let better = ratio < best - 1e-15
                    || (ratio <= best + 1e-15 && row.map_or(true, |r: usize| basis[i] < basis[r]));
                if better {
                    best = ratio;
                    row = Some(i);
                }
            }
        }
        let Some(row) = row else {
            return Err(LabError::LinearProgram("objective is unbounded".into()));
        };
        let p = t[row][col];
        for v in t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i != row && r[col] != 0.0 {
                let f = r[col];
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        basis[row] = col;
    }
    Err(LabError::LinearProgram("iteration limit reached".into()))
}
