//! Torsion function `-Δu = 1`, `u = 0 on ∂Ω` on a Cartesian grid with
//! Shortley–Weller boundary stencils, plus closed-form oracles and Hessian
//! analysis at the maximum.

mod hessian;
pub mod krylov;
mod makar;
mod oracle;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{ConvexDomain, Point};
use krylov::{bicgstab, conjugate_gradient, LinearOperator, SolveStats, Tolerances};

pub use hessian::{
    analyze, fit_log_slope, Analysis, hessian_at_max, locate_max, prop1_check, prop1_from_lambda, richardson_hessian,
    theorem1_check, HessianReport, LogFit, Prop1Verdict, Theorem1Verdict,
};
pub use makar::{makar_limanov, makar_limanov_report, MakarLimanovReport};
pub use oracle::{
    ellipse_hessian_exact, ellipse_torsion_exact, rect_dxx_center, rect_torsion_exact, rect_torsion_series,
    RectCenterCurvature,
};

pub const MIN_INTERIOR_NODES: usize = 100;
pub const MAX_NODES: usize = 40_000_000;
pub const SOLVER_TOLERANCE: f64 = 1e-12;
pub const SOLVER_FALLBACK: f64 = 1e-10;
/// Iteration budget per grid side.
pub const ITERATIONS_PER_SIDE: usize = 20;

/// Arms shorter than this are clamped to keep the stencil finite.
const MIN_ARM: f64 = 1e-12;

/// Neighbor order used for arms: east, west, north, south.
const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Exterior,
    Interior,
    /// At least one neighbor is outside or on the boundary. Arms are the
    /// fractions of `h` to the boundary, east/west/north/south; 1 where the
    /// neighbor is an unknown.
    NearBoundary { arms: [f64; 4] },
}

impl NodeKind {
    pub fn is_unknown(self) -> bool {
        !matches!(self, NodeKind::Exterior)
    }

    fn code(self) -> u8 {
        match self {
            NodeKind::Exterior => 0,
            NodeKind::Interior => 1,
            NodeKind::NearBoundary { .. } => 2,
        }
    }
}

/// Scalar field on the nodes `origin + (i h, j h)`, `0 ≤ i < nx`, `0 ≤ j < ny`.
#[derive(Clone, Debug)]
pub struct GridField {
    h: f64,
    origin: Point,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    kinds: Vec<NodeKind>,
    /// Signed distance to the boundary, positive inside.
    distance: Vec<f64>,
    stats: Option<SolveStats>,
}

impl GridField {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(self.origin.x + i as f64 * self.h, self.origin.y + j as f64 * self.h)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    pub fn kind(&self, i: usize, j: usize) -> NodeKind {
        self.kinds[self.index(i, j)]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance[self.index(i, j)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn solve_stats(&self) -> Option<SolveStats> {
        self.stats
    }

    pub fn interior_count(&self) -> usize {
        self.kinds.iter().filter(|k| k.is_unknown()).count()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Grid indices of the node at `p`, if `p` lies exactly on the grid.
    pub fn node_at(&self, p: Point) -> Option<(usize, usize)> {
        let fi = (p.x - self.origin.x) / self.h;
        let fj = (p.y - self.origin.y) / self.h;
        let (i, j) = (fi.round(), fj.round());
        let on_grid = (fi - i).abs() < 1e-9 && (fj - j).abs() < 1e-9;
        (on_grid && i >= 0.0 && j >= 0.0 && (i as usize) < self.nx && (j as usize) < self.ny)
            .then(|| (i as usize, j as usize))
    }

    /// Whether all nodes in the `(2r+1)²` block around `(i, j)` are unknowns.
    pub fn block_is_interior(&self, i: usize, j: usize, r: usize) -> bool {
        if i < r || j < r || i + r >= self.nx || j + r >= self.ny {
            return false;
        }
        (j - r..=j + r).all(|jj| (i - r..=i + r).all(|ii| self.kind(ii, jj).is_unknown()))
    }

    /// Bilinear interpolation; the containing cell must lie in the grid.
    pub fn interpolate(&self, p: Point) -> Result<f64> {
        let fx = (p.x - self.origin.x) / self.h;
        let fy = (p.y - self.origin.y) / self.h;
        if fx < 0.0 || fy < 0.0 || fx > (self.nx - 1) as f64 || fy > (self.ny - 1) as f64 {
            return Err(LabError::Domain(format!("point ({}, {}) is off the grid", p.x, p.y)));
        }
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (s, t) = (fx - i as f64, fy - j as f64);
        Ok((1.0 - s) * (1.0 - t) * self.value(i, j)
            + s * (1.0 - t) * self.value(i + 1, j)
            + (1.0 - s) * t * self.value(i, j + 1)
            + s * t * self.value(i + 1, j + 1))
    }

    /// Same geometry with new values and mask.
    pub(crate) fn with_values(&self, values: Vec<f64>, kinds: Vec<NodeKind>) -> GridField {
        GridField {
            h: self.h,
            origin: self.origin,
            nx: self.nx,
            ny: self.ny,
            values,
            kinds,
            distance: self.distance.clone(),
            stats: None,
        }
    }

    /// CSV with columns `x, y, value, mask` (mask: 0 exterior, 1 interior,
    /// 2 near boundary).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "x,y,value,mask")?;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.node(i, j);
                let k = self.index(i, j);
                writeln!(w, "{:.17e},{:.17e},{:.17e},{}", p.x, p.y, self.values[k], self.kinds[k].code())?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortley–Weller operator scaled by `h²`, over unknown nodes only.
struct SwOperator {
    diag: Vec<f64>,
    nbr: Vec<[u32; 4]>,
    coef: Vec<[f64; 4]>,
}

const NONE: u32 = u32::MAX;

impl SwOperator {
    fn is_symmetric(&self) -> bool {
        const OPP: [usize; 4] = [1, 0, 3, 2];
        self.nbr.par_iter().enumerate().all(|(i, nb)| {
            (0..4).all(|d| {
                nb[d] == NONE || {
                    let back = self.coef[nb[d] as usize][OPP[d]];
                    (back - self.coef[i][d]).abs() <= 1e-14 * self.coef[i][d].abs()
                }
            })
        })
    }
}

impl LinearOperator for SwOperator {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut v = self.diag[i] * x[i];
            let (nb, c) = (&self.nbr[i], &self.coef[i]);
            for d in 0..4 {
                if nb[d] != NONE {
                    v -= c[d] * x[nb[d] as usize];
                }
            }
            *yi = v;
        });
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diag.clone()
    }
}

/// Three-point second difference weights for arms `p` (forward) and `m`
/// (backward), in units of `1/h²`: `(forward, backward, center)`.
fn sw_weights(p: f64, m: f64) -> (f64, f64, f64) {
    (2.0 / (p * (p + m)), 2.0 / (m * (p + m)), 2.0 / (p * m))
}

/// Solve `-Δu = 1` on `d` with spacing `h`.
///
/// Nodes sit at integer multiples of `h`, so the origin is always a node and
/// grids at `h` and `h/2` nest.
pub fn solve_torsion(d: &ConvexDomain, h: f64) -> Result<GridField> {
    d.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(LabError::Resolution(format!("grid spacing must be positive, got {h}")));
    }
    let (lo, hi) = d.bounding_box();
    let i0 = (lo.x / h).floor() as i64 - 1;
    let j0 = (lo.y / h).floor() as i64 - 1;
    let nx = ((hi.x / h).ceil() as i64 + 2 - i0) as usize;
    let ny = ((hi.y / h).ceil() as i64 + 2 - j0) as usize;
    if nx.saturating_mul(ny) > MAX_NODES {
        return Err(LabError::Resolution(format!("{nx}x{ny} grid exceeds the node cap of {MAX_NODES}")));
    }
    let origin = Point::new(i0 as f64 * h, j0 as f64 * h);
    let node = |i: usize, j: usize| Point::new(origin.x + i as f64 * h, origin.y + j as f64 * h);

    let inside: Vec<bool> = (0..nx * ny)
        .into_par_iter()
        .map(|k| d.level(node(k % nx, k / nx)) > 0.0)
        .collect();
    let kinds: Vec<NodeKind> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            if !inside[k] {
                return NodeKind::Exterior;
            }
            let (i, j) = (k % nx, k / nx);
            let p = node(i, j);
            let mut arms = [1.0; 4];
            let mut near = false;
            for (a, (di, dj)) in arms.iter_mut().zip(DIRS) {
                let (ni, nj) = ((i as i64 + di) as usize, (j as i64 + dj) as usize);
                if !inside[nj * nx + ni] {
                    near = true;
                    *a = d.crossing(p, node(ni, nj)).max(MIN_ARM);
                }
            }
            if near {
                NodeKind::NearBoundary { arms }
            } else {
                NodeKind::Interior
            }
        })
        .collect();

    let mut unknown = vec![NONE; nx * ny];
    let mut count = 0u32;
    for (k, kind) in kinds.iter().enumerate() {
        if kind.is_unknown() {
            unknown[k] = count;
            count += 1;
        }
    }
    let count = count as usize;
    if count < MIN_INTERIOR_NODES {
        return Err(LabError::Resolution(format!(
            "only {count} interior nodes at h = {h}; need at least {MIN_INTERIOR_NODES}"
        )));
    }

    let cells: Vec<usize> = (0..nx * ny).filter(|&k| unknown[k] != NONE).collect();
    let (nbr, coef): (Vec<[u32; 4]>, Vec<[f64; 4]>) = cells
        .par_iter()
        .map(|&k| {
            let arms = match kinds[k] {
                NodeKind::NearBoundary { arms } => arms,
                _ => [1.0; 4],
            };
            let (e, w, _) = sw_weights(arms[0], arms[1]);
            let (n, s, _) = sw_weights(arms[2], arms[3]);
            let weights = [e, w, n, s];
            let (i, j) = ((k % nx) as i64, (k / nx) as i64);
            let mut nb = [NONE; 4];
            let mut c = [0.0; 4];
            for dir in 0..4 {
                let (di, dj) = DIRS[dir];
                let q = ((j + dj) as usize) * nx + (i + di) as usize;
                if arms[dir] == 1.0 && unknown[q] != NONE {
                    nb[dir] = unknown[q];
                    c[dir] = weights[dir];
                }
            }
            (nb, c)
        })
        .unzip();
    let diag: Vec<f64> = cells
        .par_iter()
        .map(|&k| {
            let arms = match kinds[k] {
                NodeKind::NearBoundary { arms } => arms,
                _ => [1.0; 4],
            };
            sw_weights(arms[0], arms[1]).2 + sw_weights(arms[2], arms[3]).2
        })
        .collect();
    let op = SwOperator { diag, nbr, coef };
    let rhs = vec![h * h; count];
    let mut x = vec![0.0; count];
    let tol = Tolerances {
        target: SOLVER_TOLERANCE,
        fallback: SOLVER_FALLBACK,
        max_iterations: ITERATIONS_PER_SIDE * nx.max(ny),
    };
    let stats = if op.is_symmetric() {
        conjugate_gradient(&op, &rhs, &mut x, &tol)?
    } else {
        bicgstab(&op, &rhs, &mut x, &tol)?
    };

    let mut values = vec![0.0; nx * ny];
    for (&k, v) in cells.iter().zip(&x) {
        values[k] = *v;
    }
    let distance: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .map(|k| d.signed_distance(node(k % nx, k / nx)))
        .collect();
    Ok(GridField {
        h,
        origin,
        nx,
        ny,
        values,
        kinds,
        distance,
        stats: Some(stats),
    })
}

/// Default spacing: the short semi-axis over 128.
pub fn default_spacing(d: &ConvexDomain) -> f64 {
    let (lo, hi) = d.bounding_box();
    0.5 * (hi.x - lo.x).min(hi.y - lo.y) / 128.0
}
