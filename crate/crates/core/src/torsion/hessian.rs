//! Maximum location, Hessian at the maximum, and the spectral-gap checks.

use serde::{Deserialize, Serialize};

use super::{solve_torsion, GridField, NodeKind};
use crate::error::{LabError, Result};
use crate::geometry::{self, ConvexDomain, Point};

type Mat2 = [[f64; 2]; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianReport {
    pub x0: Point,
    pub umax: f64,
    pub hessian: Mat2,
    /// `[λ_max, λ_min]`
    pub eigenvalues: [f64; 2],
    /// `|λ_max + λ_min + 1|`
    pub trace_residual: f64,
    /// `diam / inrad`, when a domain is attached.
    pub aspect: Option<f64>,
    /// `-c₁ exp(-c₂·aspect)` for the constants passed to [`HessianReport::with_bound`].
    pub bound_rhs: Option<f64>,
}

impl HessianReport {
    fn new(x0: Point, umax: f64, hessian: Mat2) -> Self {
        let sym = 0.5 * (hessian[0][1] + hessian[1][0]);
        let hessian = [[hessian[0][0], sym], [sym, hessian[1][1]]];
        let eigenvalues = sym_eigenvalues(&hessian);
        HessianReport {
            x0,
            umax,
            hessian,
            eigenvalues,
            trace_residual: (eigenvalues[0] + eigenvalues[1] + 1.0).abs(),
            aspect: None,
            bound_rhs: None,
        }
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn with_aspect(mut self, aspect: f64) -> Self {
        self.aspect = Some(aspect);
        self
    }

    /// Attach `-c₁ exp(-c₂·aspect)`; needs an aspect.
    pub fn with_bound(mut self, c1: f64, c2: f64) -> Self {
        self.bound_rhs = self.aspect.map(|a| -c1 * (-c2 * a).exp());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn sym_eigenvalues(m: &Mat2) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let r = (0.5 * (m[0][0] - m[1][1])).hypot(m[0][1]);
    [mean + r, mean - r]
}

/// Centered gradient and Hessian at a node whose 3×3 block is interior.
fn node_derivatives(f: &GridField, i: usize, j: usize) -> ([f64; 2], Mat2) {
    let h = f.h();
    let u = |di: i64, dj: i64| f.value((i as i64 + di) as usize, (j as i64 + dj) as usize);
    let c = u(0, 0);
    let g = [(u(1, 0) - u(-1, 0)) / (2.0 * h), (u(0, 1) - u(0, -1)) / (2.0 * h)];
    let uxx = (u(1, 0) - 2.0 * c + u(-1, 0)) / (h * h);
    let uyy = (u(0, 1) - 2.0 * c + u(0, -1)) / (h * h);
    let uxy = (u(1, 1) - u(-1, 1) - u(1, -1) + u(-1, -1)) / (4.0 * h * h);
    (g, [[uxx, uxy], [uxy, uyy]])
}

/// Grid maximum refined by one Newton step of the local quadratic fit.
pub fn locate_max(f: &GridField) -> Result<(Point, f64)> {
    let (nx, ny) = f.shape();
    let mut best: Option<(usize, usize, f64)> = None;
    for j in 0..ny {
        for i in 0..nx {
            if f.kind(i, j).is_unknown() && best.map_or(true, |b| f.value(i, j) > b.2) {
                best = Some((i, j, f.value(i, j)));
            }
        }
    }
    let (i, j, umax) = best.ok_or_else(|| LabError::Resolution("field has no interior nodes".into()))?;
    if matches!(f.kind(i, j), NodeKind::NearBoundary { .. }) || !f.block_is_interior(i, j, 1) {
        return Err(LabError::Resolution(format!(
            "maximum sits next to the boundary at h = {}; refine the grid",
            f.h()
        )));
    }
    let (g, hm) = node_derivatives(f, i, j);
    let det = hm[0][0] * hm[1][1] - hm[0][1] * hm[1][0];
    let p = f.node(i, j);
    if !(hm[0][0] < 0.0 && det > 0.0) {
        return Ok((p, umax));
    }
    let dx = -(hm[1][1] * g[0] - hm[0][1] * g[1]) / det;
    let dy = -(-hm[1][0] * g[0] + hm[0][0] * g[1]) / det;
    if dx.abs() > f.h() || dy.abs() > f.h() {
        return Ok((p, umax));
    }
    let value = umax
        + g[0] * dx
        + g[1] * dy
        + 0.5 * (hm[0][0] * dx * dx + 2.0 * hm[0][1] * dx * dy + hm[1][1] * dy * dy);
    Ok((Point::new(p.x + dx, p.y + dy), value))
}

/// Centered-difference Hessian at `x0`, bilinearly blended from the four
/// surrounding nodes.
pub fn hessian_at_max(f: &GridField, x0: Point) -> Result<HessianReport> {
    let h = f.h();
    let fx = (x0.x - f.origin().x) / h;
    let fy = (x0.y - f.origin().y) / h;
    let leaves = || LabError::Resolution(format!("Hessian stencil at ({}, {}) leaves the interior", x0.x, x0.y));
    if !(fx >= 2.0 && fy >= 2.0) {
        return Err(leaves());
    }
    let (i0, j0) = (fx.floor() as usize, fy.floor() as usize);
    let (s, t) = (fx - i0 as f64, fy - j0 as f64);
    let (ic, jc) = (fx.round() as usize, fy.round() as usize);
    if !f.block_is_interior(ic, jc, 2) {
        return Err(leaves());
    }
    let mut hm = [[0.0; 2]; 2];
    for (di, dj, w) in [
        (0, 0, (1.0 - s) * (1.0 - t)),
        (1, 0, s * (1.0 - t)),
        (0, 1, (1.0 - s) * t),
        (1, 1, s * t),
    ] {
        if w == 0.0 {
            continue;
        }
        if !f.block_is_interior(i0 + di, j0 + dj, 1) {
            return Err(leaves());
        }
        let (_, hn) = node_derivatives(f, i0 + di, j0 + dj);
        for r in 0..2 {
            for c in 0..2 {
                hm[r][c] += w * hn[r][c];
            }
        }
    }
    Ok(HessianReport::new(x0, f.interpolate(x0)?, hm))
}

/// `(4 H_fine - H_coarse) / 3` at a common point, for grids at `h` and `h/2`.
pub fn richardson_hessian(coarse: &GridField, fine: &GridField, x0: Point) -> Result<HessianReport> {
    let c = hessian_at_max(coarse, x0)?;
    let f = hessian_at_max(fine, x0)?;
    let mut hm = [[0.0; 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            hm[r][k] = (4.0 * f.hessian[r][k] - c.hessian[r][k]) / 3.0;
        }
    }
    Ok(HessianReport::new(x0, f.umax, hm))
}

/// Fields at `h` and `h/2` with the extrapolated Hessian at the maximum.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub coarse: GridField,
    pub fine: GridField,
    pub report: HessianReport,
}

/// Solve at `h` and `h/2`, locate the maximum on the fine grid, and
/// extrapolate the Hessian there.
pub fn analyze(d: &ConvexDomain, h: f64) -> Result<Analysis> {
    let (coarse, fine) = rayon::join(|| solve_torsion(d, h), || solve_torsion(d, 0.5 * h));
    let (coarse, fine) = (coarse?, fine?);
    let (x0, umax) = locate_max(&fine)?;
    let mut report = richardson_hessian(&coarse, &fine, x0)?;
    report.umax = umax;
    let aspect = geometry::report(d)?.aspect;
    Ok(Analysis {
        coarse,
        fine,
        report: report.with_aspect(aspect),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop1Verdict {
    pub lambda_max: f64,
    pub inradius: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    /// `-(1/inrad²)·κ_min/κ_max³`, the bound with unit constant.
    pub bound_core: f64,
    /// `|λ_max|·inrad²·κ_max³/κ_min`
    pub c_hat: f64,
}

pub fn prop1_from_lambda(d: &ConvexDomain, lambda_max: f64) -> Result<Prop1Verdict> {
    let (kappa_min, kappa_max) = geometry::curvature_extremes(d)?;
    if kappa_min <= 0.0 {
        return Err(LabError::UnsupportedKind("curvature bound needs a strictly convex boundary"));
    }
    let inradius = geometry::inradius(d)?.radius;
    let core = kappa_min / (inradius * inradius * kappa_max.powi(3));
    Ok(Prop1Verdict {
        lambda_max,
        inradius,
        kappa_min,
        kappa_max,
        bound_core: -core,
        c_hat: lambda_max.abs() / core,
    })
}

pub fn prop1_check(d: &ConvexDomain, f: &GridField) -> Result<Prop1Verdict> {
    let (x0, _) = locate_max(f)?;
    prop1_from_lambda(d, hessian_at_max(f, x0)?.lambda_max())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Verdict {
    pub diameter: f64,
    pub inradius: f64,
    pub aspect: f64,
    pub lambda_max: f64,
}

pub fn theorem1_check(d: &ConvexDomain, f: &GridField) -> Result<Theorem1Verdict> {
    let (x0, _) = locate_max(f)?;
    let lambda_max = hessian_at_max(f, x0)?.lambda_max();
    let g = geometry::report(d)?;
    Ok(Theorem1Verdict {
        diameter: g.diameter,
        inradius: g.inradius,
        aspect: g.aspect,
        lambda_max,
    })
}

/// Least-squares fit `ln|y| ≈ intercept + slope·x`, read as `|y| ≈ c₁ e^{-c₂ x}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub c1: f64,
    pub c2: f64,
}

pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Result<LogFit> {
    if xs.len() != ys.len() {
        return Err(LabError::Dimension {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 || ys.iter().any(|y| *y == 0.0 || !y.is_finite()) {
        return Err(LabError::UndefinedRatio);
    }
    let n = xs.len() as f64;
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::UndefinedRatio);
    }
    let sxy: f64 = xs.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(LogFit {
        slope,
        intercept,
        c1: intercept.exp(),
        c2: -slope,
    })
}
