//! Closed-form torsion functions on rectangles and ellipses.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Terms below this are dropped from the rectangle series.
const SERIES_FLOOR: f64 = 1e-18;
const MAX_TERMS: usize = 2_000_000;

/// `cosh(α x) / cosh(α a)` for `|x| ≤ a` without overflow.
fn cosh_ratio(alpha: f64, x: f64, a: f64) -> f64 {
    let x = x.abs();
    (alpha * (x - a)).exp() * (1.0 + (-2.0 * alpha * x).exp()) / (1.0 + (-2.0 * alpha * a).exp())
}

/// Series in the `y` direction: `(b²-y²) - (32b²/π³) Σ_{n odd} ...`.
fn series_y(a: f64, b: f64, x: f64, y: f64, max_terms: usize, floor: f64) -> f64 {
    let pref = 32.0 * b * b / PI.powi(3);
    let mut sum = 0.0;
    let mut n = 1usize;
    for m in 0..max_terms {
        let nf = n as f64;
        let alpha = nf * PI / (2.0 * b);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let envelope = pref * cosh_ratio(alpha, x, a) / nf.powi(3);
        sum += sign * (alpha * y).cos() * envelope;
        if envelope < floor {
            break;
        }
        n += 2;
    }
    b * b - y * y - sum
}

/// Torsion function `v` of `[-a,a]×[-b,b]` (`-Δv = 2`, the convention of
/// the series) halved to match `-Δu = 1`.
///
/// Whichever of the two equivalent expansions decays faster at `(x, y)` is
/// used.
pub fn rect_torsion_exact(a: f64, b: f64, x: f64, y: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(LabError::Domain(format!("rectangle half-sides must be positive, got ({a}, {b})")));
    }
    if x.abs() > a || y.abs() > b {
        return Err(LabError::Domain(format!("({x}, {y}) lies outside [-{a},{a}]x[-{b},{b}]")));
    }
    if x.abs() == a || y.abs() == b {
        return Ok(0.0);
    }
    let rate_y = (a - x.abs()) / b;
    let rate_x = (b - y.abs()) / a;
    let v = if rate_y >= rate_x {
        series_y(a, b, x, y, MAX_TERMS, SERIES_FLOOR)
    } else {
        series_y(b, a, y, x, MAX_TERMS, SERIES_FLOOR)
    };
    Ok(0.5 * v)
}

/// The `y`-direction series of `v` (with `-Δv = 2`) truncated to `terms`
/// odd modes.
pub fn rect_torsion_series(a: f64, b: f64, x: f64, y: f64, terms: usize) -> f64 {
    series_y(a, b, x, y, terms, 0.0)
}

/// Second derivatives of the rectangle torsion function at the center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectCenterCurvature {
    pub dxx: f64,
    pub dyy: f64,
    /// `-(16/π) e^{-(π/2)a/b}`
    pub lower: f64,
    /// `-(4/π) e^{-(π/2)a/b}`
    pub upper: f64,
}

impl RectCenterCurvature {
    pub fn within_bounds(&self) -> bool {
        self.lower <= self.dxx && self.dxx <= self.upper
    }
}

/// `Σ_{n odd} (-1)^{(n-1)/2} / (n cosh(nα))`, stopping once `cosh(nα)`
/// exceeds `1e18·cosh(α)`, which leaves the alternating tail below full
/// relative precision.
fn sech_series(alpha: f64) -> f64 {
    let cutoff = 1e18f64.ln();
    let mut sum = 0.0;
    let mut n = 1usize;
    let mut m = 0usize;
    loop {
        let x = n as f64 * alpha;
        if m > 0 && x - alpha > cutoff {
            break;
        }
        let e = (-x).exp();
        // 1/cosh written so the first term never exceeds 2e^{-α}
        let term = 2.0 * e / (1.0 + e * e) / n as f64;
        sum += if m % 2 == 0 { term } else { -term };
        n += 2;
        m += 1;
    }
    sum
}

/// `∂²u/∂x²(0,0)` on `[-a,a]×[-b,b]` for `-Δu = 1`, with the sandwich
/// `-(16/π)e^{-(π/2)a/b} ≤ u_xx ≤ -(4/π)e^{-(π/2)a/b}`.
///
/// The series carries the factor `4/π`: it is half the second derivative of
/// the `b² - y²` expansion, which solves `-Δv = 2`.
pub fn rect_dxx_center(a: f64, b: f64) -> RectCenterCurvature {
    let k = 4.0 / PI;
    let e = (-0.5 * PI * a / b).exp();
    let dxx = if a >= b {
        -k * sech_series(0.5 * PI * a / b)
    } else {
        // the swapped series converges fast when a < b
        -1.0 + k * sech_series(0.5 * PI * b / a)
    };
    RectCenterCurvature {
        dxx,
        dyy: -1.0 - dxx,
        lower: -4.0 * k * e,
        upper: -k * e,
    }
}

/// Torsion function of the ellipse `x²/a² + y²/b² < 1`.
pub fn ellipse_torsion_exact(a: f64, b: f64, x: f64, y: f64) -> f64 {
    let c = a * a * b * b / (2.0 * (a * a + b * b));
    c * (1.0 - (x / a).powi(2) - (y / b).powi(2))
}

/// Constant Hessian of the ellipse torsion function.
pub fn ellipse_hessian_exact(a: f64, b: f64) -> [[f64; 2]; 2] {
    let s = a * a + b * b;
    [[-b * b / s, 0.0], [0.0, -a * a / s]]
}
