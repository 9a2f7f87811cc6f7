//! Harmonic functions on the unit disk given by their boundary values.
//!
//! Mode `k` of the boundary extends to `r^k cos kθ = Re z^k` and
//! `r^k sin kθ = Im z^k`, so every derivative at the origin is a closed-form
//! multiple of a single Fourier coefficient.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::signal::{fourier_coefficients, norms, sign_changes, FourierSeries, PeriodicSignal, DEFAULT_DEAD_BAND};

/// Default relative threshold separating genuine modes from quadrature noise.
pub const DEFAULT_VANISHING_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiskHarmonic {
    boundary: PeriodicSignal,
    series: FourierSeries,
}

impl DiskHarmonic {
    /// Uses every mode the grid resolves (`K = N/2 - 1`).
    pub fn new(boundary: PeriodicSignal) -> Result<Self> {
        let cutoff = boundary.len() / 2 - 1;
        Self::with_cutoff(boundary, cutoff)
    }

    pub fn with_cutoff(boundary: PeriodicSignal, cutoff: usize) -> Result<Self> {
        let series = fourier_coefficients(&boundary, cutoff)?;
        Ok(Self { boundary, series })
    }

    pub fn boundary(&self) -> &PeriodicSignal {
        &self.boundary
    }

    pub fn series(&self) -> &FourierSeries {
        &self.series
    }
}

/// `u(r, θ) = b₀/2π + (1/π) Σ r^k (a_k sin kθ + b_k cos kθ)` for `0 ≤ r < 1`.
pub fn poisson_extend(h: &DiskHarmonic, r: f64, theta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(LabError::Domain(format!("radius {r} outside [0, 1)")));
    }
    let s = &h.series;
    let mut rk = 1.0;
    let mut tail = 0.0;
    for k in 1..=s.cutoff() {
        rk *= r;
        if rk < 1e-18 {
            break;
        }
        let (sn, cs) = (k as f64 * theta).sin_cos();
        tail += rk * (s.sine(k) * sn + s.cosine(k) * cs);
    }
    Ok(s.cosine(0) / (2.0 * PI) + tail / PI)
}

/// `(∂ᵏu/∂xᵏ, ∂ᵏu/∂yᵏ)` at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginDerivative {
    pub order: usize,
    pub dx: f64,
    pub dy: f64,
}

/// Derivatives at the origin for orders `0..=m`; order 0 is the point value.
///
/// `∂ᵏ_x z^k = k!` and `∂ᵏ_y z^k = i^k k!`, while every other mode
/// contributes nothing at the origin.
pub fn origin_derivatives(h: &DiskHarmonic, m: usize) -> Result<Vec<OriginDerivative>> {
    let s = &h.series;
    if m >= s.cutoff() {
        return Err(LabError::InsufficientBand {
            requested: m,
            cutoff: s.cutoff(),
        });
    }
    let center = s.cosine(0) / (2.0 * PI);
    let mut out = vec![OriginDerivative {
        order: 0,
        dx: center,
        dy: center,
    }];
    let mut factorial = 1.0;
    for k in 1..=m {
        factorial *= k as f64;
        let w = factorial / PI;
        let dy = match k % 4 {
            0 => s.cosine(k),
            1 => s.sine(k),
            2 => -s.cosine(k),
            _ => -s.sine(k),
        };
        out.push(OriginDerivative {
            order: k,
            dx: w * s.cosine(k),
            dy: w * dy,
        });
    }
    Ok(out)
}

/// Largest `m` such that `u` and all derivatives up to order `m` vanish at the
/// origin; `-1` when `u(0) ≠ 0`.
pub fn order_of_vanishing(h: &DiskHarmonic, tol: f64) -> Result<i64> {
    let scale = tol * norms(&h.boundary).l2;
    (0..=h.series.cutoff())
        .find(|&k| h.series.mode_magnitude(k) > scale)
        .map(|k| k as i64 - 1)
        .ok_or(LabError::ZeroFunction)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma5Status {
    Pass,
    Fail,
    /// `u(0) ≠ 0`, so there is nothing to bound.
    NonvanishingCenter,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma5Verdict {
    pub order: i64,
    pub sign_changes: usize,
    pub status: Lemma5Status,
}

/// `order + 1 ≤ (boundary sign changes) / 2`.
pub fn lemma5_check(h: &DiskHarmonic) -> Result<Lemma5Verdict> {
    let order = order_of_vanishing(h, DEFAULT_VANISHING_TOL)?;
    let changes = sign_changes(&h.boundary, DEFAULT_DEAD_BAND);
    let status = if order < 0 {
        Lemma5Status::NonvanishingCenter
    } else if (order + 1) as usize <= changes / 2 {
        Lemma5Status::Pass
    } else {
        Lemma5Status::Fail
    };
    Ok(Lemma5Verdict {
        order,
        sign_changes: changes,
        status,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corollary3Ratio {
    pub sign_changes: usize,
    /// `|u(0)| + Σ_{1 ≤ k ≤ n/2} |∂ᵏ_x u(0)| + |∂ᵏ_y u(0)|`
    pub lhs: f64,
    pub l1: f64,
    pub linf: f64,
    pub rhs_core: f64,
    pub ratio: f64,
}

pub fn corollary3_ratio(h: &DiskHarmonic) -> Result<Corollary3Ratio> {
    if h.boundary.is_zero() {
        return Err(LabError::UndefinedRatio);
    }
    let n = sign_changes(&h.boundary, DEFAULT_DEAD_BAND);
    let derivs = origin_derivatives(h, n / 2)?;
    let lhs = derivs[0].dx.abs()
        + derivs[1..]
            .iter()
            .map(|d| d.dx.abs() + d.dy.abs())
            .sum::<f64>();
    let nm = norms(&h.boundary);
    let rhs_core = nm.l1.powi(n as i32 + 1) / nm.linf.powi(n as i32);
    Ok(Corollary3Ratio {
        sign_changes: n,
        lhs,
        l1: nm.l1,
        linf: nm.linf,
        rhs_core,
        ratio: lhs / rhs_core,
    })
}

/// The derivative-side sum rebuilt from Fourier coefficients:
/// `|b₀|/2π + Σ_{1 ≤ k ≤ n/2} (k!/π)(|b_k| + |c_k|)` where `c_k` is `b_k` for
/// even `k` and `a_k` for odd `k`.
///
/// Pure `x`/`y` derivatives of `Im z^k` vanish for even `k`, so `a_k` of even
/// modes never enters the derivative sum.
pub fn dictionary_lhs(coefficients: &FourierSeries, sign_changes: usize) -> f64 {
    let mut total = coefficients.cosine(0).abs() / (2.0 * PI);
    let mut factorial = 1.0;
    for k in 1..=sign_changes / 2 {
        factorial *= k as f64;
        let visible = if k % 2 == 0 {
            coefficients.cosine(k)
        } else {
            coefficients.sine(k)
        };
        total += factorial / PI * (coefficients.cosine(k).abs() + visible.abs());
    }
    total
}

/// Writes `r,theta,value` over a polar grid.
pub fn write_polar_csv<W: Write>(h: &DiskHarmonic, radii: &[f64], angles: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "theta", "value"])?;
    for &r in radii {
        for j in 0..angles {
            let theta = 2.0 * PI * j as f64 / angles as f64;
            let v = poisson_extend(h, r, theta)?;
            w.write_record([format!("{r:.17e}"), format!("{theta:.17e}"), format!("{v:.17e}")])?;
        }
    }
    w.flush()?;
    Ok(())
}
