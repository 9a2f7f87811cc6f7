//! Heat flow `e^{tΔ}` on the torus and the Jacobi theta kernel.
//!
//! The flow is applied as the exact multiplier `e^{-k²t}` on mode `k`; there is
//! no time stepping anywhere.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::signal::{self, norms, sign_changes, PeriodicSignal, DEFAULT_DEAD_BAND};

/// Modes with `n²t` above this are dropped from the theta series.
pub const THETA_TAIL_EXPONENT: f64 = 40.0;

/// Constant in the exponent of the decay lower bounds.
pub const DEFAULT_DECAY_CONSTANT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatParams {
    t: f64,
    truncation: usize,
}

impl HeatParams {
    /// Diffusion time `t` with the smallest truncation keeping the theta tail below `e^{-40}`.
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(LabError::Domain(format!("diffusion time must be positive, got {t}")));
        }
        let truncation = (THETA_TAIL_EXPONENT / t).sqrt().ceil() as usize;
        Ok(Self { t, truncation })
    }

    pub fn with_truncation(t: f64, truncation: usize) -> Result<Self> {
        let base = Self::new(t)?;
        if truncation < base.truncation {
            return Err(LabError::Domain(format!(
                "truncation {truncation} below the minimum {} for t = {t}",
                base.truncation
            )));
        }
        Ok(Self { t, truncation })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }
}

/// `θ_t(x) = 1/2π + (1/π) Σ_{n ≤ N} e^{-n²t} cos nx`.
pub fn theta_eval(p: &HeatParams, x: f64) -> f64 {
    let tail: f64 = (1..=p.truncation)
        .map(|n| {
            let n = n as f64;
            (-n * n * p.t).exp() * (n * x).cos()
        })
        .sum();
    1.0 / (2.0 * PI) + tail / PI
}

/// The kernel sampled on an `n`-point grid.
pub fn theta_signal(p: &HeatParams, n: usize) -> Result<PeriodicSignal> {
    PeriodicSignal::from_fn(n, |x| theta_eval(p, x))
}

/// `θ_t ∗ f`, realized by scaling mode `k` by `e^{-k²t}`.
pub fn heat_evolve(f: &PeriodicSignal, p: &HeatParams) -> PeriodicSignal {
    let t = p.t;
    signal::apply_multiplier(f, |k| (-((k * k) as f64) * t).exp())
}

/// Both sides of a decay lower bound together with the raw quotient in the exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayBound {
    /// `‖θ_1 ∗ f‖_{L²}`
    pub lhs: f64,
    /// `exp(-c·quotient)·‖f‖_{L²}`
    pub rhs: f64,
    pub quotient: f64,
    pub constant: f64,
}

impl DecayBound {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs >= self.rhs - slack
    }
}

fn decay_bound(
    f: &PeriodicSignal,
    constant: f64,
    quotient: impl FnOnce(f64, &PeriodicSignal) -> f64,
) -> Result<DecayBound> {
    if f.is_zero() {
        return Err(LabError::UndefinedRatio);
    }
    let l2 = norms(f).l2;
    let q = quotient(l2, &signal::derivative(f));
    let lhs = norms(&heat_evolve(f, &HeatParams::new(1.0)?)).l2;
    Ok(DecayBound {
        lhs,
        rhs: (-constant * q).exp() * l2,
        quotient: q,
        constant,
    })
}

/// `‖θ_1 ∗ f‖_{L²}` against `exp(-c ‖f′‖⁴_{L¹}/‖f‖⁴_{L²}) ‖f‖_{L²}`.
pub fn decay_lower_bound_l1(f: &PeriodicSignal, constant: f64) -> Result<DecayBound> {
    decay_bound(f, constant, |l2, df| (norms(df).l1 / l2).powi(4))
}

/// `‖θ_1 ∗ f‖_{L²}` against `exp(-c ‖f′‖²_{L²}/‖f‖²_{L²}) ‖f‖_{L²}`.
///
/// With `c = 1` this holds for every signal: writing `w_k` for the share of
/// `‖f‖²` carried by frequency `k`, convexity of `exp` gives
/// `Σ w_k e^{-2k²} ≥ e^{-2 Σ w_k k²}`, which is the squared inequality.
pub fn decay_lower_bound_l2(f: &PeriodicSignal, constant: f64) -> Result<DecayBound> {
    decay_bound(f, constant, |l2, df| (norms(df).l2 / l2).powi(2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub initial: usize,
    pub counts: Vec<usize>,
    pub holds: bool,
}

/// Sign-change counts of `θ_{t_i} ∗ f` along increasing times.
pub fn sign_change_monotonicity_check(f: &PeriodicSignal, times: &[f64]) -> Result<MonotonicityReport> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Domain("times must be strictly increasing".into()));
    }
    let initial = sign_changes(f, DEFAULT_DEAD_BAND);
    let counts = times
        .iter()
        .map(|&t| Ok(sign_changes(&heat_evolve(f, &HeatParams::new(t)?), DEFAULT_DEAD_BAND)))
        .collect::<Result<Vec<_>>>()?;
    let holds = counts.first().map_or(true, |&c| c <= initial)
        && counts.windows(2).all(|w| w[1] <= w[0]);
    Ok(MonotonicityReport {
        initial,
        counts,
        holds,
    })
}
