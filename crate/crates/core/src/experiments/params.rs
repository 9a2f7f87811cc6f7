//! Per-experiment parameter schemas with defaults and validation.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::ExperimentKind;
use crate::error::{LabError, Result};

/// A scalar or a list of scalars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    pub fn as_slice(&self) -> &[T] {
        match self {
            OneOrMany::One(v) => std::slice::from_ref(v),
            OneOrMany::Many(v) => v,
        }
    }
}

fn default_h() -> f64 {
    1.0 / 128.0
}

/// `2^-4, …, 2^-9`
pub(crate) fn default_eps() -> Vec<f64> {
    (4..=9).map(|k| 2f64.powi(-k)).collect()
}

fn default_aspects() -> Vec<f64> {
    (2..=12).map(f64::from).collect()
}

fn default_rectangles() -> Vec<[f64; 2]> {
    vec![[1.0, 1.0], [2.0, 1.0], [3.0, 1.0]]
}

fn default_ellipses() -> Vec<[f64; 2]> {
    vec![[1.0, 1.0], [2.0, 1.0]]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectSweepParams {
    #[serde(default = "default_aspects")]
    pub a_over_b: Vec<f64>,
    /// Aspects (with `b = 1`) also solved on the grid.
    #[serde(default)]
    pub solve: Vec<f64>,
    #[serde(default = "default_h")]
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOracleParams {
    /// Half-sides `[a, b]`.
    #[serde(default = "default_rectangles")]
    pub rectangles: Vec<[f64; 2]>,
    #[serde(default = "default_h")]
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskEllipseParams {
    /// Semi-axes `[a, b]` with `a ≥ b`.
    #[serde(default = "default_ellipses")]
    pub ellipses: Vec<[f64; 2]>,
    #[serde(default = "default_h")]
    pub h: f64,
}

fn default_min_tolerance() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MakarLimanovParams {
    #[serde(default = "default_ellipses")]
    pub ellipses: Vec<[f64; 2]>,
    #[serde(default = "default_h")]
    pub h: f64,
    /// Slack for locating the minimum of a (nearly) constant functional.
    #[serde(default = "default_min_tolerance")]
    pub min_tolerance: f64,
}

fn default_semi_major() -> Vec<f64> {
    (1..=5).map(f64::from).collect()
}

fn default_sweep_h() -> f64 {
    1.0 / 32.0
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipseSweepParams {
    #[serde(default = "default_semi_major")]
    pub a: Vec<f64>,
    #[serde(default = "one")]
    pub b: f64,
    /// Coarser than the other solver experiments: long ellipses are large grids.
    #[serde(default = "default_sweep_h")]
    pub h: f64,
}

fn default_orders() -> OneOrMany<usize> {
    OneOrMany::Many(vec![2, 3])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatDecayParams {
    #[serde(default = "default_orders")]
    pub n: OneOrMany<usize>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "one")]
    pub t: f64,
}

fn default_trials_1000() -> usize {
    1000
}

fn default_max_cutoff() -> usize {
    64
}

fn default_samples() -> usize {
    1024
}

fn default_pure_modes() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prop2Params {
    #[serde(default = "default_trials_1000")]
    pub trials: usize,
    #[serde(default = "default_max_cutoff")]
    pub max_cutoff: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// `sin kx` equality cases for `k = 1..=pure_modes`.
    #[serde(default = "default_pure_modes")]
    pub pure_modes: usize,
}

fn default_trials_500() -> usize {
    500
}

fn default_min_freqs() -> OneOrMany<usize> {
    OneOrMany::Many(vec![2, 3, 4, 5, 6])
}

fn default_extra_modes() -> usize {
    8
}

fn default_sharp_max() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma1Params {
    #[serde(default = "default_trials_500")]
    pub trials: usize,
    /// Lowest frequency present; trials cycle through the list.
    #[serde(default = "default_min_freqs")]
    pub min_freq: OneOrMany<usize>,
    /// Frequencies run from `m` up to `m + extra_modes`.
    #[serde(default = "default_extra_modes")]
    pub extra_modes: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// `sin((n+1)x)` equality cases for `n = 0..=sharp_max`.
    #[serde(default = "default_sharp_max")]
    pub sharp_max: usize,
}

fn two() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thm2Params {
    #[serde(default = "two")]
    pub n: usize,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
}

fn default_trials_200() -> usize {
    200
}

fn default_k_max() -> usize {
    10
}

fn default_lemma5_extra() -> usize {
    6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma5Params {
    /// `cos kθ` equality cases and the range of lowest modes.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_trials_200")]
    pub trials: usize,
    #[serde(default = "default_lemma5_extra")]
    pub extra_modes: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    RectSweep(RectSweepParams),
    SolverOracle(SolverOracleParams),
    DiskEllipse(DiskEllipseParams),
    MakarLimanov(MakarLimanovParams),
    EllipseSweep(EllipseSweepParams),
    HeatDecay(HeatDecayParams),
    Prop2Property(Prop2Params),
    Lemma1Property(Lemma1Params),
    Thm2Ratio(Thm2Params),
    Lemma5Property(Lemma5Params),
}

fn typed<T: DeserializeOwned>(kind: ExperimentKind, map: Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(map))
        .map_err(|e| LabError::Config(format!("{}: {e}", kind.name())))
}

fn require(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LabError::Config(what()))
    }
}

fn positive(name: &str, values: &[f64]) -> Result<()> {
    require(!values.is_empty(), || format!("`{name}` must not be empty"))?;
    require(values.iter().all(|v| v.is_finite() && *v > 0.0), || {
        format!("`{name}` must be positive and finite, got {values:?}")
    })
}

fn spacing(h: f64) -> Result<()> {
    require(h.is_finite() && h > 0.0 && h < 1.0, || format!("grid spacing must lie in (0, 1), got {h}"))
}

fn ellipses(list: &[[f64; 2]]) -> Result<()> {
    positive("ellipses", &list.iter().flatten().copied().collect::<Vec<_>>())?;
    require(list.iter().all(|[a, b]| a >= b), || "ellipses need a ≥ b".into())
}

fn samples(n: usize, top: usize) -> Result<()> {
    require(n >= 8 && n > 2 * top + 2, || {
        format!("{n} samples cannot resolve frequencies up to {top}")
    })
}

impl Params {
    pub fn parse(kind: ExperimentKind, map: Map<String, Value>) -> Result<Self> {
        let p = match kind {
            ExperimentKind::RectSweep => Params::RectSweep(typed(kind, map)?),
            ExperimentKind::SolverOracle => Params::SolverOracle(typed(kind, map)?),
            ExperimentKind::DiskEllipse => Params::DiskEllipse(typed(kind, map)?),
            ExperimentKind::MakarLimanov => Params::MakarLimanov(typed(kind, map)?),
            ExperimentKind::EllipseSweep => Params::EllipseSweep(typed(kind, map)?),
            ExperimentKind::HeatDecay => Params::HeatDecay(typed(kind, map)?),
            ExperimentKind::Prop2Property => Params::Prop2Property(typed(kind, map)?),
            ExperimentKind::Lemma1Property => Params::Lemma1Property(typed(kind, map)?),
            ExperimentKind::Thm2Ratio => Params::Thm2Ratio(typed(kind, map)?),
            ExperimentKind::Lemma5Property => Params::Lemma5Property(typed(kind, map)?),
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        match self {
            Params::RectSweep(p) => {
                positive("a_over_b", &p.a_over_b)?;
                if !p.solve.is_empty() {
                    positive("solve", &p.solve)?;
                }
                spacing(p.h)
            }
            Params::SolverOracle(p) => {
                positive("rectangles", &p.rectangles.iter().flatten().copied().collect::<Vec<_>>())?;
                spacing(p.h)
            }
            Params::DiskEllipse(p) => {
                ellipses(&p.ellipses)?;
                spacing(p.h)
            }
            Params::MakarLimanov(p) => {
                ellipses(&p.ellipses)?;
                require(p.min_tolerance >= 0.0, || "`min_tolerance` must be nonnegative".into())?;
                spacing(p.h)
            }
            Params::EllipseSweep(p) => {
                positive("a", &p.a)?;
                positive("b", &[p.b])?;
                require(p.a.iter().all(|a| *a >= p.b), || "every `a` must be at least `b`".into())?;
                spacing(p.h)
            }
            Params::HeatDecay(p) => {
                require(!p.n.as_slice().is_empty() && p.n.as_slice().iter().all(|n| (1..=12).contains(n)), || {
                    "stencil orders must lie in 1..=12".into()
                })?;
                positive("eps", &p.eps)?;
                require(p.eps.iter().all(|e| *e >= 2f64.powi(-14)), || "`eps` below 2^-14 is unsupported".into())?;
                require(p.eps.len() >= 2, || "need at least two widths for a slope".into())?;
                positive("t", &[p.t])
            }
            Params::Prop2Property(p) => {
                require(p.trials >= 1, || "`trials` must be positive".into())?;
                require(p.max_cutoff >= 1, || "`max_cutoff` must be positive".into())?;
                samples(p.samples, p.max_cutoff.max(p.pure_modes))
            }
            Params::Lemma1Property(p) => {
                require(p.trials >= 1, || "`trials` must be positive".into())?;
                let m = p.min_freq.as_slice();
                require(!m.is_empty() && m.iter().all(|&v| v >= 1), || "`min_freq` must be at least 1".into())?;
                let top = m.iter().max().copied().unwrap_or(1) + p.extra_modes;
                samples(p.samples, top.max(p.sharp_max + 1))
            }
            Params::Thm2Ratio(p) => {
                require((1..=12).contains(&p.n), || "stencil order must lie in 1..=12".into())?;
                positive("eps", &p.eps)?;
                require(p.eps.iter().all(|e| *e >= 2f64.powi(-14)), || "`eps` below 2^-14 is unsupported".into())
            }
            Params::Lemma5Property(p) => {
                require(p.k_max >= 1 && p.trials >= 1, || "`k_max` and `trials` must be positive".into())?;
                samples(p.samples, 2 * (p.k_max + p.extra_modes))
            }
        }
    }
}
