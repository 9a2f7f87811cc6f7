//! Conjugate functions, winding numbers and topological lower bounds on
//! Fourier coefficients.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::signal::{
    self, fourier_coefficients, norms, sign_changes, FourierSeries, PeriodicSignal,
    DEFAULT_DEAD_BAND, DEFAULT_SAMPLES,
};

/// Minimum number of grid cells per stencil step.
pub const CELLS_PER_STEP: usize = 64;

/// Default relative margin for the winding-number conditioning test.
pub const DEFAULT_WINDING_MARGIN: f64 = 1e-6;

/// Piecewise-constant finite-difference profile with weights `(-1)^j C(n, j)`
/// on consecutive steps `[jε, (j+1)ε)`.
///
/// The step width is snapped to a whole number of grid cells so that every
/// jump lands on a node; the node at a jump carries the mean of the two
/// one-sided values. With that convention trapezoid sums see exactly the
/// vanishing moments of the continuous profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StencilFamily {
    order: usize,
    width: f64,
    samples: usize,
    coefficients: Vec<i64>,
}

impl StencilFamily {
    /// Picks the smallest power-of-two grid (at least the default) resolving `width`.
    pub fn new(order: usize, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(LabError::Domain(format!("stencil width must be positive, got {width}")));
        }
        let needed = (CELLS_PER_STEP as f64 * 2.0 * PI / width).ceil() as usize;
        Self::on_grid(order, width, needed.next_power_of_two().max(DEFAULT_SAMPLES))
    }

    pub fn on_grid(order: usize, width: f64, samples: usize) -> Result<Self> {
        if order == 0 {
            return Err(LabError::Domain("stencil order must be at least 1".into()));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(LabError::Domain(format!("stencil width must be positive, got {width}")));
        }
        let h = 2.0 * PI / samples as f64;
        if width < CELLS_PER_STEP as f64 * h {
            return Err(LabError::Resolution(format!(
                "width {width:.3e} spans fewer than {CELLS_PER_STEP} cells of a {samples}-point grid"
            )));
        }
        let cells = (width / h).round() as usize;
        if (order + 1) * cells >= samples {
            return Err(LabError::Domain(format!(
                "support ({} steps of {width:.3e}) does not fit in one period",
                order + 1
            )));
        }
        Ok(Self {
            order,
            width: cells as f64 * h,
            samples,
            coefficients: binomial_weights(order),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Effective step width after snapping to the grid.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coefficients
    }

    pub fn signal(&self) -> PeriodicSignal {
        let h = 2.0 * PI / self.samples as f64;
        let cells = (self.width / h).round() as usize;
        let weight = |step: usize| self.coefficients.get(step).copied().unwrap_or(0) as f64;
        let mut values = vec![0.0; self.samples];
        for (j, v) in values.iter_mut().enumerate().take((self.order + 1) * cells + 1) {
            let step = j / cells;
            *v = if j % cells == 0 {
                let before = if step == 0 { 0.0 } else { weight(step - 1) };
                0.5 * (before + weight(step))
            } else {
                weight(step)
            };
        }
        PeriodicSignal::new(values).expect("stencil samples are finite")
    }
}

/// `(-1)^j C(n, j)` for `j = 0..=n`.
pub fn binomial_weights(n: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut c: i64 = 1;
    for j in 0..=n {
        out.push(if j % 2 == 0 { c } else { -c });
        c = c * (n - j) as i64 / (j + 1) as i64;
    }
    out
}

/// The order-`n` stencil of step `ε` on an automatically sized grid.
pub fn stencil_function(order: usize, width: f64) -> Result<PeriodicSignal> {
    Ok(StencilFamily::new(order, width)?.signal())
}

/// Conjugate series: `sin kx ↦ -cos kx`, `cos kx ↦ sin kx`, constants dropped.
pub fn hilbert_transform(s: &FourierSeries) -> FourierSeries {
    let mut out = FourierSeries::zeros(s.cutoff());
    for k in 1..=s.cutoff() {
        out.set(k, s.cosine(k), -s.sine(k));
    }
    out
}

/// Conjugate function of a sampled signal (multiplier `-i sign k`, Nyquist dropped).
pub fn conjugate_signal(f: &PeriodicSignal) -> PeriodicSignal {
    analytic_curve(f).conjugate
}

struct AnalyticCurve {
    conjugate: PeriodicSignal,
    /// Unscaled DFT bins of `f + iHf` for frequencies `0..N/2`.
    positive_bins: Vec<Complex64>,
}

fn analytic_curve(f: &PeriodicSignal) -> AnalyticCurve {
    let n = f.len();
    let spec = signal::forward(f.samples());
    let mut conj = vec![Complex64::new(0.0, 0.0); n];
    for (j, c) in spec.iter().enumerate() {
        let k = signal::signed_frequency(j, n);
        if k != 0 && 2 * j != n {
            conj[j] = *c * Complex64::new(0.0, -(k.signum() as f64));
        }
    }
    let mut positive_bins = Vec::with_capacity(n / 2);
    positive_bins.push(spec[0]);
    positive_bins.extend(spec[1..n.div_ceil(2)].iter().map(|c| c * 2.0));
    AnalyticCurve {
        conjugate: PeriodicSignal::new(signal::inverse_real(conj)).expect("finite"),
        positive_bins,
    }
}

impl AnalyticCurve {
    /// `f(t) + i Hf(t)` at an arbitrary angle by trigonometric interpolation.
    fn eval(&self, t: f64, n: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let step = Complex64::from_polar(1.0, t);
        let mut phase = Complex64::new(1.0, 0.0);
        for c in &self.positive_bins {
            acc += c * phase;
            phase *= step;
        }
        acc / n as f64
    }
}

/// Steps whose sampled turning angle exceeds this are subdivided.
const MAX_STEP_ANGLE: f64 = PI / 3.0;
const MAX_REFINE_DEPTH: u32 = 24;

/// Winding number of `t ↦ f(t) + i Hf(t)` about the origin.
///
/// Fails with [`LabError::IllConditionedWinding`] when the curve comes within
/// `margin · max|γ|` of the origin.
pub fn winding_number(f: &PeriodicSignal, margin: f64) -> Result<i64> {
    let n = f.len();
    let curve = analytic_curve(f);
    let points: Vec<Complex64> = f
        .samples()
        .iter()
        .zip(curve.conjugate.samples())
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    let max_modulus = points.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let min_modulus = points.iter().fold(f64::INFINITY, |m, z| m.min(z.norm()));
    let floor = margin * max_modulus;
    if max_modulus == 0.0 || min_modulus < floor {
        return Err(LabError::IllConditionedWinding {
            min_modulus,
            max_modulus,
        });
    }
    let h = f.spacing();
    let mut total = 0.0;
    for j in 0..n {
        let (a, b) = (points[j], points[(j + 1) % n]);
        total += turning(&curve, n, j as f64 * h, a, (j + 1) as f64 * h, b, floor, 0)?;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

#[allow(clippy::too_many_arguments)]
fn turning(
    curve: &AnalyticCurve,
    n: usize,
    t0: f64,
    z0: Complex64,
    t1: f64,
    z1: Complex64,
    floor: f64,
    depth: u32,
) -> Result<f64> {
    let angle = (z1 / z0).arg();
    if angle.abs() <= MAX_STEP_ANGLE || depth >= MAX_REFINE_DEPTH {
        return Ok(angle);
    }
    let tm = 0.5 * (t0 + t1);
    let zm = curve.eval(tm, n);
    if zm.norm() < floor {
        return Err(LabError::IllConditionedWinding {
            min_modulus: zm.norm(),
            max_modulus: floor,
        });
    }
    Ok(turning(curve, n, t0, z0, tm, zm, floor, depth + 1)?
        + turning(curve, n, tm, zm, t1, z1, floor, depth + 1)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma1Status {
    Pass,
    Fail,
    NotInOrthogonalComplement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Verdict {
    pub n: usize,
    /// Largest `|⟨f, sin kx⟩|`, `|⟨f, cos kx⟩|` over `k ≤ n`, relative to `‖f‖_{L²}`.
    pub low_mode_residual: f64,
    pub sign_changes: usize,
    pub winding: Option<i64>,
    pub status: Lemma1Status,
}

/// A function orthogonal to all modes `k ≤ n` must change sign at least
/// `2n + 2` times and wind at least `n + 1` times.
pub fn lemma1_check(f: &PeriodicSignal, n: usize, tol: f64) -> Result<Lemma1Verdict> {
    let l2 = norms(f).l2;
    if l2 == 0.0 {
        return Err(LabError::UndefinedRatio);
    }
    let coeffs = fourier_coefficients(f, n)?;
    let low = (0..=n)
        .map(|k| coeffs.sine(k).abs().max(coeffs.cosine(k).abs()))
        .fold(0.0, f64::max)
        / l2;
    let changes = sign_changes(f, DEFAULT_DEAD_BAND);
    if low > tol {
        return Ok(Lemma1Verdict {
            n,
            low_mode_residual: low,
            sign_changes: changes,
            winding: None,
            status: Lemma1Status::NotInOrthogonalComplement,
        });
    }
    let winding = winding_number(f, DEFAULT_WINDING_MARGIN)?;
    let ok = changes >= 2 * n + 2 && winding > n as i64;
    Ok(Lemma1Verdict {
        n,
        low_mode_residual: low,
        sign_changes: changes,
        winding: Some(winding),
        status: if ok { Lemma1Status::Pass } else { Lemma1Status::Fail },
    })
}

/// Low-mode coefficient mass against `‖f‖^{n+1}_{L¹} / ‖f‖ⁿ_{L∞}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Ratio {
    pub sign_changes: usize,
    /// `Σ_{k ≤ n/2} |⟨f, sin kx⟩| + |⟨f, cos kx⟩|`
    pub lhs: f64,
    pub l1: f64,
    pub linf: f64,
    pub rhs_core: f64,
    pub ratio: f64,
    /// The coefficients entering `lhs`.
    pub coefficients: FourierSeries,
}

pub fn theorem2_ratio(f: &PeriodicSignal) -> Result<Theorem2Ratio> {
    if f.is_zero() {
        return Err(LabError::UndefinedRatio);
    }
    let n = sign_changes(f, DEFAULT_DEAD_BAND);
    let coefficients = fourier_coefficients(f, n / 2)?;
    let lhs: f64 = (0..=n / 2)
        .map(|k| coefficients.sine(k).abs() + coefficients.cosine(k).abs())
        .sum();
    let nm = norms(f);
    let rhs_core = nm.l1.powi(n as i32 + 1) / nm.linf.powi(n as i32);
    Ok(Theorem2Ratio {
        sign_changes: n,
        lhs,
        l1: nm.l1,
        linf: nm.linf,
        rhs_core,
        ratio: lhs / rhs_core,
        coefficients,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

/// An interval `[start, end]` on which the profile equals `±1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedInterval {
    pub start: f64,
    pub end: f64,
    pub sign: Sign,
}

impl SignedInterval {
    pub fn new(start: f64, end: f64, sign: Sign) -> Self {
        Self { start, end, sign }
    }

    /// `sign · ∫_{start}^{end} x^k dx`
    fn moment(&self, k: usize) -> f64 {
        let p = (k + 1) as i32;
        self.sign.value() * (self.end.powi(p) - self.start.powi(p)) / p as f64
    }
}

/// A polynomial of degree `< n` pairing nontrivially with an `n`-interval sign profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Witness {
    /// Ascending by degree, unit Euclidean norm.
    pub coefficients: Vec<f64>,
    /// `∫ p f dx`
    pub pairing: f64,
    /// `√n · σ_min(T)`, a lower bound on `|pairing|` for the unit-norm maximizer.
    pub lower_bound: f64,
    /// `det T` for the interval-pairing matrix `T_{jk} = ∫_{I_j} x^k f`.
    pub determinant: f64,
}

fn validate_intervals(intervals: &[SignedInterval]) -> Result<()> {
    if intervals.is_empty() {
        return Err(LabError::Geometry("need at least one interval".into()));
    }
    for iv in intervals {
        if !(iv.start.is_finite() && iv.end.is_finite()) || iv.end <= iv.start {
            return Err(LabError::Geometry(format!(
                "degenerate interval [{}, {}]",
                iv.start, iv.end
            )));
        }
    }
    let mut sorted: Vec<_> = intervals.iter().collect();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
    if sorted.windows(2).any(|w| w[1].start < w[0].end) {
        return Err(LabError::Geometry("intervals overlap".into()));
    }
    Ok(())
}

/// The pairing matrix `T_{jk} = sign_j ∫_{I_j} x^k dx`.
pub fn pairing_matrix(intervals: &[SignedInterval]) -> Result<DMatrix<f64>> {
    validate_intervals(intervals)?;
    let n = intervals.len();
    Ok(DMatrix::from_fn(n, n, |j, k| intervals[j].moment(k)))
}

/// `∫ p f` for a polynomial given by ascending coefficients.
pub fn pairing(coefficients: &[f64], intervals: &[SignedInterval]) -> f64 {
    intervals
        .iter()
        .map(|iv| {
            coefficients
                .iter()
                .enumerate()
                .map(|(k, c)| c * iv.moment(k))
                .sum::<f64>()
        })
        .sum()
}

/// Unit-norm polynomial of degree `n - 1` maximizing `|∫ p f|`.
///
/// `∫ p f = c · m` with `m = Tᵀ 1`, so the maximizer is `m / ‖m‖` and the
/// maximum is `‖m‖ ≥ √n σ_min(T)`. `T` is injective: a kernel element would
/// need a root inside each of the `n` intervals.
pub fn lemma4_witness(intervals: &[SignedInterval]) -> Result<Lemma4Witness> {
    let t = pairing_matrix(intervals)?;
    let n = intervals.len();
    let moments: Vec<f64> = (0..n).map(|k| t.column(k).sum()).collect();
    let norm = moments.iter().map(|m| m * m).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(LabError::Geometry("pairing map is degenerate".into()));
    }
    let coefficients: Vec<f64> = moments.iter().map(|m| m / norm).collect();
    let sigma_min = t
        .clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(Lemma4Witness {
        pairing: pairing(&coefficients, intervals),
        coefficients,
        lower_bound: (n as f64).sqrt() * sigma_min,
        determinant: t.determinant(),
    })
}
