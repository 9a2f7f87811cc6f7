//! Real continuous functions on the torus `[0, 2π)`, sampled uniformly.
//!
//! Inner products are unnormalized integrals over one period, so
//! `⟨sin kx, sin kx⟩ = π` and `⟨1, 1⟩ = 2π`. All quadrature is the uniform
//! trapezoid rule, which on a periodic grid is just `h · Σ f_j g_j`.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Default number of samples per period.
pub const DEFAULT_SAMPLES: usize = 4096;
/// Smallest admissible grid.
pub const MIN_SAMPLES: usize = 8;
/// Default relative dead-band for sign counting.
pub const DEFAULT_DEAD_BAND: f64 = 1e-12;

/// Uniform samples `f(2πj/N)`, `j = 0..N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicSignal {
    samples: Vec<f64>,
}

#[derive(Deserialize)]
struct SignalFile {
    n: usize,
    values: Vec<f64>,
}

impl PeriodicSignal {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(LabError::InvalidSignal(format!(
                "need at least {MIN_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(LabError::InvalidSignal(format!("sample {j} is not finite")));
        }
        Ok(Self { samples })
    }

    /// Samples `f` at the `n` grid nodes.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = 2.0 * PI / n as f64;
        Self::new((0..n).map(|j| f(j as f64 * h)).collect())
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Grid spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise linear combination `α·self + β·other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        check_len(self, other)?;
        Self::new(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        )
    }

    /// Writes `x,value` rows preceded by a `# n=<N>` metadata line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# n={}", self.len())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value"])?;
        for (j, v) in self.samples.iter().enumerate() {
            w.write_record([format_float(self.node(j)), format_float(*v)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(input);
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let v: f64 = record
                .get(1)
                .ok_or_else(|| LabError::InvalidSignal("missing value column".into()))?
                .trim()
                .parse()
                .map_err(|e| LabError::InvalidSignal(format!("bad value: {e}")))?;
            values.push(v);
        }
        Self::new(values)
    }

    /// JSON form: `{"n": N, "values": [...]}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&serde_json::json!({
            "n": self.len(),
            "values": self.samples,
        }))?)
    }

    /// Accepts either the object form written by [`to_json`](Self::to_json) or a bare array.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.is_array() {
            return Self::new(serde_json::from_value(value)?);
        }
        let file: SignalFile = serde_json::from_value(value)?;
        if file.n != file.values.len() {
            return Err(LabError::InvalidSignal(format!(
                "metadata says n={} but {} values present",
                file.n,
                file.values.len()
            )));
        }
        Self::new(file.values)
    }
}

fn format_float(v: f64) -> String {
    format!("{v:.17e}")
}

fn check_len(f: &PeriodicSignal, g: &PeriodicSignal) -> Result<()> {
    if f.len() != g.len() {
        return Err(LabError::Dimension {
            left: f.len(),
            right: g.len(),
        });
    }
    Ok(())
}

/// Coefficients against the unnormalized trigonometric system.
///
/// `sine[k] = ⟨f, sin kx⟩` for `1 ≤ k ≤ K` (`sine[0]` is always zero) and
/// `cosine[k] = ⟨f, cos kx⟩` for `0 ≤ k ≤ K`, so that
/// `f = cosine[0]/2π + (1/π) Σ_k (sine[k] sin kx + cosine[k] cos kx)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    sine: Vec<f64>,
    cosine: Vec<f64>,
}

impl FourierSeries {
    pub fn new(mut sine: Vec<f64>, cosine: Vec<f64>) -> Result<Self> {
        if sine.len() != cosine.len() || sine.is_empty() {
            return Err(LabError::InvalidSignal(
                "sine and cosine arrays must have equal, nonzero length".into(),
            ));
        }
        sine[0] = 0.0;
        Ok(Self { sine, cosine })
    }

    pub fn zeros(cutoff: usize) -> Self {
        Self {
            sine: vec![0.0; cutoff + 1],
            cosine: vec![0.0; cutoff + 1],
        }
    }

    pub fn cutoff(&self) -> usize {
        self.sine.len() - 1
    }

    pub fn sine(&self, k: usize) -> f64 {
        self.sine.get(k).copied().unwrap_or(0.0)
    }

    pub fn cosine(&self, k: usize) -> f64 {
        self.cosine.get(k).copied().unwrap_or(0.0)
    }

    pub fn sines(&self) -> &[f64] {
        &self.sine
    }

    pub fn cosines(&self) -> &[f64] {
        &self.cosine
    }

    pub fn set(&mut self, k: usize, sine: f64, cosine: f64) {
        if k > 0 {
            self.sine[k] = sine;
        }
        self.cosine[k] = cosine;
    }

    /// Magnitude of mode `k`: `sqrt(a_k² + b_k²)` (just `|b_0|` for the mean).
    pub fn mode_magnitude(&self, k: usize) -> f64 {
        self.sine(k).hypot(self.cosine(k))
    }

    /// Point evaluation of the truncated series.
    pub fn evaluate(&self, x: f64) -> f64 {
        let tail: f64 = (1..=self.cutoff())
            .map(|k| {
                let (s, c) = (k as f64 * x).sin_cos();
                self.sine[k] * s + self.cosine[k] * c
            })
            .sum();
        self.cosine[0] / (2.0 * PI) + tail / PI
    }

    /// `‖f‖²_{L²}` from the coefficients (Parseval).
    pub fn parseval_energy(&self) -> f64 {
        let tail: f64 = (1..=self.cutoff())
            .map(|k| self.sine[k].powi(2) + self.cosine[k].powi(2))
            .sum();
        self.cosine[0].powi(2) / (2.0 * PI) + tail / PI
    }

    /// Samples the series on an `n`-point grid (requires `K < n/2`).
    pub fn synthesize(&self, n: usize) -> Result<PeriodicSignal> {
        if 2 * self.cutoff() >= n {
            return Err(LabError::Aliasing {
                cutoff: self.cutoff(),
                n,
            });
        }
        // unscaled DFT bins: N·(b_k - i a_k)/(2π) on +k, conjugate on -k
        let scale = n as f64 / (2.0 * PI);
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        spec[0] = Complex64::new(self.cosine[0] * scale, 0.0);
        for k in 1..=self.cutoff() {
            let c = Complex64::new(self.cosine[k], -self.sine[k]) * scale;
            spec[k] = c;
            spec[n - k] = c.conj();
        }
        PeriodicSignal::new(inverse_real(spec))
    }
}

/// Trapezoid approximation of `∫₀^{2π} f g dx`.
pub fn inner_product(f: &PeriodicSignal, g: &PeriodicSignal) -> Result<f64> {
    check_len(f, g)?;
    let dot: f64 = f.samples.iter().zip(&g.samples).map(|(a, b)| a * b).sum();
    Ok(dot * f.spacing())
}

/// Coefficients `⟨f, sin kx⟩`, `⟨f, cos kx⟩` for `k ≤ cutoff` via one FFT.
pub fn fourier_coefficients(f: &PeriodicSignal, cutoff: usize) -> Result<FourierSeries> {
    let n = f.len();
    if 2 * cutoff >= n {
        return Err(LabError::Aliasing { cutoff, n });
    }
    let spec = forward(&f.samples);
    let h = f.spacing();
    let mut series = FourierSeries::zeros(cutoff);
    for k in 0..=cutoff {
        series.set(k, -h * spec[k].im, h * spec[k].re);
    }
    Ok(series)
}

/// Number of cyclic sign changes, ignoring samples with `|f| ≤ η·‖f‖_∞`.
///
/// Zeros and touch points are skipped, so the count is the number of
/// alternations between strictly positive and strictly negative runs and is
/// always even. A sign change narrower than one grid cell is invisible.
pub fn sign_changes(f: &PeriodicSignal, dead_band: f64) -> usize {
    let threshold = dead_band.max(0.0) * f.max_abs();
    let signs: Vec<bool> = f
        .samples
        .iter()
        .filter(|v| v.abs() > threshold && **v != 0.0)
        .map(|&v| v > 0.0)
        .collect();
    let Some(&last) = signs.last() else {
        return 0;
    };
    let mut prev = last;
    let mut count = 0;
    for &s in &signs {
        if s != prev {
            count += 1;
        }
        prev = s;
    }
    count
}

/// `L¹`, `L²` and `L^∞` norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

pub fn norms(f: &PeriodicSignal) -> Norms {
    let h = f.spacing();
    let (l1, l2sq) = f
        .samples
        .iter()
        .fold((0.0, 0.0), |(a, b), v| (a + v.abs(), b + v * v));
    Norms {
        l1: l1 * h,
        l2: (l2sq * h).sqrt(),
        linf: f.max_abs(),
    }
}

/// Spectral derivative `f'`. The Nyquist mode, if any, is dropped.
pub fn derivative(f: &PeriodicSignal) -> PeriodicSignal {
    let n = f.len();
    let mut spec = forward(&f.samples);
    for (j, c) in spec.iter_mut().enumerate() {
        let k = signed_frequency(j, n);
        *c = if 2 * j == n {
            Complex64::new(0.0, 0.0)
        } else {
            *c * Complex64::new(0.0, k as f64)
        };
    }
    PeriodicSignal {
        samples: inverse_real(spec),
    }
}

/// Applies a real, even Fourier multiplier `m(|k|)` to every mode of `f`.
pub fn apply_multiplier(f: &PeriodicSignal, m: impl Fn(usize) -> f64) -> PeriodicSignal {
    let n = f.len();
    let mut spec = forward(&f.samples);
    for (j, c) in spec.iter_mut().enumerate() {
        *c *= m(signed_frequency(j, n).unsigned_abs() as usize);
    }
    PeriodicSignal {
        samples: inverse_real(spec),
    }
}

/// Frequency of DFT bin `j` in `(-n/2, n/2]`.
pub(crate) fn signed_frequency(j: usize, n: usize) -> i64 {
    if 2 * j <= n {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

/// Unscaled forward DFT `F_k = Σ_j f_j e^{-2πijk/N}`.
pub(crate) fn forward(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(buf.len(), false).process(&mut buf);
    buf
}

/// Inverse of [`forward`], keeping the real part.
pub(crate) fn inverse_real(mut spec: Vec<Complex64>) -> Vec<f64> {
    let n = spec.len();
    plan(n, true).process(&mut spec);
    let scale = 1.0 / n as f64;
    spec.into_iter().map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(f: impl Fn(f64) -> f64) -> PeriodicSignal {
        PeriodicSignal::from_fn(DEFAULT_SAMPLES, f).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(PeriodicSignal::new(vec![0.0; 4]).is_err());
        assert!(PeriodicSignal::new(vec![0.0, 1.0, f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(PeriodicSignal::new(vec![0.0; 8]).is_ok());
    }

    #[test]
    fn inner_product_examples() {
        let s3 = sig(|x| (3.0 * x).sin());
        assert!((inner_product(&s3, &s3).unwrap() - PI).abs() < 1e-12);
        let one = PeriodicSignal::constant(DEFAULT_SAMPLES, 1.0).unwrap();
        assert!((inner_product(&one, &one).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn inner_product_of_square_wave_with_sine() {
        // Exact value 2∫₀^π sin = 4; the jump at π sits on a node where sign(0)=0.
        let n = 1 << 16;
        let sq = PeriodicSignal::from_fn(n, |x| x.sin().signum() * (x.sin() != 0.0) as u8 as f64).unwrap();
        let s = PeriodicSignal::from_fn(n, f64::sin).unwrap();
        assert!((inner_product(&sq, &s).unwrap() - 4.0).abs() < 1e-8);
    }

    #[test]
    fn inner_product_dimension_error() {
        let a = PeriodicSignal::constant(8, 1.0).unwrap();
        let b = PeriodicSignal::constant(16, 1.0).unwrap();
        assert!(matches!(
            inner_product(&a, &b),
            Err(LabError::Dimension { left: 8, right: 16 })
        ));
    }

    #[test]
    fn coefficients_of_pure_modes() {
        let c2 = fourier_coefficients(&sig(|x| (2.0 * x).cos()), 10).unwrap();
        for k in 0..=10 {
            let want = if k == 2 { PI } else { 0.0 };
            assert!((c2.cosine(k) - want).abs() < 1e-12, "k={k}");
            assert!(c2.sine(k).abs() < 1e-12);
        }
        let one = fourier_coefficients(&PeriodicSignal::constant(64, 1.0).unwrap(), 5).unwrap();
        assert!((one.cosine(0) - 2.0 * PI).abs() < 1e-12);
        assert!((1..=5).all(|k| one.cosine(k).abs() < 1e-12 && one.sine(k).abs() < 1e-12));
    }

    #[test]
    fn coefficients_reject_aliasing() {
        let f = PeriodicSignal::constant(16, 1.0).unwrap();
        assert!(matches!(
            fourier_coefficients(&f, 8),
            Err(LabError::Aliasing { cutoff: 8, n: 16 })
        ));
        assert!(fourier_coefficients(&f, 7).is_ok());
    }

    #[test]
    fn synthesize_round_trip() {
        let f = sig(|x| 0.3 + x.sin() - 2.0 * (5.0 * x).cos());
        let s = fourier_coefficients(&f, 20).unwrap();
        let g = s.synthesize(DEFAULT_SAMPLES).unwrap();
        for (a, b) in f.samples().iter().zip(g.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((s.evaluate(0.7) - (0.3 + 0.7f64.sin() - 2.0 * 3.5f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn sign_change_examples() {
        for k in 1..=12 {
            let f = sig(|x| (k as f64 * x).sin());
            assert_eq!(sign_changes(&f, DEFAULT_DEAD_BAND), 2 * k, "k={k}");
        }
        assert_eq!(sign_changes(&PeriodicSignal::constant(32, 1.0).unwrap(), DEFAULT_DEAD_BAND), 0);
        assert_eq!(sign_changes(&PeriodicSignal::constant(32, 0.0).unwrap(), DEFAULT_DEAD_BAND), 0);
    }

    #[test]
    fn touching_zero_is_not_a_sign_change() {
        // (1 - cos x) ≥ 0 touches zero at x = 0 only.
        let f = sig(|x| 1.0 - x.cos());
        assert_eq!(sign_changes(&f, DEFAULT_DEAD_BAND), 0);
        let g = sig(|x| x.sin().powi(2) * (2.0 * x).cos().signum());
        assert_eq!(sign_changes(&g, DEFAULT_DEAD_BAND), 4);
    }

    #[test]
    fn norms_examples() {
        let s = norms(&sig(f64::sin));
        assert!((s.l1 - 4.0).abs() < 1e-6);
        assert!((s.l2 - PI.sqrt()).abs() < 1e-12);
        assert!((s.linf - 1.0).abs() < 1e-12);
        let z = norms(&PeriodicSignal::constant(16, 0.0).unwrap());
        assert_eq!((z.l1, z.l2, z.linf), (0.0, 0.0, 0.0));
    }

    #[test]
    fn spectral_derivative() {
        let f = sig(|x| (3.0 * x).sin() + 0.5 * x.cos());
        let d = derivative(&f);
        for (j, v) in d.samples().iter().enumerate() {
            let x = f.node(j);
            assert!((v - (3.0 * (3.0 * x).cos() - 0.5 * x.sin())).abs() < 1e-10);
        }
    }

    #[test]
    fn csv_and_json_round_trip() {
        let f = sig(|x| x.cos() + 0.25);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# n=4096\nx,value\n"));
        assert_eq!(PeriodicSignal::read_csv(buf.as_slice()).unwrap(), f);
        let json = f.to_json().unwrap();
        assert_eq!(PeriodicSignal::from_json(&json).unwrap(), f);
        let bare = PeriodicSignal::from_json("[1,2,3,4,5,6,7,8]").unwrap();
        assert_eq!(bare.len(), 8);
        assert!(PeriodicSignal::from_json(r#"{"n": 9, "values": [1,2,3,4,5,6,7,8]}"#).is_err());
    }
}
