//! Config-driven experiment runs.
//!
//! A run directory holds `config.json`, `data/*.csv` and `summary.json`.
//! Every pass/fail check is computed from the data tables alone, so
//! [`verify`] can re-derive a summary from stored output without solving
//! anything again.

mod fourier;
mod params;
mod table;
mod torsion;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{LabError, Result};

pub use params::{OneOrMany, Params};
pub use table::Table;

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RectSweep,
    SolverOracle,
    DiskEllipse,
    HeatDecay,
    Prop2Property,
    Lemma1Property,
    Thm2Ratio,
    MakarLimanov,
    Lemma5Property,
    EllipseSweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::RectSweep,
        ExperimentKind::SolverOracle,
        ExperimentKind::DiskEllipse,
        ExperimentKind::HeatDecay,
        ExperimentKind::Prop2Property,
        ExperimentKind::Lemma1Property,
        ExperimentKind::Thm2Ratio,
        ExperimentKind::MakarLimanov,
        ExperimentKind::Lemma5Property,
        ExperimentKind::EllipseSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::RectSweep => "rect-sweep",
            ExperimentKind::SolverOracle => "solver-oracle",
            ExperimentKind::DiskEllipse => "disk-ellipse",
            ExperimentKind::HeatDecay => "heat-decay",
            ExperimentKind::Prop2Property => "prop2-property",
            ExperimentKind::Lemma1Property => "lemma1-property",
            ExperimentKind::Thm2Ratio => "thm2-ratio",
            ExperimentKind::MakarLimanov => "makar-limanov",
            ExperimentKind::Lemma5Property => "lemma5-property",
            ExperimentKind::EllipseSweep => "ellipse-sweep",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::RectSweep => "center curvature of rectangles against the exponential sandwich",
            ExperimentKind::SolverOracle => "grid solver against the rectangle series",
            ExperimentKind::DiskEllipse => "solved Hessians on disk and ellipses against closed forms",
            ExperimentKind::HeatDecay => "heat-flow decay of binomial stencils as the step shrinks",
            ExperimentKind::Prop2Property => "random signals against the L2 heat-decay lower bound",
            ExperimentKind::Lemma1Property => "sign changes and winding of high-pass trigonometric polynomials",
            ExperimentKind::Thm2Ratio => "low-mode coefficient ratio along the stencil family",
            ExperimentKind::MakarLimanov => "superharmonic functional on solved disk and ellipse",
            ExperimentKind::Lemma5Property => "order of vanishing at the disk center against boundary sign changes",
            ExperimentKind::EllipseSweep => "curvature-based Hessian constant across ellipses",
        }
    }

    /// Acceptance criteria this experiment can decide.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            ExperimentKind::RectSweep => &[1],
            ExperimentKind::SolverOracle => &[2],
            ExperimentKind::DiskEllipse => &[3],
            ExperimentKind::HeatDecay => &[4],
            ExperimentKind::Prop2Property => &[5],
            ExperimentKind::Lemma1Property => &[6],
            ExperimentKind::Thm2Ratio => &[7],
            ExperimentKind::MakarLimanov => &[8],
            ExperimentKind::Lemma5Property => &[9],
            ExperimentKind::EllipseSweep => &[],
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            LabError::Config(format!("unknown experiment `{name}`; expected one of {}", known.join(", ")))
        })
    }
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Experiment parameters may sit under `parameters` or at the top level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Grid spacing override for solver experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub parameters: Map<String, Value>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            experiment: kind.name().to_string(),
            output_dir: output_dir.into(),
            seed: DEFAULT_SEED,
            h: None,
            parameters: Map::new(),
            extra: Map::new(),
        }
    }

    pub fn with_parameter(mut self, key: &str, value: Value) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        ExperimentKind::from_name(&self.experiment)
    }

    /// Typed, validated parameters.
    pub fn params(&self) -> Result<Params> {
        let mut merged = self.parameters.clone();
        for (k, v) in &self.extra {
            if merged.insert(k.clone(), v.clone()).is_some() {
                return Err(LabError::Config(format!("parameter `{k}` given twice")));
            }
        }
        if let Some(h) = self.h {
            merged.insert("h".into(), Value::from(h));
        }
        Params::parse(self.kind()?, merged)
    }

    pub fn validate(&self) -> Result<()> {
        self.params().map(|_| ())
    }
}

/// One pass/fail line. `criterion` is set when the data covers the scope of
/// a numbered acceptance criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: Option<u8>,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub(crate) fn new(criterion: Option<u8>, name: &str, passed: bool, detail: String) -> Self {
        Self {
            criterion,
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub seed: u64,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub metrics: Value,
    pub files: Vec<String>,
    #[serde(default)]
    pub elapsed_seconds: f64,
}

/// Computed data of one run.
pub(crate) struct Output {
    pub tables: Vec<Table>,
    /// Extra JSON artifacts, by file name.
    pub json: Vec<(String, String)>,
    pub metrics: Value,
}

/// Stored tables addressed by name.
pub(crate) struct Tables<'a>(BTreeMap<&'a str, &'a Table>);

impl<'a> Tables<'a> {
    fn new(tables: &'a [Table]) -> Self {
        Tables(tables.iter().map(|t| (t.name.as_str(), t)).collect())
    }

    pub fn get(&self, name: &str) -> Result<&'a Table> {
        self.0
            .get(name)
            .copied()
            .ok_or_else(|| LabError::Config(format!("missing data table `{name}`")))
    }
}

fn compute(params: &Params, seed: u64) -> Result<Output> {
    match params {
        Params::RectSweep(p) => torsion::rect_sweep(p),
        Params::SolverOracle(p) => torsion::solver_oracle(p),
        Params::DiskEllipse(p) => torsion::disk_ellipse(p),
        Params::MakarLimanov(p) => torsion::makar(p),
        Params::EllipseSweep(p) => torsion::ellipse_sweep(p),
        Params::HeatDecay(p) => fourier::heat_decay(p),
        Params::Prop2Property(p) => fourier::prop2(p, seed),
        Params::Lemma1Property(p) => fourier::lemma1(p, seed),
        Params::Thm2Ratio(p) => fourier::thm2(p),
        Params::Lemma5Property(p) => fourier::lemma5(p, seed),
    }
}

/// Pass/fail checks from data tables; shared by [`run`] and [`verify`].
pub fn evaluate(params: &Params, tables: &[Table]) -> Result<Vec<Check>> {
    let t = Tables::new(tables);
    match params {
        Params::RectSweep(p) => torsion::eval_rect_sweep(p, &t),
        Params::SolverOracle(p) => torsion::eval_solver_oracle(p, &t),
        Params::DiskEllipse(p) => torsion::eval_disk_ellipse(p, &t),
        Params::MakarLimanov(p) => torsion::eval_makar(p, &t),
        Params::EllipseSweep(p) => torsion::eval_ellipse_sweep(p, &t),
        Params::HeatDecay(p) => fourier::eval_heat_decay(p, &t),
        Params::Prop2Property(p) => fourier::eval_prop2(p, &t),
        Params::Lemma1Property(p) => fourier::eval_lemma1(p, &t),
        Params::Thm2Ratio(p) => fourier::eval_thm2(p, &t),
        Params::Lemma5Property(p) => fourier::eval_lemma5(p, &t),
    }
}

fn write_summary(dir: &Path, summary: &Summary) -> Result<()> {
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(summary)? + "\n")?;
    Ok(())
}

/// Validate, compute, write the run directory, and summarize.
pub fn run(config: &ExperimentConfig) -> Result<Summary> {
    let params = config.params()?;
    let dir = &config.output_dir;
    let data = dir.join("data");
    fs::create_dir_all(&data)?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)? + "\n")?;
    let start = Instant::now();
    let wrap = |e: LabError| LabError::Experiment {
        experiment: config.experiment.clone(),
        source: Box::new(e),
    };
    let output = match compute(&params, config.seed) {
        Ok(o) => o,
        Err(e) => {
            let summary = Summary {
                experiment: config.experiment.clone(),
                seed: config.seed,
                complete: false,
                error: Some(e.to_string()),
                passed: false,
                checks: Vec::new(),
                metrics: Value::Null,
                files: Vec::new(),
                elapsed_seconds: start.elapsed().as_secs_f64(),
            };
            write_summary(dir, &summary)?;
            return Err(wrap(e));
        }
    };
    let mut files = Vec::new();
    for t in &output.tables {
        let name = format!("data/{}.csv", t.name);
        t.write_csv(&dir.join(&name))?;
        files.push(name);
    }
    for (file, text) in &output.json {
        let name = format!("data/{file}");
        fs::write(dir.join(&name), text)?;
        files.push(name);
    }
    let checks = evaluate(&params, &output.tables).map_err(wrap)?;
    let summary = Summary {
        experiment: config.experiment.clone(),
        seed: config.seed,
        complete: true,
        error: None,
        passed: checks.iter().all(|c| c.passed),
        checks,
        metrics: output.metrics,
        files,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    write_summary(dir, &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub experiment: String,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Whether the stored summary reports the same pass/fail per check.
    pub matches_stored: bool,
}

/// Recompute pass/fail from a run directory's stored data.
pub fn verify(run_dir: &Path) -> Result<Verification> {
    let config = ExperimentConfig::load(&run_dir.join("config.json"))?;
    let params = config.params()?;
    let mut tables = Vec::new();
    let data = run_dir.join("data");
    let mut entries: Vec<PathBuf> = fs::read_dir(&data)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for path in entries {
        if path.extension().and_then(|e| e.to_str()) == Some("csv") {
            tables.push(Table::read_csv(&path)?);
        }
    }
    let checks = evaluate(&params, &tables)?;
    let stored: Option<Summary> = fs::read_to_string(run_dir.join("summary.json"))
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok());
    let matches_stored = stored.is_some_and(|s| {
        s.complete
            && s.checks.len() == checks.len()
            && s.checks.iter().zip(&checks).all(|(a, b)| a.name == b.name && a.passed == b.passed)
    });
    Ok(Verification {
        experiment: config.experiment,
        passed: checks.iter().all(|c| c.passed),
        checks,
        matches_stored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(ExperimentKind::from_name(k.name()).unwrap(), k);
        }
        assert!(ExperimentKind::from_name("rect-swep").is_err());
    }

    #[test]
    fn top_level_parameters_are_accepted() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment": "lemma1-property", "output_dir": "x", "trials": 20, "min_freq": 5}"#,
        )
        .unwrap();
        match cfg.params().unwrap() {
            Params::Lemma1Property(p) => {
                assert_eq!(p.trials, 20);
                assert_eq!(p.min_freq.as_slice(), &[5]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_invalid_parameters_are_rejected() {
        let bad = ExperimentConfig::new(ExperimentKind::HeatDecay, "x").with_parameter("epsilon", json!([0.1]));
        assert!(matches!(bad.validate(), Err(LabError::Config(_))));
        let neg = ExperimentConfig::new(ExperimentKind::HeatDecay, "x").with_parameter("t", json!(-1.0));
        assert!(neg.validate().is_err());
        let h = ExperimentConfig {
            h: Some(0.01),
            ..ExperimentConfig::new(ExperimentKind::Prop2Property, "x")
        };
        assert!(h.validate().is_err());
        let unknown = ExperimentConfig {
            experiment: "nope".into(),
            ..ExperimentConfig::new(ExperimentKind::Prop2Property, "x")
        };
        assert!(unknown.validate().is_err());
    }

    #[test]
    fn run_writes_layout_and_verify_agrees() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::new(ExperimentKind::Thm2Ratio, dir.path().join("run"));
        let summary = run(&cfg).unwrap();
        assert!(summary.complete && summary.passed, "{summary:?}");
        let run_dir = dir.path().join("run");
        for f in ["config.json", "summary.json", "data/thm2_ratio.csv"] {
            assert!(run_dir.join(f).exists(), "{f}");
        }
        let v = verify(&run_dir).unwrap();
        assert!(v.passed && v.matches_stored);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let read = |name: &str| {
            let cfg = ExperimentConfig::new(ExperimentKind::Prop2Property, dir.path().join(name))
                .with_parameter("trials", json!(50));
            run(&cfg).unwrap();
            fs::read(dir.path().join(name).join("data/prop2_property.csv")).unwrap()
        };
        assert_eq!(read("a"), read("b"));
    }

    #[test]
    fn failing_computation_marks_summary_incomplete() {
        let dir = tempfile::tempdir().unwrap();
        // too coarse to hold 100 interior nodes
        let cfg = ExperimentConfig {
            h: Some(0.5),
            ..ExperimentConfig::new(ExperimentKind::DiskEllipse, dir.path())
        };
        let err = run(&cfg).unwrap_err();
        assert!(matches!(err, LabError::Experiment { .. }));
        let s: Summary = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert!(!s.complete && s.error.is_some());
    }
}
