use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::experiments::{
    mixed_trials, paired_trials, SignalRegime, TransferSpec, TransferTrialSpec,
};
use crate::filtering::{Damping, FilterMode};
use crate::graphs::{GraphFamily, LaplacianKind, DEFAULT_DENSE_THRESHOLD};
use crate::io;
use crate::training::TrainingConfig;

/// Chebyshev degree used to synthesize datasets on graphs too large to decompose.
pub const LARGE_GRAPH_DEGREE: usize = 256;

/// Parse a structured config file (`.toml` or `.json`) into a JSON value tree.
pub fn load_value(path: &Path) -> Result<Value> {
    let text = io::read_text(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "toml" => toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        "json" => serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display()))),
        _ => Err(Error::Config(format!(
            "{}: config files must end in .toml or .json",
            path.display()
        ))),
    }
}

/// Parse `key.path=value`; the value is read as JSON when possible, else as a string.
pub fn parse_override(text: &str) -> Result<(String, Value)> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {text:?} is not key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("override {text:?} has an empty key")));
    }
    let raw = raw.trim();
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

/// Set a dotted key, creating intermediate tables.
pub fn apply_override(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = match node {
            Value::Object(m) => m,
            _ => {
                return Err(Error::Config(format!(
                    "cannot set {key}: {} is not a table",
                    parts[..i].join(".")
                )))
            }
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("keys have at least one part")
}

/// Config file (or an empty table), overrides applied in order, then strict decoding.
pub fn resolve<T: DeserializeOwned>(path: Option<&Path>, overrides: &[(String, Value)]) -> Result<T> {
    let mut root = match path {
        Some(p) => load_value(p)?,
        None => Value::Object(Map::new()),
    };
    if !root.is_object() {
        return Err(Error::Config("config root must be a table".into()));
    }
    for (k, v) in overrides {
        apply_override(&mut root, k, v.clone())?;
    }
    serde_json::from_value(root).map_err(|e| Error::Config(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub graph: GraphFamily,
    pub laplacian: LaplacianKind,
    pub num_peaks: usize,
    /// Minimum spacing of target peak centers; `λ_max / (2P)` when unset.
    pub min_peak_separation: Option<f64>,
    pub regime: SignalRegime,
    pub num_signals: usize,
    pub seed: u64,
    /// How targets are produced; exact up to the dense-solver size, Chebyshev beyond.
    pub filtering: Option<FilterMode>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            graph: GraphFamily::ErdosRenyi { n: 32, p: 0.3 },
            laplacian: LaplacianKind::Normalized,
            num_peaks: 2,
            min_peak_separation: None,
            regime: SignalRegime::GaussianIid,
            num_signals: 64,
            seed: 0,
            filtering: None,
        }
    }
}

impl GenerateConfig {
    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        self.regime.validate()?;
        if self.num_peaks == 0 {
            return Err(Error::param("num_peaks must be positive"));
        }
        if self.num_signals == 0 {
            return Err(Error::param("num_signals must be positive"));
        }
        if let Some(s) = self.min_peak_separation {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::param("min_peak_separation must be finite and non-negative"));
            }
        }
        if let Some(FilterMode::Chebyshev { degree: 0, .. }) = self.filtering {
            return Err(Error::param("Chebyshev degree must be at least 1"));
        }
        Ok(())
    }

    pub fn filter_mode(&self) -> FilterMode {
        self.filtering.unwrap_or(if self.graph.num_nodes() <= DEFAULT_DENSE_THRESHOLD {
            FilterMode::Exact
        } else {
            FilterMode::Chebyshev {
                degree: LARGE_GRAPH_DEGREE,
                damping: Damping::None,
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub dataset: Option<PathBuf>,
    pub k: usize,
    pub training: TrainingConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            dataset: None,
            k: 2,
            training: TrainingConfig::default(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dataset.is_none() {
            return Err(Error::Config("missing required flag --dataset".into()));
        }
        if self.k == 0 {
            return Err(Error::param("k must be positive"));
        }
        self.training.validate()
    }
}

/// A source or target generator in a sweep plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub graph: GraphFamily,
    pub regime: SignalRegime,
}

/// Trial list builders, as an alternative to listing trials explicitly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrialPlan {
    Paired {
        source: Generator,
        target: Generator,
        count: usize,
    },
    Mixed {
        families: Vec<GraphFamily>,
        regimes: Vec<SignalRegime>,
        count: usize,
    },
}

impl TrialPlan {
    pub fn trials(&self, seed: u64) -> Result<Vec<TransferTrialSpec>> {
        match self {
            TrialPlan::Paired {
                source,
                target,
                count,
            } => Ok(paired_trials(
                (&source.graph, &source.regime),
                (&target.graph, &target.regime),
                *count,
                seed,
            )),
            TrialPlan::Mixed {
                families,
                regimes,
                count,
            } => mixed_trials(families, regimes, *count, seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferConfig {
    pub experiment: TransferSpec,
    pub plan: Option<TrialPlan>,
    pub seed: u64,
    /// Fail the run when any adaptation changed the baseline network.
    pub verify_freeze: bool,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            experiment: TransferSpec::default(),
            plan: None,
            seed: 0,
            verify_freeze: false,
        }
    }
}

impl TransferConfig {
    /// The experiment with its trial list filled in from the plan.
    pub fn resolved_spec(&self) -> Result<TransferSpec> {
        let mut spec = self.experiment.clone();
        match (&self.plan, spec.trials.is_empty()) {
            (Some(_), false) => {
                return Err(Error::Config(
                    "give either experiment.trials or plan, not both".into(),
                ))
            }
            (None, true) => {
                return Err(Error::Config("no trials: set plan or experiment.trials".into()))
            }
            (Some(plan), true) => spec.trials = plan.trials(self.seed)?,
            (None, false) => {}
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Exact,
    Chebyshev,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub checkpoint: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub mode: EvalMode,
    /// Chebyshev mode only.
    pub degree: usize,
    pub damping: Damping,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            checkpoint: None,
            dataset: None,
            mode: EvalMode::Exact,
            degree: crate::filtering::DEFAULT_CHEBYSHEV_DEGREE,
            damping: Damping::None,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.checkpoint.is_none() {
            return Err(Error::Config("missing required flag --checkpoint".into()));
        }
        if self.dataset.is_none() {
            return Err(Error::Config("missing required flag --dataset".into()));
        }
        if self.degree == 0 {
            return Err(Error::param("degree must be at least 1"));
        }
        Ok(())
    }

    pub fn filter_mode(&self) -> FilterMode {
        match self.mode {
            EvalMode::Exact => FilterMode::Exact,
            EvalMode::Chebyshev => FilterMode::Chebyshev {
                degree: self.degree,
                damping: self.damping,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_nested_tables() {
        let mut v = serde_json::json!({"training": {"epochs": 3}});
        let (k, x) = parse_override("training.learning_rate=0.5").unwrap();
        apply_override(&mut v, &k, x).unwrap();
        let (k, x) = parse_override("graph.family=grid2d").unwrap();
        apply_override(&mut v, &k, x).unwrap();
        assert_eq!(v["training"]["learning_rate"], 0.5);
        assert_eq!(v["training"]["epochs"], 3);
        assert_eq!(v["graph"]["family"], "grid2d");
        assert!(apply_override(&mut v, "training.epochs.x", Value::Null).is_err());
        assert!(parse_override("novalue").is_err());
        assert!(parse_override("a..b=1").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let o = vec![("trianing".to_string(), serde_json::json!({}))];
        assert!(matches!(resolve::<FitConfig>(None, &o), Err(Error::Config(_))));
        let o = vec![("training.epoch".to_string(), serde_json::json!(3))];
        assert!(matches!(resolve::<FitConfig>(None, &o), Err(Error::Config(_))));
    }

    #[test]
    fn toml_and_json_agree() {
        let dir = tempfile::tempdir().unwrap();
        let t = dir.path().join("c.toml");
        let j = dir.path().join("c.json");
        std::fs::write(&t, "k = 3\n[training]\nepochs = 7\n").unwrap();
        std::fs::write(&j, r#"{"k": 3, "training": {"epochs": 7}}"#).unwrap();
        let a: FitConfig = resolve(Some(&t), &[]).unwrap();
        let b: FitConfig = resolve(Some(&j), &[]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.training.epochs, 7);
        std::fs::write(dir.path().join("c.yaml"), "k: 3").unwrap();
        assert!(resolve::<FitConfig>(Some(&dir.path().join("c.yaml")), &[]).is_err());
    }

    #[test]
    fn plan_and_trials_are_exclusive() {
        let g = Generator {
            graph: GraphFamily::ErdosRenyi { n: 16, p: 0.3 },
            regime: SignalRegime::GaussianIid,
        };
        let mut cfg = TransferConfig {
            plan: Some(TrialPlan::Paired {
                source: g.clone(),
                target: g,
                count: 3,
            }),
            ..Default::default()
        };
        let spec = cfg.resolved_spec().unwrap();
        assert_eq!(spec.trials.len(), 3);
        cfg.experiment.trials = spec.trials;
        assert!(cfg.resolved_spec().is_err());
        cfg.plan = None;
        assert!(cfg.resolved_spec().is_ok());
        cfg.experiment.trials.clear();
        assert!(cfg.resolved_spec().is_err());
    }
}
