use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{EvalConfig, FitConfig, GenerateConfig, TransferConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    make_ground_truth_separated, make_signals, make_signals_chebyshev, mse, prepare_operator,
    spectral_discrepancy, ComponentSummary, FeatureCorrelation, GroundTruthFilter, ResponseCurve,
    SignalRegime, SimilarityFeatures, TransferSummary, TransferTrial, RESPONSE_GRID,
};
use crate::filtering::{
    apply_chebyshev, apply_exact, filter_bank_apply_with, project_chebyshev, FilterMode,
    SignalBatch,
};
use crate::graphs::{
    build_laplacian, decompose, Graph, GraphDocument, LaplacianKind, LaplacianOperator,
};
use crate::io::{self, MatrixSchema, Provenance};
use crate::training::{fit, CheckpointDocument, SupervisedDataset};

pub const CONFIG_FILE: &str = "config.json";
pub const GRAPH_FILE: &str = "graph.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";
pub const INPUTS_FILE: &str = "inputs.csv";
pub const TARGETS_FILE: &str = "targets.csv";
pub const MANIFEST_FILE: &str = "dataset.json";
pub const SCHEMA_FILE: &str = "schema.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const LOSS_FILE: &str = "loss.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const RESPONSE_FILE: &str = "response.csv";
pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CORRELATIONS_FILE: &str = "correlations.json";
pub const EVAL_FILE: &str = "eval.json";

/// Describes a generated dataset directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub laplacian: LaplacianKind,
    pub num_nodes: usize,
    pub num_signals: usize,
    pub lambda_max: f64,
    pub regime: SignalRegime,
    pub seed: u64,
    pub graph_seed: u64,
    /// How the targets were filtered.
    pub filtering: FilterMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub matrices: Vec<MatrixSchema>,
}

/// A dataset directory read back from disk.
#[derive(Clone, Debug)]
pub struct DatasetFiles {
    pub manifest: DatasetManifest,
    pub graph: Graph,
    pub lap: LaplacianOperator,
    pub inputs: SignalBatch,
    pub targets: SignalBatch,
    pub ground_truth: Option<GroundTruthFilter>,
}

pub fn load_dataset(dir: &Path) -> Result<DatasetFiles> {
    let manifest: DatasetManifest = io::read_json(&dir.join(MANIFEST_FILE))?;
    let graph_path = dir.join(GRAPH_FILE);
    let doc: GraphDocument = io::read_json(&graph_path)?;
    let graph = doc
        .to_graph()
        .map_err(|e| Error::format(&graph_path, e.to_string()))?;
    let lap = build_laplacian(&graph, manifest.laplacian)?;
    let inputs = io::read_matrix(&dir.join(INPUTS_FILE))?;
    let targets = io::read_matrix(&dir.join(TARGETS_FILE))?;
    for (path, b) in [(INPUTS_FILE, &inputs), (TARGETS_FILE, &targets)] {
        if b.num_nodes() != graph.num_nodes() {
            return Err(Error::format(
                dir.join(path),
                format!("{} rows for a graph on {} nodes", b.num_nodes(), graph.num_nodes()),
            ));
        }
    }
    if inputs.num_signals() != targets.num_signals() {
        return Err(Error::format(
            dir.join(TARGETS_FILE),
            "inputs and targets have different signal counts",
        ));
    }
    let gt_path = dir.join(GROUND_TRUTH_FILE);
    let ground_truth = if gt_path.exists() {
        Some(io::read_json(&gt_path)?)
    } else {
        None
    };
    Ok(DatasetFiles {
        manifest,
        graph,
        lap,
        inputs,
        targets,
        ground_truth,
    })
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("missing required flag --{flag}")))
}

/// Graph, ground-truth response, and input/target matrices.
pub fn cmd_generate(cfg: &GenerateConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let prov = Provenance::of(cfg);
    io::create_dir(out)?;
    io::write_json(&out.join(CONFIG_FILE), cfg, &prov)?;

    let (graph, lap, graph_seed) = prepare_operator(&cfg.graph, cfg.laplacian, cfg.seed)?;
    let lambda_max = lap.lambda_max();
    let separation = cfg
        .min_peak_separation
        .unwrap_or(lambda_max / (2.0 * cfg.num_peaks as f64));
    let truth = make_ground_truth_separated(cfg.num_peaks, lambda_max, cfg.seed, separation)?;
    let mode = cfg.filter_mode();
    let (inputs, targets) = match mode {
        FilterMode::Exact => {
            let decomp = decompose(&lap)?;
            let x = make_signals(&cfg.regime, &decomp, cfg.num_signals, cfg.seed)?;
            let y = apply_exact(&decomp, &truth.eval(decomp.eigenvalues()), &x)?;
            (x, y)
        }
        FilterMode::Chebyshev { degree, damping } => {
            let x = make_signals_chebyshev(&cfg.regime, &lap, cfg.num_signals, cfg.seed, degree)?;
            let f = project_chebyshev(|l| truth.eval_one(l), lambda_max, degree, None, damping)?;
            let y = apply_chebyshev(&f, &lap, &x)?;
            (x, y)
        }
    };
    log::info!(
        "generated {} on {} nodes, {} edges, lambda_max {lambda_max:.6}",
        cfg.graph.name(),
        graph.num_nodes(),
        graph.num_edges()
    );

    io::write_json(
        &out.join(GRAPH_FILE),
        &GraphDocument::new(&graph, &cfg.graph, graph_seed),
        &prov,
    )?;
    io::write_json(&out.join(GROUND_TRUTH_FILE), &truth, &prov)?;
    io::write_matrix(&out.join(INPUTS_FILE), &inputs, &prov)?;
    io::write_matrix(&out.join(TARGETS_FILE), &targets, &prov)?;
    let manifest = DatasetManifest {
        laplacian: cfg.laplacian,
        num_nodes: graph.num_nodes(),
        num_signals: cfg.num_signals,
        lambda_max,
        regime: cfg.regime,
        seed: cfg.seed,
        graph_seed,
        filtering: mode,
    };
    io::write_json(&out.join(MANIFEST_FILE), &manifest, &prov)?;
    let schema = Schema {
        matrices: vec![
            MatrixSchema::signals(INPUTS_FILE, &inputs, "input signals"),
            MatrixSchema::signals(TARGETS_FILE, &targets, "ground-truth filtered signals"),
        ],
    };
    io::write_json(&out.join(SCHEMA_FILE), &schema, &prov)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub k: usize,
    pub num_signals: usize,
    pub lambda_max: f64,
    /// Vertex-domain MSE of the returned bank on the training set.
    pub train_mse: f64,
    /// `None` when the dataset has no ground-truth response.
    pub spectral_error: Option<f64>,
    pub best_epoch: usize,
    pub steps: u64,
    pub components: Vec<ComponentSummary>,
}

/// Train one bank on a dataset directory.
pub fn cmd_fit(cfg: &FitConfig, out: &Path) -> Result<FitMetrics> {
    cfg.validate()?;
    let data = load_dataset(required(&cfg.dataset, "dataset")?)?;
    let prov = Provenance::of(cfg);
    io::create_dir(out)?;
    io::write_json(&out.join(CONFIG_FILE), cfg, &prov)?;

    let decomp = decompose(&data.lap)?;
    let ds = SupervisedDataset::new(data.lap, decomp, data.inputs, data.targets)?;
    let state = fit(&ds, cfg.k, &cfg.training)?;
    let eigs = ds.eigenvalues();
    let response = state.bank.eval(eigs);
    let train_mse = mse(&apply_exact(&ds.decomp, &response, &ds.inputs)?, &ds.targets)?;
    let spectral_error = match &data.ground_truth {
        Some(t) => Some(spectral_discrepancy(&response, &t.eval(eigs))?),
        None => None,
    };
    let lambda_max = state.bank.lambda_max;
    let metrics = FitMetrics {
        k: cfg.k,
        num_signals: ds.num_signals(),
        lambda_max,
        train_mse,
        spectral_error,
        best_epoch: state.best_epoch,
        steps: state.steps(),
        components: state
            .bank
            .components
            .iter()
            .map(|c| ComponentSummary {
                center: c.center(lambda_max),
                bandwidth: c.bandwidth(),
                amplitude: c.amplitude,
            })
            .collect(),
    };
    log::info!(
        "K={} train MSE {:.6e}, best epoch {}",
        cfg.k,
        train_mse,
        state.best_epoch
    );

    io::write_json(
        &out.join(CHECKPOINT_FILE),
        &CheckpointDocument::from_state(&state),
        &prov,
    )?;
    let f = io::format_f64;
    io::write_table(
        &out.join(LOSS_FILE),
        &["epoch", "total", "data", "smooth", "shape"],
        state.history.iter().map(|r| {
            vec![r.epoch.to_string(), f(r.total), f(r.data), f(r.smooth), f(r.shape)]
        }),
        &prov,
    )?;
    let curve = ResponseCurve::of_bank(&state.bank, RESPONSE_GRID);
    let mut header = vec!["lambda".to_string(), "response_total".to_string()];
    header.extend((1..=cfg.k).map(|i| format!("response_component_{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    io::write_table(
        &out.join(RESPONSE_FILE),
        &header,
        curve.rows().into_iter().map(|r| r.into_iter().map(f)),
        &prov,
    )?;
    io::write_json(&out.join(METRICS_FILE), &metrics, &prov)?;
    Ok(metrics)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreezeReport {
    pub trials_checked: usize,
    pub all_unchanged: bool,
    /// Indices of trials whose baseline fingerprint changed during adaptation.
    pub changed: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryDocument {
    #[serde(flatten)]
    pub summary: TransferSummary,
    pub freeze: FreezeReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationDocument {
    pub target: String,
    pub correlations: Vec<FeatureCorrelation>,
}

fn trial_row(t: &TransferTrial) -> Vec<String> {
    let f = io::format_f64;
    let mut row = vec![
        t.index.to_string(),
        t.source.graph.name().to_string(),
        t.source.regime.name().to_string(),
        t.source.seed.to_string(),
        t.target.graph.name().to_string(),
        t.target.regime.name().to_string(),
        t.target.seed.to_string(),
        t.same_family.to_string(),
        t.same_regime.to_string(),
        t.k.to_string(),
        t.source_signals.to_string(),
        t.target_signals.to_string(),
        f(t.mse_before),
        f(t.mse_after),
        f(t.mse_scratch),
        f(t.improvement),
        f(t.normalized_improvement),
        f(t.transfer_gain),
        f(t.test_mse_before),
        f(t.test_mse_after),
        f(t.test_mse_scratch),
        t.adapt_steps.to_string(),
        t.scratch_steps.to_string(),
        t.baseline_before.clone(),
        t.baseline_after.clone(),
        t.baseline_unchanged().to_string(),
    ];
    row.extend(t.features.values().into_iter().map(f));
    row
}

pub const TRIAL_COLUMNS: [&str; 26] = [
    "index",
    "source_family",
    "source_regime",
    "source_seed",
    "target_family",
    "target_regime",
    "target_seed",
    "same_family",
    "same_regime",
    "k",
    "source_signals",
    "target_signals",
    "mse_before",
    "mse_after",
    "mse_scratch",
    "improvement",
    "normalized_improvement",
    "transfer_gain",
    "test_mse_before",
    "test_mse_after",
    "test_mse_scratch",
    "adapt_steps",
    "scratch_steps",
    "baseline_before",
    "baseline_after",
    "baseline_unchanged",
];

/// Pretrain, adapt and score every trial of a sweep.
pub fn cmd_transfer(cfg: &TransferConfig, out: &Path, jobs: usize) -> Result<SummaryDocument> {
    let spec = cfg.resolved_spec()?;
    let prov = Provenance::of(cfg);
    io::create_dir(out)?;
    io::write_json(&out.join(CONFIG_FILE), cfg, &prov)?;

    let result = crate::experiments::run_transfer_experiment(&spec, jobs)?;
    let changed: Vec<usize> = result
        .trials
        .iter()
        .filter(|t| !t.baseline_unchanged())
        .map(|t| t.index)
        .collect();
    let doc = SummaryDocument {
        summary: result.summary.clone(),
        freeze: FreezeReport {
            trials_checked: result.trials.len(),
            all_unchanged: changed.is_empty(),
            changed,
        },
    };
    log::info!(
        "{} trials, mean improvement {:.4} ± {:.4}",
        doc.summary.trials,
        doc.summary.mean_improvement,
        doc.summary.stderr_improvement
    );

    let mut header: Vec<&str> = TRIAL_COLUMNS.to_vec();
    header.extend(SimilarityFeatures::NAMES);
    io::write_table(
        &out.join(TRIALS_FILE),
        &header,
        result.trials.iter().map(trial_row),
        &prov,
    )?;
    io::write_json(&out.join(SUMMARY_FILE), &doc, &prov)?;
    io::write_json(
        &out.join(CORRELATIONS_FILE),
        &CorrelationDocument {
            target: "normalized_improvement".into(),
            correlations: result.correlations,
        },
        &prov,
    )?;
    if cfg.verify_freeze && !doc.freeze.all_unchanged {
        return Err(Error::contract(format!(
            "baseline changed during adaptation in trials {:?}",
            doc.freeze.changed
        )));
    }
    Ok(doc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub filtering: FilterMode,
    pub num_nodes: usize,
    pub num_signals: usize,
    pub mse: f64,
    /// Exact mode with a ground-truth response only.
    pub spectral_error: Option<f64>,
    pub checkpoint_lambda_max: f64,
    pub graph_lambda_max: f64,
}

/// Score a checkpoint on any dataset, exactly or through a Chebyshev expansion.
pub fn cmd_eval(cfg: &EvalConfig, out: &Path) -> Result<EvalReport> {
    cfg.validate()?;
    let ckpt_path = required(&cfg.checkpoint, "checkpoint")?;
    let ckpt: CheckpointDocument = io::read_json(ckpt_path)?;
    let bank = ckpt
        .bank()
        .map_err(|e| Error::format(ckpt_path, e.to_string()))?;
    let data = load_dataset(required(&cfg.dataset, "dataset")?)?;
    let prov = Provenance::of(cfg);
    io::create_dir(out)?;
    io::write_json(&out.join(CONFIG_FILE), cfg, &prov)?;

    let graph_lambda_max = data.lap.lambda_max();
    if (bank.lambda_max - graph_lambda_max).abs() > 1e-9 * graph_lambda_max.max(1.0) {
        log::warn!(
            "checkpoint lambda_max {} differs from the dataset's {}",
            bank.lambda_max,
            graph_lambda_max
        );
    }
    let mode = cfg.filter_mode();
    let (predicted, spectral_error) = match mode {
        FilterMode::Exact => {
            let decomp = decompose(&data.lap)?;
            let response = bank.eval(decomp.eigenvalues());
            let e = match &data.ground_truth {
                Some(t) => Some(spectral_discrepancy(&response, &t.eval(decomp.eigenvalues()))?),
                None => None,
            };
            (apply_exact(&decomp, &response, &data.inputs)?, e)
        }
        FilterMode::Chebyshev { .. } => (
            filter_bank_apply_with(&bank, &data.lap, None, &data.inputs, mode)?,
            None,
        ),
    };
    let report = EvalReport {
        filtering: mode,
        num_nodes: data.graph.num_nodes(),
        num_signals: data.inputs.num_signals(),
        mse: mse(&predicted, &data.targets)?,
        spectral_error,
        checkpoint_lambda_max: bank.lambda_max,
        graph_lambda_max,
    };
    log::info!("MSE {:.6e}", report.mse);
    io::write_json(&out.join(EVAL_FILE), &report, &prov)?;
    Ok(report)
}
