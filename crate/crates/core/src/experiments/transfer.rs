use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ground_truth::{make_ground_truth, GroundTruthFilter, Peak};
use super::metrics::{improvement, mean_and_stderr, pearson};
use super::similarity::{similarity_features, SimilarityFeatures};
use super::single::{make_dataset, prepare_graph, response_mse};
use super::signals::SignalRegime;
use crate::error::{Error, Result};
use crate::graphs::{GraphFamily, LaplacianKind};
use crate::kernel::ShapedFilterBank;
use crate::rng::{derive_seed, rng_from_seed, streams};
use crate::training::{fit, tass_adapt, TrainingConfig};

/// How the target-side response relates to the source-side one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruthSharing {
    /// Each side draws its own response from its own seed.
    #[default]
    Independent,
    /// The source response stretched so `[0, λ_max]` maps onto the target's range.
    Rescaled,
    /// The source response as a function of absolute frequency.
    Absolute,
}

/// One side of a transfer pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideSpec {
    pub graph: GraphFamily,
    pub regime: SignalRegime,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferTrialSpec {
    pub source: SideSpec,
    pub target: SideSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferSpec {
    pub laplacian: LaplacianKind,
    pub k: usize,
    pub num_peaks: usize,
    pub source_signals: usize,
    pub target_signals: usize,
    pub test_signals: usize,
    pub ground_truth: GroundTruthSharing,
    pub pretrain: TrainingConfig,
    pub adapt: TrainingConfig,
    pub trials: Vec<TransferTrialSpec>,
}

impl Default for TransferSpec {
    fn default() -> Self {
        TransferSpec {
            laplacian: LaplacianKind::Normalized,
            k: 4,
            num_peaks: 2,
            source_signals: 256,
            target_signals: 16,
            test_signals: 64,
            ground_truth: GroundTruthSharing::Independent,
            pretrain: TrainingConfig {
                epochs: 100,
                ..Default::default()
            },
            adapt: TrainingConfig {
                epochs: 200,
                ..Default::default()
            },
            trials: Vec::new(),
        }
    }
}

impl TransferSpec {
    /// Combinatorial Laplacian, one response shared across both sides, and the
    /// source shaping components carried into adaptation.
    pub fn benchmark(trials: Vec<TransferTrialSpec>) -> Self {
        TransferSpec {
            laplacian: LaplacianKind::Combinatorial,
            source_signals: 128,
            ground_truth: GroundTruthSharing::Rescaled,
            pretrain: TrainingConfig {
                epochs: 100,
                ..TrainingConfig::benchmark()
            },
            adapt: TrainingConfig {
                epochs: 200,
                carry_over_shaping: true,
                ..TrainingConfig::benchmark()
            },
            trials,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pretrain.validate()?;
        self.adapt.validate()?;
        if self.k == 0 {
            return Err(Error::param("k must be positive"));
        }
        if self.source_signals == 0 || self.target_signals == 0 || self.test_signals == 0 {
            return Err(Error::param("signal counts must be positive"));
        }
        for t in &self.trials {
            for side in [&t.source, &t.target] {
                side.graph.validate()?;
                side.regime.validate()?;
            }
        }
        Ok(())
    }
}

/// `count` pairs with fixed source/target generators and per-trial seeds.
pub fn paired_trials(
    source: (&GraphFamily, &SignalRegime),
    target: (&GraphFamily, &SignalRegime),
    count: usize,
    seed: u64,
) -> Vec<TransferTrialSpec> {
    (0..count as u64)
        .map(|i| {
            let trial = derive_seed(seed, i);
            TransferTrialSpec {
                source: SideSpec {
                    graph: source.0.clone(),
                    regime: *source.1,
                    seed: derive_seed(trial, 1),
                },
                target: SideSpec {
                    graph: target.0.clone(),
                    regime: *target.1,
                    seed: derive_seed(trial, 2),
                },
            }
        })
        .collect()
}

/// `count` pairs with generators and regimes drawn uniformly from the given lists.
pub fn mixed_trials(
    families: &[GraphFamily],
    regimes: &[SignalRegime],
    count: usize,
    seed: u64,
) -> Result<Vec<TransferTrialSpec>> {
    if families.is_empty() || regimes.is_empty() {
        return Err(Error::param("mixed sweep needs families and regimes"));
    }
    let mut rng = rng_from_seed(derive_seed(seed, streams::TRIAL));
    Ok((0..count as u64)
        .map(|i| {
            let trial = derive_seed(seed, i);
            let mut side = |s| SideSpec {
                graph: families.choose(&mut rng).expect("nonempty").clone(),
                regime: *regimes.choose(&mut rng).expect("nonempty"),
                seed: derive_seed(trial, s),
            };
            let source = side(1);
            let target = side(2);
            TransferTrialSpec { source, target }
        })
        .collect())
}

/// Hex SHA-256 of the baseline network's parameter bits.
pub fn baseline_fingerprint(bank: &ShapedFilterBank) -> String {
    let mut h = Sha256::new();
    for layer in bank.baseline.layers() {
        for v in layer.weights.iter().chain(&layer.biases) {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferTrial {
    pub index: usize,
    pub source: SideSpec,
    pub target: SideSpec,
    pub same_family: bool,
    pub same_regime: bool,
    pub k: usize,
    pub source_signals: usize,
    pub target_signals: usize,
    pub mse_before: f64,
    pub mse_after: f64,
    pub mse_scratch: f64,
    pub improvement: f64,
    /// Improvement divided by the mean |improvement| of the trial's class.
    pub normalized_improvement: f64,
    /// `(scratch - after) / scratch` on held-out target signals.
    pub transfer_gain: f64,
    pub test_mse_before: f64,
    pub test_mse_after: f64,
    pub test_mse_scratch: f64,
    pub adapt_steps: u64,
    pub scratch_steps: u64,
    pub baseline_before: String,
    pub baseline_after: String,
    pub features: SimilarityFeatures,
}

impl TransferTrial {
    pub fn baseline_unchanged(&self) -> bool {
        self.baseline_before == self.baseline_after
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassSummary {
    pub same_family: bool,
    pub same_regime: bool,
    pub size: usize,
    pub mean_improvement: f64,
    pub stderr_improvement: f64,
    pub mean_abs_improvement: f64,
    pub mean_transfer_gain: f64,
    pub stderr_transfer_gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureCorrelation {
    pub feature: String,
    pub pearson: f64,
    pub defined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferSummary {
    pub trials: usize,
    pub mean_improvement: f64,
    pub stderr_improvement: f64,
    pub mean_abs_improvement: f64,
    pub classes: Vec<ClassSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferResult {
    pub trials: Vec<TransferTrial>,
    pub summary: TransferSummary,
    pub correlations: Vec<FeatureCorrelation>,
}

fn target_truth(
    spec: &TransferSpec,
    side: &SideSpec,
    lambda_max: f64,
    source: &GroundTruthFilter,
) -> Result<GroundTruthFilter> {
    match spec.ground_truth {
        GroundTruthSharing::Independent => make_ground_truth(spec.num_peaks, lambda_max, side.seed),
        GroundTruthSharing::Absolute => Ok(source.clone()),
        GroundTruthSharing::Rescaled => {
            let s = lambda_max / source.lambda_max;
            let peaks = source
                .peaks
                .iter()
                .map(|p| Peak {
                    center: p.center * s,
                    width: p.width * s,
                    height: p.height,
                })
                .collect();
            GroundTruthFilter::new(peaks, lambda_max)
        }
    }
}

/// Pretrain on the source, adapt on the target, and train from scratch on the
/// target with the same number of steps.
pub fn run_transfer_trial(spec: &TransferSpec, index: usize, trial: &TransferTrialSpec) -> Result<TransferTrial> {
    let src = prepare_graph(&trial.source.graph, spec.laplacian, trial.source.seed)?;
    let src_truth = make_ground_truth(spec.num_peaks, src.lap.lambda_max(), trial.source.seed)?;
    let src_data = make_dataset(&src, &src_truth, &trial.source.regime, spec.source_signals, trial.source.seed)?;
    let pretrain_cfg = TrainingConfig {
        seed: trial.source.seed,
        ..spec.pretrain.clone()
    };
    let pretrained = fit(&src_data, spec.k, &pretrain_cfg)?;

    let tgt = prepare_graph(&trial.target.graph, spec.laplacian, trial.target.seed)?;
    let tgt_truth = target_truth(spec, &trial.target, tgt.lap.lambda_max(), &src_truth)?;
    let tgt_data = make_dataset(&tgt, &tgt_truth, &trial.target.regime, spec.target_signals, trial.target.seed)?;
    let tgt_test = make_dataset(
        &tgt,
        &tgt_truth,
        &trial.target.regime,
        spec.test_signals,
        derive_seed(trial.target.seed, streams::TRIAL),
    )?;
    let adapt_cfg = TrainingConfig {
        seed: trial.target.seed,
        ..spec.adapt.clone()
    };
    let adapted = tass_adapt(&pretrained.bank, &tgt_data, &adapt_cfg)?;
    let scratch = fit(&tgt_data, spec.k, &adapt_cfg)?;

    let eigs = tgt.decomp.eigenvalues();
    let zero_shot = crate::training::zero_shot_bank(&pretrained.bank, tgt.lap.lambda_max())?;
    let test_before = response_mse(&zero_shot.eval(eigs), &tgt_test)?;
    let test_after = response_mse(&adapted.state.bank.eval(eigs), &tgt_test)?;
    let test_scratch = response_mse(&scratch.bank.eval(eigs), &tgt_test)?;
    let mse_scratch = tgt_data.bank_mse(&scratch.bank);

    Ok(TransferTrial {
        index,
        same_family: trial.source.graph.name() == trial.target.graph.name(),
        same_regime: trial.source.regime.name() == trial.target.regime.name(),
        source: trial.source.clone(),
        target: trial.target.clone(),
        k: spec.k,
        source_signals: spec.source_signals,
        target_signals: spec.target_signals,
        mse_before: adapted.mse_before,
        mse_after: adapted.mse_after,
        mse_scratch,
        improvement: adapted.improvement,
        normalized_improvement: 0.0,
        transfer_gain: improvement(test_scratch, test_after)?,
        test_mse_before: test_before,
        test_mse_after: test_after,
        test_mse_scratch: test_scratch,
        adapt_steps: adapted.state.steps(),
        scratch_steps: scratch.steps(),
        baseline_before: baseline_fingerprint(&pretrained.bank),
        baseline_after: baseline_fingerprint(&adapted.state.bank),
        features: similarity_features(
            (&src.graph, &src.decomp, &src_data.inputs),
            (&tgt.graph, &tgt.decomp, &tgt_data.inputs),
        ),
    })
}

fn summarize(trials: &mut [TransferTrial]) -> (TransferSummary, Vec<FeatureCorrelation>) {
    let mut classes = Vec::new();
    for same_family in [true, false] {
        for same_regime in [true, false] {
            let members: Vec<usize> = (0..trials.len())
                .filter(|&i| trials[i].same_family == same_family && trials[i].same_regime == same_regime)
                .collect();
            if members.is_empty() {
                continue;
            }
            let imps: Vec<f64> = members.iter().map(|&i| trials[i].improvement).collect();
            let gains: Vec<f64> = members.iter().map(|&i| trials[i].transfer_gain).collect();
            let mean_abs = imps.iter().map(|v| v.abs()).sum::<f64>() / imps.len() as f64;
            for &i in &members {
                trials[i].normalized_improvement = if mean_abs > 0.0 {
                    trials[i].improvement / mean_abs
                } else {
                    0.0
                };
            }
            let (mi, si) = mean_and_stderr(&imps);
            let (mg, sg) = mean_and_stderr(&gains);
            classes.push(ClassSummary {
                same_family,
                same_regime,
                size: members.len(),
                mean_improvement: mi,
                stderr_improvement: si,
                mean_abs_improvement: mean_abs,
                mean_transfer_gain: mg,
                stderr_transfer_gain: sg,
            });
        }
    }
    let imps: Vec<f64> = trials.iter().map(|t| t.improvement).collect();
    let (mean, se) = mean_and_stderr(&imps);
    let summary = TransferSummary {
        trials: trials.len(),
        mean_improvement: mean,
        stderr_improvement: se,
        mean_abs_improvement: imps.iter().map(|v| v.abs()).sum::<f64>() / imps.len().max(1) as f64,
        classes,
    };
    let normalized: Vec<f64> = trials.iter().map(|t| t.normalized_improvement).collect();
    let correlations = SimilarityFeatures::NAMES
        .iter()
        .enumerate()
        .map(|(f, name)| {
            let values: Vec<f64> = trials.iter().map(|t| t.features.values()[f]).collect();
            let r = pearson(&values, &normalized);
            FeatureCorrelation {
                feature: name.to_string(),
                pearson: r.unwrap_or(0.0),
                defined: r.is_some(),
            }
        })
        .collect();
    (summary, correlations)
}

/// Run every trial, on up to `jobs` threads; results are in trial order and
/// independent of `jobs`.
pub fn run_transfer_experiment(spec: &TransferSpec, jobs: usize) -> Result<TransferResult> {
    spec.validate()?;
    if spec.trials.is_empty() {
        return Err(Error::param("transfer spec lists no trials"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<TransferTrial>> = pool.install(|| {
        spec.trials
            .par_iter()
            .enumerate()
            .map(|(i, t)| run_transfer_trial(spec, i, t))
            .collect()
    });
    let mut trials = results.into_iter().collect::<Result<Vec<_>>>()?;
    let (summary, correlations) = summarize(&mut trials);
    Ok(TransferResult {
        trials,
        summary,
        correlations,
    })
}
