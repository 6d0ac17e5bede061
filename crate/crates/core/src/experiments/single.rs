use serde::{Deserialize, Serialize};

use super::baselines::MexicanHatBank;
use super::ground_truth::{make_ground_truth_separated, uniform_grid, GroundTruthFilter};
use super::metrics::{mse, spectral_discrepancy};
use super::signals::{make_signals, SignalRegime};
use crate::error::{Error, Result};
use crate::filtering::apply_exact;
use crate::graphs::{
    build_laplacian, decompose, generate_graph, Graph, GraphFamily, LaplacianKind,
    LaplacianOperator, SpectralDecomposition,
};
use crate::kernel::ShapedFilterBank;
use crate::rng::{derive_seed, streams};
use crate::training::{fit, SupervisedDataset, TrainingConfig, TrainingState};

/// Points in response-curve dumps.
pub const RESPONSE_GRID: usize = 512;
const GRAPH_ATTEMPTS: u64 = 100;

/// A generated graph with its Laplacian and eigendecomposition.
#[derive(Clone, Debug)]
pub struct GraphSetup {
    pub graph: Graph,
    pub lap: LaplacianOperator,
    pub decomp: SpectralDecomposition,
    /// Seed that produced `graph` (differs from the requested one after a redraw).
    pub seed: u64,
}

/// Generate a graph and its Laplacian. For the normalized Laplacian, draws
/// with isolated nodes are replaced by fresh draws. Returns the seed used.
pub fn prepare_operator(
    family: &GraphFamily,
    kind: LaplacianKind,
    seed: u64,
) -> Result<(Graph, LaplacianOperator, u64)> {
    for attempt in 0..GRAPH_ATTEMPTS {
        let s = if attempt == 0 { seed } else { derive_seed(seed, attempt) };
        let graph = generate_graph(family, s)?;
        if kind == LaplacianKind::Normalized && graph.degrees().contains(&0) {
            continue;
        }
        let lap = build_laplacian(&graph, kind)?;
        return Ok((graph, lap, s));
    }
    Err(Error::degenerate(format!(
        "no {} draw without isolated nodes after {GRAPH_ATTEMPTS} attempts",
        family.name()
    )))
}

/// As [`prepare_operator`], plus the eigendecomposition.
pub fn prepare_graph(family: &GraphFamily, kind: LaplacianKind, seed: u64) -> Result<GraphSetup> {
    let (graph, lap, seed) = prepare_operator(family, kind, seed)?;
    let decomp = decompose(&lap)?;
    Ok(GraphSetup {
        graph,
        lap,
        decomp,
        seed,
    })
}

/// Inputs and `G*`-filtered targets on one graph.
pub fn make_dataset(
    setup: &GraphSetup,
    truth: &GroundTruthFilter,
    regime: &SignalRegime,
    num_signals: usize,
    seed: u64,
) -> Result<SupervisedDataset> {
    let x = make_signals(regime, &setup.decomp, num_signals, seed)?;
    let y = apply_exact(&setup.decomp, &truth.eval(setup.decomp.eigenvalues()), &x)?;
    SupervisedDataset::new(setup.lap.clone(), setup.decomp.clone(), x, y)
}

/// Vertex-domain MSE of a spectral response on a dataset.
pub fn response_mse(response: &[f64], data: &SupervisedDataset) -> Result<f64> {
    mse(&apply_exact(&data.decomp, response, &data.inputs)?, &data.targets)
}

/// Sampled bank response for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    pub lambdas: Vec<f64>,
    pub total: Vec<f64>,
    pub components: Vec<Vec<f64>>,
}

impl ResponseCurve {
    pub fn of_bank(bank: &ShapedFilterBank, points: usize) -> Self {
        let lambdas = uniform_grid(bank.lambda_max, points);
        ResponseCurve {
            total: bank.eval(&lambdas),
            components: bank.component_responses(&lambdas),
            lambdas,
        }
    }

    /// Rows of `lambda, total, component_1..K`.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.lambdas.len())
            .map(|i| {
                let mut row = vec![self.lambdas[i], self.total[i]];
                row.extend(self.components.iter().map(|c| c[i]));
                row
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleGraphSpec {
    pub graph: GraphFamily,
    pub laplacian: LaplacianKind,
    pub num_peaks: usize,
    /// Minimum distance between target peak centers; `λ_max / (2P)` when unset.
    pub min_peak_separation: Option<f64>,
    pub regime: SignalRegime,
    pub num_signals: usize,
    pub num_test_signals: usize,
    pub k_list: Vec<usize>,
    pub training: TrainingConfig,
    pub seed: u64,
}

impl Default for SingleGraphSpec {
    fn default() -> Self {
        SingleGraphSpec {
            graph: GraphFamily::Grid2D { rows: 4, cols: 8 },
            laplacian: LaplacianKind::Normalized,
            num_peaks: 2,
            min_peak_separation: None,
            regime: SignalRegime::GaussianIid,
            num_signals: 64,
            num_test_signals: 64,
            k_list: vec![1, 2],
            training: TrainingConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub center: f64,
    pub bandwidth: f64,
    pub amplitude: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub train_mse: f64,
    pub test_mse: f64,
    pub spectral_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingleGraphRun {
    pub k: usize,
    pub adaptive: Scores,
    pub components: Vec<ComponentSummary>,
    pub best_epoch: usize,
    pub steps: u64,
    pub mexican_hat_fixed: Scores,
    pub mexican_hat_fitted: Scores,
    #[serde(skip)]
    pub state: TrainingState,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingleGraphResult {
    pub seed: u64,
    pub graph_seed: u64,
    pub lambda_max: f64,
    pub ground_truth: GroundTruthFilter,
    pub runs: Vec<SingleGraphRun>,
}

impl SingleGraphSpec {
    /// Larger training set and stiff baseline; the setting used by the benchmark suite.
    pub fn benchmark() -> Self {
        SingleGraphSpec {
            num_signals: 128,
            training: TrainingConfig::benchmark(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        self.regime.validate()?;
        self.training.validate()?;
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return Err(Error::param("k_list must list positive component counts"));
        }
        if self.num_signals == 0 || self.num_test_signals == 0 {
            return Err(Error::param("signal counts must be positive"));
        }
        Ok(())
    }
}

fn score(response: &[f64], truth: &[f64], train: &SupervisedDataset, test: &SupervisedDataset) -> Result<Scores> {
    Ok(Scores {
        train_mse: response_mse(response, train)?,
        test_mse: response_mse(response, test)?,
        spectral_error: spectral_discrepancy(response, truth)?,
    })
}

/// Fit banks of each size in `k_list` to one random multi-peak target, next to
/// fixed and amplitude-fitted Mexican-hat banks of the same size.
pub fn run_single_graph_experiment(spec: &SingleGraphSpec) -> Result<SingleGraphResult> {
    spec.validate()?;
    let setup = prepare_graph(&spec.graph, spec.laplacian, spec.seed)?;
    let lambda_max = setup.lap.lambda_max();
    let separation = spec
        .min_peak_separation
        .unwrap_or(lambda_max / (2.0 * spec.num_peaks as f64));
    let truth = make_ground_truth_separated(spec.num_peaks, lambda_max, spec.seed, separation)?;
    let train = make_dataset(&setup, &truth, &spec.regime, spec.num_signals, spec.seed)?;
    let test = make_dataset(
        &setup,
        &truth,
        &spec.regime,
        spec.num_test_signals,
        derive_seed(spec.seed, streams::TRIAL),
    )?;
    let eigs = setup.decomp.eigenvalues();
    let truth_on_eigs = truth.eval(eigs);
    let cfg = TrainingConfig {
        seed: spec.seed,
        ..spec.training.clone()
    };

    let mut runs = Vec::with_capacity(spec.k_list.len());
    for &k in &spec.k_list {
        let state = fit(&train, k, &cfg)?;
        let adaptive = score(&state.bank.eval(eigs), &truth_on_eigs, &train, &test)?;
        let fixed = MexicanHatBank::fixed(k, lambda_max)?;
        let fitted = MexicanHatBank::fitted(k, &train)?;
        runs.push(SingleGraphRun {
            k,
            adaptive,
            components: state
                .bank
                .components
                .iter()
                .map(|c| ComponentSummary {
                    center: c.center(state.bank.lambda_max),
                    bandwidth: c.bandwidth(),
                    amplitude: c.amplitude,
                })
                .collect(),
            best_epoch: state.best_epoch,
            steps: state.steps(),
            mexican_hat_fixed: score(&fixed.eval(eigs), &truth_on_eigs, &train, &test)?,
            mexican_hat_fitted: score(&fitted.eval(eigs), &truth_on_eigs, &train, &test)?,
            state,
        });
    }
    Ok(SingleGraphResult {
        seed: spec.seed,
        graph_seed: setup.seed,
        lambda_max,
        ground_truth: truth,
        runs,
    })
}

/// Whether every true peak has its own learned center within `tolerance`.
pub fn centers_recovered(truth: &GroundTruthFilter, learned: &[f64], tolerance: f64) -> bool {
    let n = truth.peaks.len();
    if learned.len() < n {
        return false;
    }
    // brute-force assignment; sizes are tiny
    fn search(truth: &[f64], learned: &[f64], used: &mut Vec<bool>, i: usize, tol: f64) -> bool {
        if i == truth.len() {
            return true;
        }
        for j in 0..learned.len() {
            if !used[j] && (learned[j] - truth[i]).abs() <= tol {
                used[j] = true;
                if search(truth, learned, used, i + 1, tol) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    let centers: Vec<f64> = truth.peaks.iter().map(|p| p.center).collect();
    search(&centers, learned, &mut vec![false; learned.len()], 0, tolerance)
}
