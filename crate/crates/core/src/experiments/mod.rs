//! Synthetic targets and signals, error metrics, and the single-graph and
//! transfer protocols.

mod baselines;
mod ground_truth;
mod metrics;
mod signals;
mod similarity;
mod single;
mod transfer;

pub use baselines::{mexican_hat_atom, MexicanHatBank};
pub use ground_truth::{
    count_local_maxima, make_ground_truth, make_ground_truth_separated, uniform_grid,
    GroundTruthFilter, Normalization, Peak, GROUND_TRUTH_GRID,
};
pub use metrics::{improvement, mean_and_stderr, mse, pearson, spectral_discrepancy};
pub use signals::{make_signals, make_signals_chebyshev, SignalRegime};
pub use similarity::{
    ratio_similarity, resample, similarity_features, spectral_distance, spectral_energy,
    SimilarityFeatures, HISTOGRAM_BINS,
};
pub use single::{
    centers_recovered, make_dataset, prepare_graph, prepare_operator, response_mse, run_single_graph_experiment,
    ComponentSummary, GraphSetup, ResponseCurve, Scores, SingleGraphResult, SingleGraphRun,
    SingleGraphSpec, RESPONSE_GRID,
};
pub use transfer::{
    baseline_fingerprint, mixed_trials, paired_trials, run_transfer_experiment,
    run_transfer_trial, ClassSummary, FeatureCorrelation, GroundTruthSharing, SideSpec, TransferResult,
    TransferSpec, TransferSummary, TransferTrial, TransferTrialSpec,
};
