//! Objective, optimizer, single-graph fitting, and freeze-and-adapt transfer.
//!
//! Training works in the spectral domain of a fixed dataset: signals are
//! projected once onto the eigenbasis, so the data term
//! `Σ_i ‖G(L) x_i - y_i‖²` becomes `Σ_i Σ_j (G(λ_j) x̂_ij - ŷ_ij)²` and only
//! the bank response on the `N` eigenvalues is needed per step.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::SignalBatch;
use crate::graphs::{LaplacianOperator, SpectralDecomposition};
use crate::kernel::{
    init_bank, Activation, BankDocument, ParamRole, ParameterGradient, ShapedFilterBank,
    ShapingComponent, DEFAULT_LAYER_SIZES,
};
use crate::rng::{derive_seed, rng_from_seed, streams};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Weight of the baseline smoothness penalty.
    pub alpha: f64,
    /// Weight of the amplitude penalty.
    pub beta: f64,
    /// Decoupled weight decay, applied to baseline weight matrices only.
    pub weight_decay: f64,
    /// Uniform grid on `[0, λ_max]` for the smoothness penalty.
    pub grid_points: usize,
    pub seed: u64,
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    /// Return the bank with the lowest full-training-set MSE seen at epoch boundaries.
    pub early_best: bool,
    /// Transfer only: keep the source shaping parameters instead of re-initializing.
    pub carry_over_shaping: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 1e-3,
            batch_size: 8,
            epochs: 500,
            alpha: 1e-3,
            beta: 1e-4,
            weight_decay: 1e-2,
            grid_points: 64,
            seed: 0,
            layer_sizes: DEFAULT_LAYER_SIZES.to_vec(),
            activation: Activation::Tanh,
            early_best: true,
            carry_over_shaping: false,
        }
    }
}

impl TrainingConfig {
    /// Smoothness weight used by the benchmark presets.
    pub const STIFF_ALPHA: f64 = 1e6;

    /// Defaults with a smoothness weight large enough to dominate the data term,
    /// so the baseline stays flat and the peaks land in the shaping components.
    pub fn benchmark() -> Self {
        TrainingConfig {
            alpha: Self::STIFF_ALPHA,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("weight_decay", self.weight_decay),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::param("learning_rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size must be at least 1"));
        }
        if self.grid_points < 3 {
            return Err(Error::param("grid_points must be at least 3"));
        }
        Ok(())
    }
}

/// Trainable flags per component group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentMask {
    pub mu: bool,
    pub gamma: bool,
    pub amplitude: bool,
}

/// Which parameters an optimizer step may change.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreezeMask {
    pub baseline_frozen: bool,
    pub components: Vec<ComponentMask>,
}

impl FreezeMask {
    pub fn all_trainable(k: usize) -> Self {
        FreezeMask {
            baseline_frozen: false,
            components: vec![
                ComponentMask {
                    mu: true,
                    gamma: true,
                    amplitude: true,
                };
                k
            ],
        }
    }

    /// Baseline frozen, every shaping parameter trainable.
    pub fn transfer(k: usize) -> Self {
        FreezeMask {
            baseline_frozen: true,
            ..FreezeMask::all_trainable(k)
        }
    }

    fn trainable(&self, roles: &[ParamRole]) -> Vec<bool> {
        roles
            .iter()
            .map(|role| match *role {
                ParamRole::BaselineWeight { .. } | ParamRole::BaselineBias { .. } => {
                    !self.baseline_frozen
                }
                ParamRole::Center { component } => self.components[component].mu,
                ParamRole::Bandwidth { component } => self.components[component].gamma,
                ParamRole::Amplitude { component } => self.components[component].amplitude,
            })
            .collect()
    }
}

/// Decoupled-weight-decay Adam over a flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamW {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step: u64,
}

impl AdamW {
    pub fn new(num_params: usize) -> Self {
        AdamW {
            first_moment: vec![0.0; num_params],
            second_moment: vec![0.0; num_params],
            step: 0,
        }
    }

    /// One update. Entries with `trainable[i] == false` keep their parameter and
    /// moments bit-for-bit; `decay[i]` selects which entries see weight decay.
    pub fn step(
        &mut self,
        params: &mut [f64],
        grads: &[f64],
        trainable: &[bool],
        decay: &[bool],
        learning_rate: f64,
        weight_decay: f64,
    ) -> Result<()> {
        let n = self.first_moment.len();
        if [params.len(), grads.len(), trainable.len(), decay.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::contract("optimizer buffers and gradient differ in length"));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - ADAM_BETA1.powi(t);
        let bc2 = 1.0 - ADAM_BETA2.powi(t);
        for i in 0..n {
            if !trainable[i] {
                continue;
            }
            let g = grads[i];
            if decay[i] {
                params[i] *= 1.0 - learning_rate * weight_decay;
            }
            let m = ADAM_BETA1 * self.first_moment[i] + (1.0 - ADAM_BETA1) * g;
            let v = ADAM_BETA2 * self.second_moment[i] + (1.0 - ADAM_BETA2) * g * g;
            self.first_moment[i] = m;
            self.second_moment[i] = v;
            params[i] -= learning_rate * (m / bc1) / ((v / bc2).sqrt() + ADAM_EPS);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossParts {
    pub total: f64,
    pub data: f64,
    pub smooth: f64,
    pub shape: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub epoch: usize,
    pub total: f64,
    pub data: f64,
    pub smooth: f64,
    pub shape: f64,
}

#[derive(Clone, Debug)]
pub struct TrainingState {
    pub bank: ShapedFilterBank,
    pub optimizer: AdamW,
    pub history: Vec<LossRecord>,
    /// Epoch whose bank was kept (0 is the starting bank).
    pub best_epoch: usize,
    pub best_mse: f64,
}

impl TrainingState {
    pub fn new(bank: ShapedFilterBank) -> Self {
        let n = bank.num_params();
        TrainingState {
            bank,
            optimizer: AdamW::new(n),
            history: Vec::new(),
            best_epoch: 0,
            best_mse: f64::INFINITY,
        }
    }

    /// Optimizer steps taken.
    pub fn steps(&self) -> u64 {
        self.optimizer.step
    }
}

/// One optimizer step on a state. Weight decay touches baseline weight matrices only.
pub fn adamw_step(
    state: &mut TrainingState,
    grad: &ParameterGradient,
    mask: &FreezeMask,
    cfg: &TrainingConfig,
) -> Result<()> {
    let roles = state.bank.param_roles();
    if mask.components.len() != state.bank.num_components() {
        return Err(Error::contract("freeze mask does not match the bank's component count"));
    }
    let flat_grad = grad.flatten();
    if flat_grad.len() != roles.len() {
        return Err(Error::contract("gradient does not match the bank's parameter layout"));
    }
    let trainable = mask.trainable(&roles);
    let decay: Vec<bool> = roles
        .iter()
        .map(|r| matches!(r, ParamRole::BaselineWeight { .. }))
        .collect();
    let mut params = state.bank.params();
    state.optimizer.step(
        &mut params,
        &flat_grad,
        &trainable,
        &decay,
        cfg.learning_rate,
        cfg.weight_decay,
    )?;
    state.bank.set_params(&params)
}

/// Training pairs on one graph, with their spectral coefficients cached.
#[derive(Clone, Debug)]
pub struct SupervisedDataset {
    pub lap: LaplacianOperator,
    pub decomp: SpectralDecomposition,
    pub inputs: SignalBatch,
    pub targets: SignalBatch,
    input_coeffs: Vec<Vec<f64>>,
    target_coeffs: Vec<Vec<f64>>,
}

impl SupervisedDataset {
    pub fn new(
        lap: LaplacianOperator,
        decomp: SpectralDecomposition,
        inputs: SignalBatch,
        targets: SignalBatch,
    ) -> Result<Self> {
        let n = lap.num_nodes();
        if decomp.num_nodes() != n || inputs.num_nodes() != n || targets.num_nodes() != n {
            return Err(Error::contract("dataset pieces disagree on the number of nodes"));
        }
        if inputs.num_signals() != targets.num_signals() {
            return Err(Error::contract("inputs and targets have different signal counts"));
        }
        if inputs.num_signals() == 0 {
            return Err(Error::contract("dataset has no signals"));
        }
        let input_coeffs = inputs.columns().map(|c| decomp.analysis(c)).collect();
        let target_coeffs = targets.columns().map(|c| decomp.analysis(c)).collect();
        Ok(SupervisedDataset {
            lap,
            decomp,
            inputs,
            targets,
            input_coeffs,
            target_coeffs,
        })
    }

    pub fn num_signals(&self) -> usize {
        self.inputs.num_signals()
    }

    pub fn lambda_max(&self) -> f64 {
        self.lap.lambda_max()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.decomp.eigenvalues()
    }

    /// Spectral coefficients `(x̂_i, ŷ_i)` of each training pair.
    pub fn spectral_pairs(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.input_coeffs
            .iter()
            .zip(&self.target_coeffs)
            .map(|(x, y)| (x.as_slice(), y.as_slice()))
    }

    /// Mean over all signals of `‖G(L) x_i - y_i‖²` for a response on the eigenvalues.
    pub fn spectral_mse(&self, response: &[f64]) -> f64 {
        let total: f64 = self
            .input_coeffs
            .iter()
            .zip(&self.target_coeffs)
            .map(|(x, y)| sq_residual(response, x, y))
            .sum();
        total / self.num_signals() as f64
    }

    pub fn bank_mse(&self, bank: &ShapedFilterBank) -> f64 {
        self.spectral_mse(&bank.eval(self.eigenvalues()))
    }
}

fn sq_residual(response: &[f64], x: &[f64], y: &[f64]) -> f64 {
    response
        .iter()
        .zip(x)
        .zip(y)
        .map(|((g, xi), yi)| {
            let r = g * xi - yi;
            r * r
        })
        .sum()
}

/// Evaluates the objective on minibatches, caching what stays fixed.
struct Objective<'a> {
    data: &'a SupervisedDataset,
    grid_inputs: Vec<f64>,
    /// Baseline on the eigenvalues and smoothness penalty while the baseline is frozen.
    frozen: Option<(Vec<f64>, f64)>,
}

impl<'a> Objective<'a> {
    fn new(data: &'a SupervisedDataset, cfg: &TrainingConfig) -> Self {
        let p = cfg.grid_points;
        Objective {
            data,
            grid_inputs: (0..p).map(|i| i as f64 / (p - 1) as f64).collect(),
            frozen: None,
        }
    }

    fn freeze_baseline(&mut self, bank: &ShapedFilterBank) {
        let g = bank.baseline_response(self.data.eigenvalues());
        let smooth = smoothness(&bank.baseline.forward(&self.grid_inputs)).0;
        self.frozen = Some((g, smooth));
    }

    fn evaluate(
        &self,
        bank: &ShapedFilterBank,
        batch: &[usize],
        cfg: &TrainingConfig,
    ) -> (LossParts, ParameterGradient) {
        let lambdas = self.data.eigenvalues();
        let mut grad = ParameterGradient::zeros_like(bank);

        let bank_trace;
        let (response, smooth) = match &self.frozen {
            Some((g, smooth)) => {
                bank_trace = None;
                (bank.shaping_forward(lambdas, g).0, *smooth)
            }
            None => {
                let t = bank.forward_trace(lambdas);
                let grid_trace = bank.baseline.forward_trace(&self.grid_inputs);
                let (smooth, dsmooth) = smoothness(grid_trace.output());
                let upstream: Vec<f64> = dsmooth.iter().map(|d| cfg.alpha * d).collect();
                bank.baseline.backward(&grid_trace, &upstream, &mut grad.baseline);
                let response = t.response.clone();
                bank_trace = Some(t);
                (response, smooth)
            }
        };

        let mut data = 0.0;
        let mut dresponse = vec![0.0; lambdas.len()];
        for &i in batch {
            let x = &self.data.input_coeffs[i];
            let y = &self.data.target_coeffs[i];
            for j in 0..lambdas.len() {
                let r = response[j] * x[j] - y[j];
                data += r * r;
                dresponse[j] += 2.0 * r * x[j];
            }
        }
        match (&self.frozen, &bank_trace) {
            (Some((g, _)), _) => bank.shaping_backward(lambdas, g, &dresponse, &mut grad.components),
            (None, Some(t)) => bank.backward_from_trace(lambdas, t, &dresponse, &mut grad, true),
            (None, None) => unreachable!(),
        }

        let shape: f64 = bank.components.iter().map(|c| c.amplitude * c.amplitude).sum();
        for (gc, c) in grad.components.iter_mut().zip(&bank.components) {
            gc.amplitude += cfg.beta * 2.0 * c.amplitude;
        }
        let parts = LossParts {
            total: data + cfg.alpha * smooth + cfg.beta * shape,
            data,
            smooth,
            shape,
        };
        (parts, grad)
    }
}

/// Mean squared second difference and its gradient with respect to the samples.
fn smoothness(values: &[f64]) -> (f64, Vec<f64>) {
    let p = values.len();
    let count = (p - 2) as f64;
    let mut grad = vec![0.0; p];
    let mut total = 0.0;
    for i in 1..p - 1 {
        let d = values[i + 1] - 2.0 * values[i] + values[i - 1];
        total += d * d;
        let w = 2.0 * d / count;
        grad[i + 1] += w;
        grad[i] -= 2.0 * w;
        grad[i - 1] += w;
    }
    (total / count, grad)
}

/// Objective value, its parts, and the exact gradient on a minibatch.
pub fn loss(
    bank: &ShapedFilterBank,
    dataset: &SupervisedDataset,
    batch: &[usize],
    cfg: &TrainingConfig,
) -> Result<(f64, LossParts, ParameterGradient)> {
    if batch.is_empty() {
        return Err(Error::contract("loss needs a nonempty batch"));
    }
    if let Some(&bad) = batch.iter().find(|&&i| i >= dataset.num_signals()) {
        return Err(Error::contract(format!("batch index {bad} out of range")));
    }
    cfg.validate()?;
    let (parts, grad) = Objective::new(dataset, cfg).evaluate(bank, batch, cfg);
    Ok((parts.total, parts, grad))
}

/// Shared optimization loop. `candidate` is an extra bank eligible for early-best selection.
fn train(
    bank: ShapedFilterBank,
    dataset: &SupervisedDataset,
    cfg: &TrainingConfig,
    mask: &FreezeMask,
    candidate: Option<(&ShapedFilterBank, f64)>,
) -> Result<TrainingState> {
    cfg.validate()?;
    let mut objective = Objective::new(dataset, cfg);
    if mask.baseline_frozen {
        objective.freeze_baseline(&bank);
    }
    let mut state = TrainingState::new(bank);
    let mut best_bank = state.bank.clone();
    state.best_mse = dataset.bank_mse(&state.bank);
    if let Some((cand, mse)) = candidate {
        if mse <= state.best_mse {
            best_bank = cand.clone();
            state.best_mse = mse;
        }
    }

    let mut rng = rng_from_seed(derive_seed(cfg.seed, streams::SHUFFLE));
    let mut order: Vec<usize> = (0..dataset.num_signals()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut acc = LossParts::default();
        let mut batches = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let (parts, grad) = objective.evaluate(&state.bank, batch, cfg);
            if !parts.total.is_finite() {
                return Err(Error::numeric(format!("loss became non-finite at epoch {epoch}")));
            }
            acc.total += parts.total;
            acc.data += parts.data;
            acc.smooth += parts.smooth;
            acc.shape += parts.shape;
            batches += 1.0;
            adamw_step(&mut state, &grad, mask, cfg)?;
        }
        state.history.push(LossRecord {
            epoch,
            total: acc.total / batches,
            data: acc.data / batches,
            smooth: acc.smooth / batches,
            shape: acc.shape / batches,
        });
        if cfg.early_best {
            let mse = dataset.bank_mse(&state.bank);
            if mse < state.best_mse {
                state.best_mse = mse;
                state.best_epoch = epoch;
                best_bank = state.bank.clone();
            }
        }
    }
    if cfg.early_best {
        state.bank = best_bank;
    } else {
        state.best_mse = dataset.bank_mse(&state.bank);
        state.best_epoch = cfg.epochs;
    }
    Ok(state)
}

/// Fit a fresh `K`-component bank to one dataset.
pub fn fit(dataset: &SupervisedDataset, k: usize, cfg: &TrainingConfig) -> Result<TrainingState> {
    let bank = init_bank(
        k,
        dataset.lambda_max(),
        cfg.seed,
        &cfg.layer_sizes,
        cfg.activation,
    )?;
    train(bank, dataset, cfg, &FreezeMask::all_trainable(k), None)
}

/// Continue training an existing bank under a mask.
pub fn fit_from(
    bank: ShapedFilterBank,
    dataset: &SupervisedDataset,
    mask: &FreezeMask,
    cfg: &TrainingConfig,
) -> Result<TrainingState> {
    train(bank, dataset, cfg, mask, None)
}

/// Source bank moved onto a new spectrum without training: absolute centers are
/// kept (clamped into `[0, λ_max]`), bandwidths and amplitudes unchanged.
pub fn zero_shot_bank(pretrained: &ShapedFilterBank, lambda_max: f64) -> Result<ShapedFilterBank> {
    let components = pretrained
        .components
        .iter()
        .map(|c| {
            let mu = c.center(pretrained.lambda_max).min(lambda_max);
            ShapingComponent {
                gamma_raw: c.gamma_raw,
                amplitude: c.amplitude,
                ..ShapingComponent::from_effective(mu, 1.0, 0.0, lambda_max)
            }
        })
        .collect();
    ShapedFilterBank::new(pretrained.baseline.clone(), components, lambda_max)
}

#[derive(Clone, Debug)]
pub struct TransferOutcome {
    pub state: TrainingState,
    pub mse_before: f64,
    pub mse_after: f64,
    /// `(mse_before - mse_after) / mse_before`
    pub improvement: f64,
}

/// Freeze the pretrained baseline and adapt only the shaping parameters on a target.
pub fn tass_adapt(
    pretrained: &ShapedFilterBank,
    target: &SupervisedDataset,
    cfg: &TrainingConfig,
) -> Result<TransferOutcome> {
    if !pretrained.is_finite() {
        return Err(Error::numeric("pretrained bank has non-finite parameters"));
    }
    let zero_shot = zero_shot_bank(pretrained, target.lambda_max())?;
    let mse_before = target.bank_mse(&zero_shot);
    let mut start = zero_shot.clone();
    if !cfg.carry_over_shaping {
        start.components =
            ShapedFilterBank::default_shaping(pretrained.num_components(), target.lambda_max());
    }
    let mask = FreezeMask::transfer(pretrained.num_components());
    let state = train(start, target, cfg, &mask, Some((&zero_shot, mse_before)))?;
    let mse_after = target.bank_mse(&state.bank);
    let improvement = crate::experiments::improvement(mse_before, mse_after)?;
    Ok(TransferOutcome {
        state,
        mse_before,
        mse_after,
        improvement,
    })
}

/// Bank plus optimizer state, as written to disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointDocument {
    pub bank: BankDocument,
    pub adam_first_moment: Vec<f64>,
    pub adam_second_moment: Vec<f64>,
    pub step: u64,
    pub best_epoch: usize,
}

impl CheckpointDocument {
    pub fn from_state(state: &TrainingState) -> Self {
        CheckpointDocument {
            bank: BankDocument::from(&state.bank),
            adam_first_moment: state.optimizer.first_moment.clone(),
            adam_second_moment: state.optimizer.second_moment.clone(),
            step: state.optimizer.step,
            best_epoch: state.best_epoch,
        }
    }

    pub fn bank(&self) -> Result<ShapedFilterBank> {
        self.bank.clone().try_into()
    }
}
