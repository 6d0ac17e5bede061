//! Shaped filter banks.
//!
//! A bank evaluates
//!
//! ```text
//! G(λ) = Σ_k a_k · g(λ / λ_max) · exp(-γ_k (λ - μ_k)²)
//! ```
//!
//! where `g` is the baseline network, `μ_k = λ_max · sigmoid(mu_raw_k)` and
//! `γ_k = softplus(gamma_raw_k)`. The network sees `λ / λ_max`, so one baseline
//! can be reused on graphs whose spectra have different extents.

mod mlp;

pub use mlp::{
    logit, sigmoid, softplus, softplus_inverse, Activation, BaselineKernel, DenseLayer,
    LayerGradient, MlpTrace,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, streams};

pub const DEFAULT_LAYER_SIZES: [usize; 4] = [1, 32, 32, 1];
pub const BANK_FORMAT_VERSION: u32 = 1;

/// One Gaussian shaping factor in unconstrained coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapingComponent {
    pub mu_raw: f64,
    pub gamma_raw: f64,
    pub amplitude: f64,
}

impl ShapingComponent {
    /// Component with the given effective center and bandwidth.
    pub fn from_effective(mu: f64, gamma: f64, amplitude: f64, lambda_max: f64) -> Self {
        let frac = (mu / lambda_max).clamp(1e-12, 1.0 - 1e-12);
        ShapingComponent {
            mu_raw: logit(frac),
            gamma_raw: softplus_inverse(gamma.max(1e-300)),
            amplitude,
        }
    }

    /// `μ = λ_max · sigmoid(mu_raw)`, always in `[0, λ_max]`.
    pub fn center(&self, lambda_max: f64) -> f64 {
        lambda_max * sigmoid(self.mu_raw)
    }

    /// `γ = softplus(gamma_raw)`, always `≥ 0`.
    pub fn bandwidth(&self) -> f64 {
        softplus(self.gamma_raw)
    }

    pub fn envelope(&self, lambda: f64, lambda_max: f64) -> f64 {
        let d = lambda - self.center(lambda_max);
        (-self.bandwidth() * d * d).exp()
    }
}

/// `a · g(λ) · exp(-γ (λ - μ)²)` pointwise.
pub fn eval_component(
    c: &ShapingComponent,
    baseline_vals: &[f64],
    lambdas: &[f64],
    lambda_max: f64,
) -> Result<Vec<f64>> {
    if baseline_vals.len() != lambdas.len() {
        return Err(Error::contract("baseline values and lambdas differ in length"));
    }
    Ok(lambdas
        .iter()
        .zip(baseline_vals)
        .map(|(&l, &g)| c.amplitude * g * c.envelope(l, lambda_max))
        .collect())
}

/// Pointwise forward pass of the baseline network.
pub fn eval_baseline(k: &BaselineKernel, inputs: &[f64]) -> Result<Vec<f64>> {
    if !k.is_finite() {
        return Err(Error::numeric("baseline kernel has non-finite parameters"));
    }
    if inputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("non-finite kernel input"));
    }
    Ok(k.forward(inputs))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentGradient {
    pub mu_raw: f64,
    pub gamma_raw: f64,
    pub amplitude: f64,
}

/// Gradient laid out like a [`ShapedFilterBank`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterGradient {
    pub baseline: Vec<LayerGradient>,
    pub components: Vec<ComponentGradient>,
}

/// Role of one entry of the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamRole {
    BaselineWeight { layer: usize },
    BaselineBias { layer: usize },
    Center { component: usize },
    Bandwidth { component: usize },
    Amplitude { component: usize },
}

impl ParamRole {
    pub fn is_baseline(self) -> bool {
        matches!(self, ParamRole::BaselineWeight { .. } | ParamRole::BaselineBias { .. })
    }
}

impl ParameterGradient {
    pub fn zeros_like(bank: &ShapedFilterBank) -> Self {
        ParameterGradient {
            baseline: bank.baseline.zero_gradient(),
            components: vec![
                ComponentGradient {
                    mu_raw: 0.0,
                    gamma_raw: 0.0,
                    amplitude: 0.0,
                };
                bank.components.len()
            ],
        }
    }

    /// Same order as [`ShapedFilterBank::params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.baseline {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        for c in &self.components {
            out.extend_from_slice(&[c.mu_raw, c.gamma_raw, c.amplitude]);
        }
        out
    }

    pub fn add_scaled(&mut self, other: &ParameterGradient, scale: f64) {
        for (a, b) in self.baseline.iter_mut().zip(&other.baseline) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x += scale * y;
            }
            for (x, y) in a.biases.iter_mut().zip(&b.biases) {
                *x += scale * y;
            }
        }
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.mu_raw += scale * b.mu_raw;
            a.gamma_raw += scale * b.gamma_raw;
            a.amplitude += scale * b.amplitude;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }
}

/// Learnable multi-peak filter: a baseline network shared by `K` shaping components.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapedFilterBank {
    pub baseline: BaselineKernel,
    pub components: Vec<ShapingComponent>,
    pub lambda_max: f64,
}

/// Cached forward pass of a bank on a fixed set of eigenvalues.
#[derive(Clone, Debug)]
pub struct BankTrace {
    pub mlp: MlpTrace,
    /// `Σ_k a_k exp(-γ_k (λ - μ_k)²)` at each λ.
    pub shaping: Vec<f64>,
    pub response: Vec<f64>,
}

impl BankTrace {
    pub fn baseline(&self) -> &[f64] {
        self.mlp.output()
    }
}

impl ShapedFilterBank {
    pub fn new(
        baseline: BaselineKernel,
        components: Vec<ShapingComponent>,
        lambda_max: f64,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::param("a bank needs at least one shaping component"));
        }
        if !(lambda_max.is_finite() && lambda_max > 0.0) {
            return Err(Error::param(format!("lambda_max must be positive, got {lambda_max}")));
        }
        Ok(ShapedFilterBank {
            baseline,
            components,
            lambda_max,
        })
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn normalized_inputs(&self, lambdas: &[f64]) -> Vec<f64> {
        lambdas.iter().map(|l| l / self.lambda_max).collect()
    }

    /// Baseline `g(λ / λ_max)` at each λ.
    pub fn baseline_response(&self, lambdas: &[f64]) -> Vec<f64> {
        self.baseline.forward(&self.normalized_inputs(lambdas))
    }

    /// Total response `G(λ)`.
    pub fn eval(&self, lambdas: &[f64]) -> Vec<f64> {
        let g = self.baseline_response(lambdas);
        self.shaping_forward(lambdas, &g).0
    }

    /// Response plus the number of λ outside `[0, λ_max]`.
    pub fn eval_flagged(&self, lambdas: &[f64]) -> (Vec<f64>, usize) {
        let slack = 1e-9 * self.lambda_max;
        let outside = lambdas
            .iter()
            .filter(|&&l| l < -slack || l > self.lambda_max + slack)
            .count();
        if outside > 0 {
            log::debug!("{outside} evaluation points fall outside [0, {}]", self.lambda_max);
        }
        (self.eval(lambdas), outside)
    }

    /// Response of each component separately: `components[k][j]`.
    pub fn component_responses(&self, lambdas: &[f64]) -> Vec<Vec<f64>> {
        let g = self.baseline_response(lambdas);
        self.components
            .iter()
            .map(|c| {
                eval_component(c, &g, lambdas, self.lambda_max).expect("aligned lengths")
            })
            .collect()
    }

    /// `(G(λ), Σ_k a_k e_k(λ))` for given baseline values.
    pub fn shaping_forward(&self, lambdas: &[f64], baseline: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let params: Vec<(f64, f64, f64)> = self
            .components
            .iter()
            .map(|c| (c.amplitude, c.center(self.lambda_max), c.bandwidth()))
            .collect();
        let shaping: Vec<f64> = lambdas
            .iter()
            .map(|&l| {
                params
                    .iter()
                    .map(|&(a, mu, gamma)| a * (-gamma * (l - mu) * (l - mu)).exp())
                    .sum()
            })
            .collect();
        let response = shaping.iter().zip(baseline).map(|(s, g)| s * g).collect();
        (response, shaping)
    }

    pub fn forward_trace(&self, lambdas: &[f64]) -> BankTrace {
        let mlp = self.baseline.forward_trace(&self.normalized_inputs(lambdas));
        let (response, shaping) = self.shaping_forward(lambdas, mlp.output());
        BankTrace {
            mlp,
            shaping,
            response,
        }
    }

    /// Accumulate shaping-parameter gradients of `Σ_j upstream_j G(λ_j)` given
    /// fixed baseline values.
    pub fn shaping_backward(
        &self,
        lambdas: &[f64],
        baseline: &[f64],
        upstream: &[f64],
        grad: &mut [ComponentGradient],
    ) {
        for (c, gc) in self.components.iter().zip(grad.iter_mut()) {
            let s = sigmoid(c.mu_raw);
            let mu = self.lambda_max * s;
            let gamma = c.bandwidth();
            let dmu_draw = self.lambda_max * s * (1.0 - s);
            let dgamma_draw = sigmoid(c.gamma_raw);
            let (mut da, mut dmu, mut dgamma) = (0.0, 0.0, 0.0);
            for ((&l, &g), &up) in lambdas.iter().zip(baseline).zip(upstream) {
                if up == 0.0 {
                    continue;
                }
                let d = l - mu;
                let e = (-gamma * d * d).exp();
                let ug = up * g * e;
                da += ug;
                dmu += ug * c.amplitude * 2.0 * gamma * d;
                dgamma -= ug * c.amplitude * d * d;
            }
            gc.amplitude += da;
            gc.mu_raw += dmu * dmu_draw;
            gc.gamma_raw += dgamma * dgamma_draw;
        }
    }

    /// Accumulate all gradients from a cached trace. With `include_baseline`
    /// false only the shaping entries of `grad` are touched.
    pub fn backward_from_trace(
        &self,
        lambdas: &[f64],
        trace: &BankTrace,
        upstream: &[f64],
        grad: &mut ParameterGradient,
        include_baseline: bool,
    ) {
        self.shaping_backward(lambdas, trace.baseline(), upstream, &mut grad.components);
        if include_baseline {
            let to_baseline: Vec<f64> = upstream
                .iter()
                .zip(&trace.shaping)
                .map(|(u, s)| u * s)
                .collect();
            self.baseline.backward(&trace.mlp, &to_baseline, &mut grad.baseline);
        }
    }

    /// Gradient of `Σ_j upstream_j · G(λ_j)` with respect to every parameter.
    pub fn backward(&self, lambdas: &[f64], upstream: &[f64]) -> Result<ParameterGradient> {
        if lambdas.len() != upstream.len() {
            return Err(Error::contract(format!(
                "{} lambdas but {} upstream values",
                lambdas.len(),
                upstream.len()
            )));
        }
        let trace = self.forward_trace(lambdas);
        let mut grad = ParameterGradient::zeros_like(self);
        self.backward_from_trace(lambdas, &trace, upstream, &mut grad, true);
        Ok(grad)
    }

    pub fn num_params(&self) -> usize {
        self.baseline.num_params() + 3 * self.components.len()
    }

    /// Flat parameter vector: per layer weights then biases, then per component
    /// `(mu_raw, gamma_raw, amplitude)`.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in self.baseline.layers() {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        for c in &self.components {
            out.extend_from_slice(&[c.mu_raw, c.gamma_raw, c.amplitude]);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::contract(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                flat.len()
            )));
        }
        let mut it = flat.iter().copied();
        for l in self.baseline.layers_mut() {
            l.weights.iter_mut().for_each(|w| *w = it.next().unwrap());
            l.biases.iter_mut().for_each(|b| *b = it.next().unwrap());
        }
        for c in &mut self.components {
            c.mu_raw = it.next().unwrap();
            c.gamma_raw = it.next().unwrap();
            c.amplitude = it.next().unwrap();
        }
        Ok(())
    }

    pub fn param_roles(&self) -> Vec<ParamRole> {
        let mut out = Vec::with_capacity(self.num_params());
        for (layer, l) in self.baseline.layers().iter().enumerate() {
            out.extend(std::iter::repeat_n(ParamRole::BaselineWeight { layer }, l.weights.len()));
            out.extend(std::iter::repeat_n(ParamRole::BaselineBias { layer }, l.biases.len()));
        }
        for component in 0..self.components.len() {
            out.push(ParamRole::Center { component });
            out.push(ParamRole::Bandwidth { component });
            out.push(ParamRole::Amplitude { component });
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.baseline.is_finite()
            && self
                .components
                .iter()
                .all(|c| c.mu_raw.is_finite() && c.gamma_raw.is_finite() && c.amplitude.is_finite())
    }

    /// Equally spaced centers `(k - 1/2) λ_max / K`, Gaussian standard deviation
    /// `λ_max / (2K)`, amplitudes `1/K`.
    pub fn default_shaping(k: usize, lambda_max: f64) -> Vec<ShapingComponent> {
        let sigma = lambda_max / (2.0 * k as f64);
        let gamma = 1.0 / (2.0 * sigma * sigma);
        (0..k)
            .map(|i| {
                let frac = (i as f64 + 0.5) / k as f64;
                ShapingComponent {
                    mu_raw: logit(frac),
                    gamma_raw: softplus_inverse(gamma),
                    amplitude: 1.0 / k as f64,
                }
            })
            .collect()
    }
}

/// Fresh bank: random baseline with output bias 1, default shaping.
pub fn init_bank(
    k: usize,
    lambda_max: f64,
    seed: u64,
    layer_sizes: &[usize],
    activation: Activation,
) -> Result<ShapedFilterBank> {
    if k < 1 {
        return Err(Error::param("K must be at least 1"));
    }
    let mut rng = rng_from_seed(derive_seed(seed, streams::INIT));
    let baseline = BaselineKernel::random(layer_sizes, activation, 1.0, &mut rng)?;
    ShapedFilterBank::new(
        baseline,
        ShapedFilterBank::default_shaping(k, lambda_max),
        lambda_max,
    )
}

/// Serialized bank. `input_normalization` records that the network sees `λ / λ_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankDocument {
    pub format_version: u32,
    pub lambda_max: f64,
    pub input_normalization: String,
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub layers: Vec<DenseLayer>,
    pub components: Vec<ShapingComponent>,
}

const INPUT_NORMALIZATION: &str = "lambda_over_lambda_max";

impl From<&ShapedFilterBank> for BankDocument {
    fn from(b: &ShapedFilterBank) -> Self {
        BankDocument {
            format_version: BANK_FORMAT_VERSION,
            lambda_max: b.lambda_max,
            input_normalization: INPUT_NORMALIZATION.into(),
            layer_sizes: b.baseline.layer_sizes(),
            activation: b.baseline.activation(),
            layers: b.baseline.layers().to_vec(),
            components: b.components.clone(),
        }
    }
}

impl TryFrom<BankDocument> for ShapedFilterBank {
    type Error = Error;

    fn try_from(doc: BankDocument) -> Result<Self> {
        if doc.format_version != BANK_FORMAT_VERSION {
            return Err(Error::param(format!(
                "unsupported bank format version {}",
                doc.format_version
            )));
        }
        if doc.input_normalization != INPUT_NORMALIZATION {
            return Err(Error::param(format!(
                "unsupported input normalization {:?}",
                doc.input_normalization
            )));
        }
        let baseline = BaselineKernel::new(doc.layers, doc.activation)?;
        if baseline.layer_sizes() != doc.layer_sizes {
            return Err(Error::param("layer_sizes disagrees with stored layers"));
        }
        ShapedFilterBank::new(baseline, doc.components, doc.lambda_max)
    }
}

impl ShapedFilterBank {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&BankDocument::from(self)).expect("bank serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BankDocument =
            serde_json::from_str(text).map_err(|e| Error::param(format!("bank JSON: {e}")))?;
        doc.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_baseline() -> BaselineKernel {
        // g ≡ 1
        BaselineKernel::new(
            vec![
                DenseLayer { weights: vec![0.0], biases: vec![0.0] },
                DenseLayer { weights: vec![0.0], biases: vec![1.0] },
            ],
            Activation::Tanh,
        )
        .unwrap()
    }

    fn random_bank(k: usize, seed: u64) -> ShapedFilterBank {
        let mut b = init_bank(k, 3.0, seed, &[1, 6, 5, 1], Activation::Tanh).unwrap();
        for (i, c) in b.components.iter_mut().enumerate() {
            c.mu_raw += 0.3 * (i as f64 + 1.0);
            c.gamma_raw -= 0.2;
            c.amplitude = 0.5 - 0.2 * i as f64;
        }
        b
    }

    #[test]
    fn component_limits() {
        let lambdas = [0.0, 0.5, 1.3, 2.0];
        let base = [0.2, -1.0, 3.0, 0.7];
        let flat = ShapingComponent { mu_raw: 0.4, gamma_raw: -1000.0, amplitude: 1.0 };
        assert_eq!(eval_component(&flat, &base, &lambdas, 2.0).unwrap(), base.to_vec());

        let c = ShapingComponent::from_effective(1.0, 1.0, 1.0, 4.0);
        let v = eval_component(&c, &[1.0], &[2.0], 4.0).unwrap();
        assert!((v[0] - (-1.0f64).exp()).abs() < 1e-12);
        assert!((v[0] - 0.367879).abs() < 1e-6);

        let peak = ShapingComponent::from_effective(1.5, 5.0, 1.0, 4.0);
        let mu = peak.center(4.0);
        assert_eq!(eval_component(&peak, &[1.0], &[mu], 4.0).unwrap()[0], 1.0);

        assert!(eval_component(&c, &[1.0, 2.0], &[1.0], 4.0).is_err());
    }

    #[test]
    fn zero_amplitude_bank_is_zero() {
        let mut b = random_bank(1, 3);
        b.components[0].amplitude = 0.0;
        assert!(b.eval(&[0.0, 1.0, 2.5]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn split_component_matches_original() {
        let b = random_bank(1, 4);
        let mut split = b.clone();
        let mut half = b.components[0];
        half.amplitude *= 0.5;
        split.components = vec![half, half];
        let lambdas: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        for (a, c) in b.eval(&lambdas).iter().zip(split.eval(&lambdas)) {
            assert!((a - c).abs() < 1e-14);
        }
    }

    #[test]
    fn bank_is_sum_of_single_component_banks() {
        let b = random_bank(2, 5);
        let lambdas: Vec<f64> = (0..40).map(|i| i as f64 * 3.0 / 39.0).collect();
        let total = b.eval(&lambdas);
        let mut sum = vec![0.0; lambdas.len()];
        for c in &b.components {
            let single = ShapedFilterBank::new(b.baseline.clone(), vec![*c], b.lambda_max).unwrap();
            for (s, v) in sum.iter_mut().zip(single.eval(&lambdas)) {
                *s += v;
            }
        }
        for (t, s) in total.iter().zip(&sum) {
            assert!((t - s).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_simple_cases() {
        let b = random_bank(3, 6);
        let lambdas = [0.1, 1.0, 2.9];
        let g = b.backward(&lambdas, &[0.0; 3]).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
        assert!(b.backward(&lambdas, &[1.0]).is_err());

        let bank = ShapedFilterBank::new(
            unit_baseline(),
            vec![ShapingComponent { mu_raw: 0.0, gamma_raw: -1000.0, amplitude: 0.7 }],
            2.0,
        )
        .unwrap();
        let g = bank.backward(&[1.3], &[1.0]).unwrap();
        assert!((g.components[0].amplitude - 1.0).abs() < 1e-15);
    }

    #[test]
    fn backward_matches_finite_differences() {
        for k in 1..=3 {
            let b = random_bank(k, 10 + k as u64);
            let lambdas: Vec<f64> = (0..12).map(|i| i as f64 * 0.25).collect();
            let upstream: Vec<f64> = (0..12).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.3).collect();
            let analytic = b.backward(&lambdas, &upstream).unwrap().flatten();
            let objective = |bank: &ShapedFilterBank| -> f64 {
                bank.eval(&lambdas).iter().zip(&upstream).map(|(g, u)| g * u).sum()
            };
            let base = b.params();
            let h = 1e-5;
            for (i, &a) in analytic.iter().enumerate() {
                let mut p = base.clone();
                p[i] += h;
                let mut plus = b.clone();
                plus.set_params(&p).unwrap();
                p[i] -= 2.0 * h;
                let mut minus = b.clone();
                minus.set_params(&p).unwrap();
                let fd = (objective(&plus) - objective(&minus)) / (2.0 * h);
                let err = (fd - a).abs() / fd.abs().max(a.abs()).max(1e-6);
                assert!(err < 1e-4, "param {i}: fd {fd} vs analytic {a}");
            }
        }
    }

    #[test]
    fn init_layout() {
        let b = init_bank(2, 2.0, 0, &DEFAULT_LAYER_SIZES, Activation::Tanh).unwrap();
        let centers: Vec<f64> = b.components.iter().map(|c| c.center(2.0)).collect();
        assert!((centers[0] - 0.5).abs() < 1e-12 && (centers[1] - 1.5).abs() < 1e-12);
        let b = init_bank(1, 2.0, 0, &DEFAULT_LAYER_SIZES, Activation::Tanh).unwrap();
        assert!((b.components[0].center(2.0) - 1.0).abs() < 1e-12);
        assert_eq!(b.components[0].amplitude, 1.0);
        // std λ_max / (2K) = 1 -> γ = 1/2
        assert!((b.components[0].bandwidth() - 0.5).abs() < 1e-12);
        assert!(matches!(
            init_bank(0, 2.0, 0, &DEFAULT_LAYER_SIZES, Activation::Tanh),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn init_is_bounded_across_seeds() {
        let grid: Vec<f64> = (0..101).map(|i| i as f64 * 0.05).collect();
        for seed in 0..200 {
            for k in 1..=4 {
                let b = init_bank(k, 5.0, seed, &DEFAULT_LAYER_SIZES, Activation::Tanh).unwrap();
                assert!(b.eval(&grid).iter().all(|v| v.is_finite() && v.abs() <= 10.0));
            }
        }
    }

    #[test]
    fn param_roles_align_with_params() {
        let b = random_bank(2, 1);
        let roles = b.param_roles();
        assert_eq!(roles.len(), b.params().len());
        assert_eq!(roles.iter().filter(|r| !r.is_baseline()).count(), 6);
        assert_eq!(roles[roles.len() - 1], ParamRole::Amplitude { component: 1 });
    }

    #[test]
    fn json_round_trip_is_exact() {
        let b = random_bank(3, 8);
        let back = ShapedFilterBank::from_json(&b.to_json()).unwrap();
        assert_eq!(back, b);
        let bits = |x: &ShapedFilterBank| x.params().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&b));
    }

    #[test]
    fn json_rejects_unknown_version() {
        let b = random_bank(1, 8);
        let text = b.to_json().replace("\"format_version\": 1", "\"format_version\": 99");
        assert!(ShapedFilterBank::from_json(&text).is_err());
    }
}
