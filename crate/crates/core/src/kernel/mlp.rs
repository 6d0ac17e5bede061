//! The baseline kernel: a small fully connected network `R -> R`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Softplus,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Softplus => softplus(z),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `h`.
    #[inline]
    fn derivative(self, z: f64, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Softplus => sigmoid(z),
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Inverse of [`softplus`] for `y > 0`.
pub fn softplus_inverse(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

/// Inverse of [`sigmoid`] for `p` in `(0, 1)`.
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Fully connected layer, weights stored row-major as `outputs x inputs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn inputs(&self) -> usize {
        if self.biases.is_empty() {
            0
        } else {
            self.weights.len() / self.biases.len()
        }
    }

    pub fn outputs(&self) -> usize {
        self.biases.len()
    }
}

/// Multi-layer perceptron with one input, one output, and activated hidden layers.
/// The output layer is linear.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineKernel {
    layers: Vec<DenseLayer>,
    activation: Activation,
}

/// Intermediate values of a batched forward pass, kept for the backward pass.
#[derive(Clone, Debug)]
pub struct MlpTrace {
    /// Per layer, point-major `points x width` pre-activations.
    pre: Vec<Vec<f64>>,
    /// Per layer, post-activation values; the last entry equals its pre-activations.
    post: Vec<Vec<f64>>,
    inputs: Vec<f64>,
}

impl MlpTrace {
    pub fn output(&self) -> &[f64] {
        self.post.last().expect("at least one layer")
    }
}

/// Gradient of one layer's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl BaselineKernel {
    pub fn new(layers: Vec<DenseLayer>, activation: Activation) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::param("baseline kernel needs at least one hidden layer"));
        }
        let mut width = 1;
        for (i, layer) in layers.iter().enumerate() {
            if layer.outputs() == 0 || layer.weights.len() != layer.outputs() * width {
                return Err(Error::param(format!(
                    "layer {i} has {} weights for {} outputs and {width} inputs",
                    layer.weights.len(),
                    layer.outputs()
                )));
            }
            width = layer.outputs();
        }
        if width != 1 {
            return Err(Error::param("baseline kernel must have a single output"));
        }
        Ok(BaselineKernel { layers, activation })
    }

    /// Random fan-in uniform weights `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`, zero
    /// biases, and output bias `output_bias`.
    pub fn random(
        layer_sizes: &[usize],
        activation: Activation,
        output_bias: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if layer_sizes.len() < 3 || layer_sizes[0] != 1 || *layer_sizes.last().unwrap() != 1 {
            return Err(Error::param(format!(
                "layer sizes {layer_sizes:?} must start and end with 1 and include a hidden layer"
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::param("layer sizes must be positive"));
        }
        let mut layers = Vec::new();
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let weights = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            layers.push(DenseLayer {
                weights,
                biases: vec![0.0; fan_out],
            });
        }
        layers.last_mut().unwrap().biases[0] = output_bias;
        BaselineKernel::new(layers, activation)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.layers.iter().map(DenseLayer::outputs))
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    pub fn forward_trace(&self, inputs: &[f64]) -> MlpTrace {
        let points = inputs.len();
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (li, layer) in self.layers.iter().enumerate() {
            let fan_in = layer.inputs();
            let fan_out = layer.outputs();
            let prev: &[f64] = if li == 0 { inputs } else { &post[li - 1] };
            let mut z = vec![0.0; points * fan_out];
            for p in 0..points {
                let x = &prev[p * fan_in..(p + 1) * fan_in];
                let out = &mut z[p * fan_out..(p + 1) * fan_out];
                for (o, zo) in out.iter_mut().enumerate() {
                    let row = &layer.weights[o * fan_in..(o + 1) * fan_in];
                    *zo = layer.biases[o] + row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
                }
            }
            let h = if li == last {
                z.clone()
            } else {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            };
            pre.push(z);
            post.push(h);
        }
        MlpTrace {
            pre,
            post,
            inputs: inputs.to_vec(),
        }
    }

    /// Network output at each input.
    pub fn forward(&self, inputs: &[f64]) -> Vec<f64> {
        self.forward_trace(inputs).output().to_vec()
    }

    pub fn zero_gradient(&self) -> Vec<LayerGradient> {
        self.layers
            .iter()
            .map(|l| LayerGradient {
                weights: vec![0.0; l.weights.len()],
                biases: vec![0.0; l.biases.len()],
            })
            .collect()
    }

    /// Accumulate the gradient of `sum_p upstream[p] * output[p]` into `grad`.
    pub fn backward(&self, trace: &MlpTrace, upstream: &[f64], grad: &mut [LayerGradient]) {
        let points = trace.inputs.len();
        assert_eq!(upstream.len(), points, "upstream length differs from trace");
        let mut delta: Vec<f64> = upstream.to_vec();
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let fan_in = layer.inputs();
            let fan_out = layer.outputs();
            let prev: &[f64] = if li == 0 { &trace.inputs } else { &trace.post[li - 1] };
            let g = &mut grad[li];
            for p in 0..points {
                let d = &delta[p * fan_out..(p + 1) * fan_out];
                let x = &prev[p * fan_in..(p + 1) * fan_in];
                for (o, &dout) in d.iter().enumerate() {
                    if dout == 0.0 {
                        continue;
                    }
                    g.biases[o] += dout;
                    let row = &mut g.weights[o * fan_in..(o + 1) * fan_in];
                    for (gw, xi) in row.iter_mut().zip(x) {
                        *gw += dout * xi;
                    }
                }
            }
            if li == 0 {
                break;
            }
            let z_prev = &trace.pre[li - 1];
            let h_prev = &trace.post[li - 1];
            let mut next = vec![0.0; points * fan_in];
            for p in 0..points {
                let d = &delta[p * fan_out..(p + 1) * fan_out];
                let out = &mut next[p * fan_in..(p + 1) * fan_in];
                for (o, &dout) in d.iter().enumerate() {
                    let row = &layer.weights[o * fan_in..(o + 1) * fan_in];
                    for (acc, w) in out.iter_mut().zip(row) {
                        *acc += dout * w;
                    }
                }
                for (i, acc) in out.iter_mut().enumerate() {
                    let k = p * fan_in + i;
                    *acc *= self.activation.derivative(z_prev[k], h_prev[k]);
                }
            }
            delta = next;
        }
    }
}
