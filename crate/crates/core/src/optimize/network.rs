//! Dense actor-critic network (tanh trunk, optionally a separate value
//! trunk) with hand-written reverse-mode differentiation.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::OptimError;
use crate::gridworld::Action;

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `out x in`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            weights: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
        }
    }

    /// Orthogonal weights scaled by `gain`, zero bias.
    pub fn orthogonal<R: Rng + ?Sized>(inputs: usize, outputs: usize, gain: f64, rng: &mut R) -> Self {
        Dense {
            weights: orthogonal(outputs, inputs, rng) * gain,
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    fn forward(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.weights.t()) + &self.bias
    }
}

/// Matrix with orthonormal rows (or columns, whichever is shorter), from
/// Gram-Schmidt on a Gaussian draw.
fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    let (long, short) = (rows.max(cols), rows.min(cols));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(short);
    while basis.len() < short {
        let mut v: Vec<f64> = (0..long).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        if rows <= cols {
            basis[r][c]
        } else {
            basis[c][r]
        }
    })
}

/// Trunk, 4-logit policy head and scalar value head. With an empty
/// `value_trunk` both heads read the trunk output; otherwise the value head
/// reads its own trunk.
///
/// The same type doubles as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ParamsRecord", try_from = "ParamsRecord")]
pub struct PolicyParams {
    pub trunk: Vec<Dense>,
    pub value_trunk: Vec<Dense>,
    pub policy_head: Dense,
    pub value_head: Dense,
}

pub const TRUNK_GAIN: f64 = std::f64::consts::SQRT_2;
pub const POLICY_GAIN: f64 = 0.01;
pub const VALUE_GAIN: f64 = 1.0;

impl PolicyParams {
    /// Shared trunk, orthogonal initialization.
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], rng: &mut R) -> Self {
        Self::init(input_dim, hidden, false, rng)
    }

    /// Separate policy and value trunks of the same widths.
    pub fn new_separate<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], rng: &mut R) -> Self {
        Self::init(input_dim, hidden, true, rng)
    }

    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], separate: bool, rng: &mut R) -> Self {
        let stack = |rng: &mut R| {
            let mut width = input_dim;
            hidden
                .iter()
                .map(|&h| {
                    let layer = Dense::orthogonal(width, h, TRUNK_GAIN, rng);
                    width = h;
                    layer
                })
                .collect::<Vec<_>>()
        };
        let trunk = stack(rng);
        let value_trunk = if separate { stack(rng) } else { Vec::new() };
        let width = hidden.last().copied().unwrap_or(input_dim);
        PolicyParams {
            trunk,
            value_trunk,
            policy_head: Dense::orthogonal(width, Action::COUNT, POLICY_GAIN, rng),
            value_head: Dense::orthogonal(width, 1, VALUE_GAIN, rng),
        }
    }

    /// Shared-trunk network with every parameter zero.
    pub fn zeros(input_dim: usize, hidden: &[usize]) -> Self {
        Self::zeros_with(input_dim, hidden, false)
    }

    pub fn zeros_with(input_dim: usize, hidden: &[usize], separate: bool) -> Self {
        let stack = || {
            let mut width = input_dim;
            hidden
                .iter()
                .map(|&h| {
                    let layer = Dense::zeros(width, h);
                    width = h;
                    layer
                })
                .collect::<Vec<_>>()
        };
        let width = hidden.last().copied().unwrap_or(input_dim);
        PolicyParams {
            trunk: stack(),
            value_trunk: if separate { stack() } else { Vec::new() },
            policy_head: Dense::zeros(width, Action::COUNT),
            value_head: Dense::zeros(width, 1),
        }
    }

    pub fn zeros_like(&self) -> Self {
        PolicyParams::zeros_with(self.input_dim(), &self.hidden_sizes(), self.is_separate())
    }

    pub fn is_separate(&self) -> bool {
        !self.value_trunk.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.trunk.first().unwrap_or(&self.policy_head).inputs()
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.trunk.iter().map(Dense::outputs).collect()
    }

    fn layers(&self) -> impl Iterator<Item = &Dense> {
        self.trunk
            .iter()
            .chain(&self.value_trunk)
            .chain([&self.policy_head, &self.value_head])
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        self.trunk
            .iter_mut()
            .chain(&mut self.value_trunk)
            .chain([&mut self.policy_head, &mut self.value_head])
    }

    /// Every parameter tensor as a flat slice, in a fixed order.
    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers()
            .flat_map(|l| {
                [
                    l.weights.as_slice().expect("standard layout"),
                    l.bias.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers_mut()
            .flat_map(|l| {
                [
                    l.weights.as_slice_mut().expect("standard layout"),
                    l.bias.as_slice_mut().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.slices().concat()
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params());
        let mut offset = 0;
        for s in self.slices_mut() {
            s.copy_from_slice(&flat[offset..offset + s.len()]);
            offset += s.len();
        }
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|x| x.is_finite()))
    }

    pub fn global_norm(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|x| *x *= factor);
        }
    }

    /// Batched forward pass keeping the activations needed for backprop.
    pub fn forward_batch(&self, obs: ArrayView2<f64>) -> Result<ForwardCache, OptimError> {
        if obs.ncols() != self.input_dim() {
            return Err(OptimError::Shape {
                expected: self.input_dim(),
                found: obs.ncols(),
            });
        }
        let activations = trunk_forward(&self.trunk, obs);
        let value_activations = trunk_forward(&self.value_trunk, obs);
        let features = activations.last().map_or(obs.view(), |a| a.view());
        let value_features = value_activations.last().map_or(features.view(), |a| a.view());
        let logits = self.policy_head.forward(&features);
        let values = self.value_head.forward(&value_features).column(0).to_owned();
        Ok(ForwardCache {
            input: obs.to_owned(),
            activations,
            value_activations,
            logits,
            values,
        })
    }

    /// Single-observation forward pass.
    pub fn forward(&self, obs: &[f64]) -> Result<(ActionDistribution, f64), OptimError> {
        let view = ArrayView2::from_shape((1, obs.len()), obs).expect("contiguous slice");
        let cache = self.forward_batch(view)?;
        let row = cache.logits.row(0);
        Ok((ActionDistribution::new([row[0], row[1], row[2], row[3]]), cache.values[0]))
    }

    /// Parameter gradients given loss gradients w.r.t. logits and values.
    pub fn backward(&self, cache: &ForwardCache, d_logits: &Array2<f64>, d_values: &Array1<f64>) -> PolicyParams {
        let features = cache.activations.last().unwrap_or(&cache.input);
        let value_features = cache.value_activations.last().unwrap_or(features);
        let d_values2 = d_values.view().insert_axis(Axis(1));
        let policy_head = Dense {
            weights: d_logits.t().dot(features),
            bias: d_logits.sum_axis(Axis(0)),
        };
        let value_head = Dense {
            weights: d_values2.t().dot(value_features),
            bias: d_values2.sum_axis(Axis(0)),
        };
        let d_policy = d_logits.dot(&self.policy_head.weights);
        let d_value = d_values2.dot(&self.value_head.weights);
        let (trunk, value_trunk) = if self.is_separate() {
            (
                trunk_backward(&self.trunk, &cache.activations, &cache.input, d_policy),
                trunk_backward(&self.value_trunk, &cache.value_activations, &cache.input, d_value),
            )
        } else {
            (
                trunk_backward(&self.trunk, &cache.activations, &cache.input, d_policy + d_value),
                Vec::new(),
            )
        };
        PolicyParams {
            trunk,
            value_trunk,
            policy_head,
            value_head,
        }
    }
}

fn trunk_forward(layers: &[Dense], obs: ArrayView2<f64>) -> Vec<Array2<f64>> {
    let mut activations: Vec<Array2<f64>> = Vec::with_capacity(layers.len());
    for layer in layers {
        let input = activations.last().map_or(obs.view(), |a| a.view());
        let mut z = layer.forward(&input);
        z.mapv_inplace(f64::tanh);
        activations.push(z);
    }
    activations
}

/// Gradients of a tanh stack given the loss gradient w.r.t. its output.
fn trunk_backward(layers: &[Dense], activations: &[Array2<f64>], input: &Array2<f64>, mut d_act: Array2<f64>) -> Vec<Dense> {
    let mut grads = Vec::with_capacity(layers.len());
    for (i, layer) in layers.iter().enumerate().rev() {
        // tanh' = 1 - tanh^2
        ndarray::Zip::from(&mut d_act).and(&activations[i]).for_each(|d, &a| *d *= 1.0 - a * a);
        let prev = if i == 0 { input } else { &activations[i - 1] };
        grads.push(Dense {
            weights: d_act.t().dot(prev),
            bias: d_act.sum_axis(Axis(0)),
        });
        if i > 0 {
            d_act = d_act.dot(&layer.weights);
        }
    }
    grads.reverse();
    grads
}

pub struct ForwardCache {
    pub input: Array2<f64>,
    pub activations: Vec<Array2<f64>>,
    /// Empty for a shared trunk.
    pub value_activations: Vec<Array2<f64>>,
    pub logits: Array2<f64>,
    pub values: Array1<f64>,
}

/// Numerically stable log-softmax.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits.iter().map(|l| l - lse).collect()
}

/// Categorical distribution over the four actions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionDistribution {
    pub logits: [f64; 4],
}

impl ActionDistribution {
    pub fn new(logits: [f64; 4]) -> Self {
        ActionDistribution { logits }
    }

    pub fn log_probs(&self) -> [f64; 4] {
        let lp = log_softmax(&self.logits);
        [lp[0], lp[1], lp[2], lp[3]]
    }

    pub fn probs(&self) -> [f64; 4] {
        self.log_probs().map(f64::exp)
    }

    pub fn entropy(&self) -> f64 {
        self.log_probs().iter().map(|lp| -lp.exp() * lp).sum()
    }

    /// Most likely action; ties go to the lowest index.
    pub fn argmax(&self) -> Action {
        let mut best = 0;
        for i in 1..4 {
            if self.logits[i] > self.logits[best] {
                best = i;
            }
        }
        Action::from_index(best)
    }

    /// Draws an action by inverse-CDF sampling; returns it with its log-probability.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Action, f64) {
        let lp = self.log_probs();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = 3;
        for (i, l) in lp.iter().enumerate() {
            acc += l.exp();
            if u < acc {
                chosen = i;
                break;
            }
        }
        (Action::from_index(chosen), lp[chosen])
    }
}

#[derive(Serialize, Deserialize)]
struct LayerRecord {
    name: String,
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ParamsRecord {
    input_dim: usize,
    hidden: Vec<usize>,
    #[serde(default)]
    separate_value_trunk: bool,
    layers: Vec<LayerRecord>,
}

impl From<PolicyParams> for ParamsRecord {
    fn from(p: PolicyParams) -> Self {
        let input_dim = p.input_dim();
        let hidden = p.hidden_sizes();
        let separate_value_trunk = p.is_separate();
        let n_trunk = p.trunk.len();
        let n_value = p.value_trunk.len();
        let layers = p
            .layers()
            .enumerate()
            .map(|(i, l)| LayerRecord {
                name: match i {
                    i if i < n_trunk => format!("trunk{i}"),
                    i if i < n_trunk + n_value => format!("value_trunk{}", i - n_trunk),
                    i if i == n_trunk + n_value => "policy".to_string(),
                    _ => "value".to_string(),
                },
                rows: l.outputs(),
                cols: l.inputs(),
                weights: l.weights.iter().copied().collect(),
                bias: l.bias.to_vec(),
            })
            .collect();
        ParamsRecord {
            input_dim,
            hidden,
            separate_value_trunk,
            layers,
        }
    }
}

impl TryFrom<ParamsRecord> for PolicyParams {
    type Error = String;

    fn try_from(rec: ParamsRecord) -> Result<Self, Self::Error> {
        let mut shell = PolicyParams::zeros_with(rec.input_dim, &rec.hidden, rec.separate_value_trunk);
        let expected = shell.trunk.len() + shell.value_trunk.len() + 2;
        if rec.layers.len() != expected {
            return Err(format!("expected {expected} layers, found {}", rec.layers.len()));
        }
        for (dst, src) in shell.layers_mut().zip(rec.layers) {
            if (src.rows, src.cols) != (dst.outputs(), dst.inputs())
                || src.weights.len() != src.rows * src.cols
                || src.bias.len() != src.rows
            {
                return Err(format!("layer {} has inconsistent shape", src.name));
            }
            dst.weights = Array2::from_shape_vec((src.rows, src.cols), src.weights).map_err(|e| e.to_string())?;
            dst.bias = Array1::from(src.bias);
        }
        Ok(shell)
    }
}
