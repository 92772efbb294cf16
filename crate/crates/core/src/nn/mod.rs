//! Q-function approximator: a ReLU multilayer perceptron with linear output.
//!
//! The default shape is `input → 64 → 64 → 3`, with inverted dropout after the
//! last hidden layer and an L2 penalty on hidden activations. Gradients are
//! computed analytically for the squared TD error of the taken action only.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Stream};
use crate::{Error, Result};

mod adam;
mod checkpoint;

pub use adam::AdamState;
pub use checkpoint::NET_CHECKPOINT_VERSION;
pub(crate) use checkpoint::check_version as checkpoint_version;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Stacks equally wide rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::ShapeMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub dropout_rate: f64,
    pub l2_activity: f64,
    pub seed: u64,
}

impl NetConfig {
    /// Two hidden layers of 64 units, three outputs, dropout 0.1, activity
    /// penalty 1e-6.
    pub fn standard(input_dim: usize) -> Self {
        NetConfig {
            input_dim,
            hidden_dims: vec![64, 64],
            output_dim: 3,
            dropout_rate: 0.1,
            l2_activity: 1e-6,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_dims.contains(&0) {
            return Err(Error::Config(format!("network dimensions must be positive: {self:?}")));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!("dropout rate {} not in [0, 1)", self.dropout_rate)));
        }
        if !(self.l2_activity >= 0.0 && self.l2_activity.is_finite()) {
            return Err(Error::Config(format!("l2 activity {} must be >= 0", self.l2_activity)));
        }
        Ok(())
    }

    /// `(inputs, outputs)` of each dense layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = vec![self.input_dim];
        dims.extend(&self.hidden_dims);
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Trainable weights and biases of a network shape.
pub fn param_count(config: &NetConfig) -> usize {
    config.layer_shapes().iter().map(|(i, o)| i * o + o).sum()
}

/// Dense layer; `weights` is `[inputs × outputs]`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn weight_row(&self, k: usize) -> &[f64] {
        &self.weights[k * self.outputs..(k + 1) * self.outputs]
    }
}

/// Parameters of every layer. Gradients use the same type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub layers: Vec<Layer>,
}

impl NetParams {
    /// He-uniform weights (`±sqrt(6 / fan_in)`), zero biases.
    pub fn init(config: &NetConfig) -> Self {
        let mut rng = rng::stream(config.seed, Stream::Init);
        let layers = config
            .layer_shapes()
            .into_iter()
            .map(|(inputs, outputs)| {
                let limit = (6.0 / inputs as f64).sqrt();
                let mut layer = Layer::zeros(inputs, outputs);
                for w in &mut layer.weights {
                    *w = rng.random_range(-limit..limit);
                }
                layer
            })
            .collect();
        NetParams { layers }
    }

    pub fn zeros(config: &NetConfig) -> Self {
        NetParams {
            layers: config
                .layer_shapes()
                .into_iter()
                .map(|(i, o)| Layer::zeros(i, o))
                .collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        NetParams {
            layers: self.layers.iter().map(|l| Layer::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.inputs, l.outputs)).collect()
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Weight and bias slices, layer by layer.
    pub fn slices(&self) -> impl Iterator<Item = &[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.biases.as_slice()])
    }

    pub fn slices_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.biases.as_mut_slice()])
    }

    /// All parameters in layer order (weights, then biases).
    pub fn flatten(&self) -> Vec<f64> {
        self.slices().flat_map(|s| s.iter().copied()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.slices().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Fresh dropout masks, cache returned for backpropagation.
    Train,
    /// Deterministic, no dropout.
    Eval,
}

/// Intermediate values of a train-mode forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input of each dense layer (after dropout where applied).
    inputs: Vec<Matrix>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Matrix>,
    /// Post-ReLU activations of the hidden layers, before dropout.
    hidden: Vec<Matrix>,
    /// Inverted-dropout multipliers of the last hidden layer (`0` or `1/(1-p)`).
    mask: Option<Vec<f64>>,
}

/// A network shape together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    config: NetConfig,
    params: NetParams,
}

fn affine(input: &Matrix, layer: &Layer) -> Matrix {
    let mut out = Matrix::zeros(input.rows, layer.outputs);
    for i in 0..input.rows {
        let x = input.row(i);
        let o = out.row_mut(i);
        o.copy_from_slice(&layer.biases);
        for (k, &xk) in x.iter().enumerate() {
            if xk == 0.0 {
                continue;
            }
            for (oj, wj) in o.iter_mut().zip(layer.weight_row(k)) {
                *oj += xk * wj;
            }
        }
    }
    out
}

fn check_finite(m: &Matrix, what: impl FnOnce() -> String) -> Result<()> {
    if m.data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what()))
    }
}

impl QNetwork {
    pub fn new(config: NetConfig) -> Result<Self> {
        config.validate()?;
        let params = NetParams::init(&config);
        Ok(QNetwork { config, params })
    }

    pub fn from_parts(config: NetConfig, params: NetParams) -> Result<Self> {
        config.validate()?;
        if params.shapes() != config.layer_shapes() {
            return Err(Error::Config(format!(
                "parameter shapes {:?} do not match {:?}",
                params.shapes(),
                config.layer_shapes()
            )));
        }
        Ok(QNetwork { config, params })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn params(&self) -> &NetParams {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut NetParams {
        &mut self.params
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    /// Overwrites the parameters with a copy of `other`'s.
    pub fn copy_from(&mut self, other: &QNetwork) {
        self.params.clone_from(&other.params);
    }

    fn check_input(&self, states: &Matrix) -> Result<()> {
        if states.cols != self.config.input_dim {
            return Err(Error::ShapeMismatch {
                expected: self.config.input_dim,
                actual: states.cols,
            });
        }
        Ok(())
    }

    /// Q-values of a batch of states, `[batch × outputs]`. The cache is
    /// returned in train mode only.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        states: &Matrix,
        mode: Mode,
        rng: &mut R,
    ) -> Result<(Matrix, Option<ForwardCache>)> {
        self.check_input(states)?;
        let n_hidden = self.params.layers.len() - 1;
        let train = mode == Mode::Train;
        let mut inputs = Vec::with_capacity(n_hidden + 1);
        let mut pre = Vec::with_capacity(n_hidden);
        let mut hidden = Vec::with_capacity(n_hidden);
        let mut mask = None;

        let mut a = states.clone();
        for (l, layer) in self.params.layers[..n_hidden].iter().enumerate() {
            let z = affine(&a, layer);
            check_finite(&z, || format!("hidden layer {}", l + 1))?;
            let h = Matrix {
                data: z.data.iter().map(|v| v.max(0.0)).collect(),
                ..z
            };
            if !train {
                a = h;
                continue;
            }
            let mut next = h.clone();
            let p = self.config.dropout_rate;
            if l + 1 == n_hidden && p > 0.0 {
                let keep = 1.0 / (1.0 - p);
                let m: Vec<f64> = (0..h.data.len())
                    .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
                    .collect();
                for (v, k) in next.data.iter_mut().zip(&m) {
                    *v *= k;
                }
                mask = Some(m);
            }
            inputs.push(std::mem::replace(&mut a, next));
            pre.push(z);
            hidden.push(h);
        }
        let q = affine(&a, &self.params.layers[n_hidden]);
        check_finite(&q, || "output layer".into())?;
        let cache = train.then(|| {
            inputs.push(a);
            ForwardCache {
                inputs,
                pre,
                hidden,
                mask,
            }
        });
        Ok((q, cache))
    }

    /// Eval-mode forward pass.
    pub fn predict(&self, states: &Matrix) -> Result<Matrix> {
        // eval mode draws nothing from the generator
        let mut unused = rng::stream(0, Stream::Dropout);
        Ok(self.forward(states, Mode::Eval, &mut unused)?.0)
    }

    /// Loss `mean_i (y_i - Q(s_i, a_i))² + l2 · mean_i Σ h²` and its gradient.
    ///
    /// The forward pass runs in train mode, so dropout masks are drawn from
    /// `rng` and reused by the backward pass.
    pub fn loss_and_grads<R: Rng + ?Sized>(
        &self,
        states: &Matrix,
        actions: &[usize],
        targets: &[f64],
        rng: &mut R,
    ) -> Result<(f64, NetParams)> {
        let batch = states.rows;
        if batch == 0 {
            return Err(Error::TooFewObservations { needed: 1, got: 0 });
        }
        if actions.len() != batch || targets.len() != batch {
            return Err(Error::LengthMismatch {
                left: batch,
                right: actions.len().min(targets.len()),
            });
        }
        if let Some(a) = actions.iter().find(|a| **a >= self.config.output_dim) {
            return Err(Error::ShapeMismatch {
                expected: self.config.output_dim,
                actual: *a + 1,
            });
        }
        if targets.iter().any(|y| !y.is_finite()) {
            return Err(Error::NonFinite("targets".into()));
        }
        let (q, cache) = self.forward(states, Mode::Train, rng)?;
        let cache = cache.expect("train mode returns a cache");
        let n = batch as f64;
        let l2 = self.config.l2_activity;

        let mut loss = 0.0;
        let mut dz = Matrix::zeros(batch, self.config.output_dim);
        for i in 0..batch {
            let err = q.get(i, actions[i]) - targets[i];
            loss += err * err;
            dz.row_mut(i)[actions[i]] = 2.0 * err / n;
        }
        loss /= n;
        if l2 > 0.0 {
            let penalty: f64 = cache.hidden.iter().flat_map(|h| &h.data).map(|v| v * v).sum();
            loss += l2 * penalty / n;
        }
        if !loss.is_finite() {
            return Err(Error::NonFinite("loss".into()));
        }

        let mut grads = self.params.zeros_like();
        let n_layers = self.params.layers.len();
        for l in (0..n_layers).rev() {
            let layer = &self.params.layers[l];
            let a = &cache.inputs[l];
            let g = &mut grads.layers[l];
            for i in 0..batch {
                let dzi = dz.row(i);
                for (gb, d) in g.biases.iter_mut().zip(dzi) {
                    *gb += d;
                }
                for (k, &ak) in a.row(i).iter().enumerate() {
                    if ak == 0.0 {
                        continue;
                    }
                    let gw = &mut g.weights[k * layer.outputs..(k + 1) * layer.outputs];
                    for (w, d) in gw.iter_mut().zip(dzi) {
                        *w += ak * d;
                    }
                }
            }
            if l == 0 {
                break;
            }
            // gradient w.r.t. the hidden activation feeding layer l
            let h = &cache.hidden[l - 1];
            let z = &cache.pre[l - 1];
            let mut next = Matrix::zeros(batch, layer.inputs);
            for i in 0..batch {
                let dzi = dz.row(i);
                let out = next.row_mut(i);
                for (k, o) in out.iter_mut().enumerate() {
                    let da: f64 = layer.weight_row(k).iter().zip(dzi).map(|(w, d)| w * d).sum();
                    let idx = i * layer.inputs + k;
                    let mut dh = match (&cache.mask, l == n_layers - 1) {
                        (Some(m), true) => da * m[idx],
                        _ => da,
                    };
                    dh += 2.0 * l2 * h.data[idx] / n;
                    *o = if z.data[idx] > 0.0 { dh } else { 0.0 };
                }
            }
            dz = next;
        }
        if !grads.is_finite() {
            return Err(Error::NonFinite("gradients".into()));
        }
        Ok((loss, grads))
    }
}
