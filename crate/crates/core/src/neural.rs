//! Small feed-forward networks with hand-written reverse-mode gradients.
//!
//! Parameters live in one flat vector so a policy network and a genotype are
//! the same buffer. Layer `l` stores its weight matrix row-major
//! (`out x in`) followed by its bias.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{check_len, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::InvalidArgument(format!("unknown activation `{other}`"))),
        }
    }
}

/// Architecture of a tanh MLP. Hidden layers always use tanh.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlpLayout {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub output_activation: Activation,
}

impl MlpLayout {
    pub fn new(
        input_dim: usize,
        hidden_dims: Vec<usize>,
        output_dim: usize,
        output_activation: Activation,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || hidden_dims.contains(&0) {
            return Err(Error::InvalidArgument("layer widths must be at least 1".into()));
        }
        Ok(MlpLayout {
            input_dim,
            hidden_dims,
            output_dim,
            output_activation,
        })
    }

    /// Widths of every layer, input first.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden_dims.len() + 2);
        w.push(self.input_dim);
        w.extend_from_slice(&self.hidden_dims);
        w.push(self.output_dim);
        w
    }

    pub fn num_layers(&self) -> usize {
        self.hidden_dims.len() + 1
    }

    pub fn num_params(&self) -> usize {
        self.widths().windows(2).map(|w| w[1] * (w[0] + 1)).sum()
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.num_layers() {
            self.output_activation
        } else {
            Activation::Tanh
        }
    }

    /// Stable textual identifier, e.g. `mlp:4-64-64-2:tanh`.
    pub fn id(&self) -> String {
        let dims: Vec<String> = self.widths().iter().map(|w| w.to_string()).collect();
        format!("mlp:{}:{}", dims.join("-"), self.output_activation)
    }

    pub fn from_id(id: &str) -> Result<Self> {
        let bad = || Error::LayoutMismatch(format!("malformed layout id `{id}`"));
        let mut parts = id.split(':');
        if parts.next() != Some("mlp") {
            return Err(bad());
        }
        let dims: Vec<usize> = parts
            .next()
            .ok_or_else(bad)?
            .split('-')
            .map(|d| d.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let activation: Activation = parts.next().ok_or_else(bad)?.parse()?;
        if parts.next().is_some() || dims.len() < 2 {
            return Err(bad());
        }
        MlpLayout::new(
            dims[0],
            dims[1..dims.len() - 1].to_vec(),
            dims[dims.len() - 1],
            activation,
        )
    }
}

/// Layout plus flat parameter storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    layout: MlpLayout,
    params: Vec<f64>,
    // (weight offset, bias offset, fan_in, fan_out) per layer
    offsets: Vec<(usize, usize, usize, usize)>,
}

/// Gradient of a scalar with respect to every parameter, aligned with [`Mlp::params`].
pub type GradientBundle = Vec<f64>;

/// Per-layer outputs recorded by a forward pass, reused across calls.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    activations: Vec<Vec<f64>>,
    deltas: [Vec<f64>; 2],
}

impl Tape {
    pub fn output(&self) -> &[f64] {
        self.activations.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn layer_offsets(layout: &MlpLayout) -> Vec<(usize, usize, usize, usize)> {
    let mut offset = 0;
    layout
        .widths()
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let entry = (offset, offset + fan_in * fan_out, fan_in, fan_out);
            offset += fan_out * (fan_in + 1);
            entry
        })
        .collect()
}

impl Mlp {
    pub fn zeros(layout: MlpLayout) -> Self {
        let params = vec![0.0; layout.num_params()];
        let offsets = layer_offsets(&layout);
        Mlp {
            layout,
            params,
            offsets,
        }
    }

    /// Uniform initialization in `±1/sqrt(fan_in)` for weights and biases.
    pub fn random<R: Rng + ?Sized>(layout: MlpLayout, rng: &mut R) -> Self {
        let mut net = Mlp::zeros(layout);
        for l in 0..net.offsets.len() {
            let (w, _, fan_in, fan_out) = net.offsets[l];
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut net.params[w..w + fan_out * (fan_in + 1)] {
                *p = rng.random_range(-bound..bound);
            }
        }
        net
    }

    pub fn from_flat(layout: MlpLayout, params: Vec<f64>) -> Result<Self> {
        check_len(layout.num_params(), params.len())?;
        let offsets = layer_offsets(&layout);
        Ok(Mlp {
            layout,
            params,
            offsets,
        })
    }

    pub fn layout(&self) -> &MlpLayout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.params
    }

    /// Weight matrix (row-major, `out x in`) and bias of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (w, b, _, fan_out) = self.offsets[l];
        (&self.params[w..b], &self.params[b..b + fan_out])
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let (w, b, _, fan_out) = self.offsets[l];
        let (weights, rest) = self.params[w..b + fan_out].split_at_mut(b - w);
        (weights, rest)
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let mut tape = Tape::default();
        self.forward_tape(input, &mut tape)?;
        Ok(tape.output().to_vec())
    }

    /// Forward pass recording every layer output in `tape`.
    pub fn forward_tape(&self, input: &[f64], tape: &mut Tape) -> Result<()> {
        check_len(self.layout.input_dim, input.len())?;
        let layers = self.offsets.len();
        tape.activations.resize_with(layers + 1, Vec::new);
        tape.activations[0].clear();
        tape.activations[0].extend_from_slice(input);
        for (l, &(w, b, fan_in, fan_out)) in self.offsets.iter().enumerate() {
            let act = self.layout.activation(l);
            let (prev, next) = tape.activations.split_at_mut(l + 1);
            let x = &prev[l];
            let y = &mut next[0];
            y.clear();
            let weights = &self.params[w..b];
            let bias = &self.params[b..b + fan_out];
            for (row, bias_o) in weights.chunks_exact(fan_in).zip(bias) {
                let z: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + bias_o;
                y.push(act.apply(z));
            }
        }
        Ok(())
    }

    /// Reverse pass for the output contracted with `upstream`.
    ///
    /// `param_grad` is accumulated into (not overwritten); `input_grad` is
    /// overwritten. Either may be skipped.
    pub fn backward_tape(
        &self,
        tape: &mut Tape,
        upstream: &[f64],
        mut param_grad: Option<&mut [f64]>,
        input_grad: Option<&mut [f64]>,
    ) -> Result<()> {
        check_len(self.layout.output_dim, upstream.len())?;
        if let Some(g) = param_grad.as_deref() {
            check_len(self.params.len(), g.len())?;
        }
        let layers = self.offsets.len();
        if tape.activations.len() != layers + 1 {
            return Err(Error::InvalidArgument("tape does not hold a forward pass".into()));
        }
        let Tape {
            activations,
            deltas,
        } = tape;
        let [delta, next_delta] = deltas;
        let out = &activations[layers];
        let act = self.layout.activation(layers - 1);
        delta.clear();
        delta.extend(
            upstream
                .iter()
                .zip(out)
                .map(|(u, y)| u * act.derivative_from_output(*y)),
        );

        for l in (0..layers).rev() {
            let (w, b, fan_in, _) = self.offsets[l];
            let x = &activations[l];
            if let Some(g) = param_grad.as_deref_mut() {
                for (o, d) in delta.iter().enumerate() {
                    if *d != 0.0 {
                        let row = &mut g[w + o * fan_in..w + (o + 1) * fan_in];
                        for (gi, xi) in row.iter_mut().zip(x.iter()) {
                            *gi += d * xi;
                        }
                    }
                    g[b + o] += d;
                }
            }
            if l == 0 && input_grad.is_none() {
                break;
            }
            next_delta.clear();
            next_delta.resize(fan_in, 0.0);
            let weights = &self.params[w..b];
            for (row, d) in weights.chunks_exact(fan_in).zip(delta.iter()) {
                if *d != 0.0 {
                    for (acc, wi) in next_delta.iter_mut().zip(row) {
                        *acc += wi * d;
                    }
                }
            }
            if l > 0 {
                let prev_act = self.layout.activation(l - 1);
                for (acc, y) in next_delta.iter_mut().zip(x.iter()) {
                    *acc *= prev_act.derivative_from_output(*y);
                }
            }
            std::mem::swap(delta, next_delta);
        }
        if let Some(ig) = input_grad {
            check_len(self.layout.input_dim, ig.len())?;
            ig.copy_from_slice(delta);
        }
        Ok(())
    }

    /// Gradients of `output · upstream` with respect to parameters and input.
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<(GradientBundle, Vec<f64>)> {
        let mut tape = Tape::default();
        self.forward_tape(input, &mut tape)?;
        let mut grads = vec![0.0; self.params.len()];
        let mut input_grad = vec![0.0; self.layout.input_dim];
        self.backward_tape(&mut tape, upstream, Some(&mut grads), Some(&mut input_grad))?;
        Ok((grads, input_grad))
    }
}

/// Plain gradient step: `params += step_size * grads`.
///
/// A positive step ascends, a negative one descends.
pub fn axpy_update(params: &mut [f64], grads: &[f64], step_size: f64) -> Result<()> {
    check_len(params.len(), grads.len())?;
    for (p, g) in params.iter_mut().zip(grads) {
        *p += step_size * g;
    }
    Ok(())
}

/// Adam optimizer state for one parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Bias-corrected Adam step that decreases the objective whose gradient is `grads`.
    pub fn descend(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        self.step(params, grads, -1.0)
    }

    /// Bias-corrected Adam step that increases the objective whose gradient is `grads`.
    pub fn ascend(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        self.step(params, grads, 1.0)
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], sign: f64) -> Result<()> {
        check_len(self.m.len(), params.len())?;
        check_len(self.m.len(), grads.len())?;
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] += sign * self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}
