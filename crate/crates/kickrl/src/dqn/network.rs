//! The Q-network: a small fully connected net with two ReLU hidden layers
//! and a 3-wide linear output, plus hand-written backpropagation.
//!
//! Weight matrices are stored row-major with shape `(in, out)`, so layer
//! evaluation is `y = x * W + b`. The inner loops run over the output index,
//! which keeps the accumulators independent.

use crate::dqn::Transition;
use rand::Rng;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

/// Number of discrete actions, and therefore the output width.
pub const ACTION_COUNT: usize = 3;

/// One dense layer; also used to hold per-parameter gradients of a layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `(in, out)` matrix, row-major: `w[i * out + o]`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            w: vec![0.0; fan_in * fan_out],
            b: vec![0.0; fan_out],
        }
    }
}

/// MLP mapping an observation vector to one value per action.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    /// Layer widths: `[input, hidden, hidden, ACTION_COUNT]`.
    dims: Vec<usize>,
    layers: Vec<Layer>,
}

impl QNetwork {
    /// Fresh network with weights uniform in `[-1/sqrt(fan_in),
    /// 1/sqrt(fan_in)]`, sampled in storage order, and zero biases.
    pub fn new<R: Rng>(input_dim: usize, hidden_width: usize, rng: &mut R) -> Self {
        assert!(input_dim >= 1 && hidden_width >= 1);
        let dims = vec![input_dim, hidden_width, hidden_width, ACTION_COUNT];
        let layers = dims
            .windows(2)
            .map(|d| {
                let (fan_in, fan_out) = (d[0], d[1]);
                let limit = 1.0 / (fan_in as f64).sqrt();
                Layer {
                    w: (0..fan_in * fan_out)
                        .map(|_| rng.gen_range(-limit..limit))
                        .collect(),
                    b: vec![0.0; fan_out],
                }
            })
            .collect();
        Self { dims, layers }
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn layer(&self, i: usize) -> &Layer {
        &self.layers[i]
    }

    pub fn layer_mut(&mut self, i: usize) -> &mut Layer {
        &mut self.layers[i]
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Reads parameter `k` of the flat `[w0, b0, w1, b1, w2, b2]` order.
    pub fn param(&self, k: usize) -> f64 {
        flat_param(&self.layers, k)
    }

    pub fn set_param(&mut self, k: usize, v: f64) {
        *flat_param_mut(&mut self.layers, k) = v;
    }

    /// Evaluates the network. Allocates scratch space; use
    /// [`QNetwork::forward_scratch`] in hot loops.
    pub fn forward(&self, x: &[f64]) -> [f64; ACTION_COUNT] {
        self.forward_scratch(x, &mut Scratch::for_net(self))
    }

    /// Evaluates the network into reusable buffers, leaving per-layer
    /// activations in `scratch` for a later backward pass.
    pub fn forward_scratch(&self, x: &[f64], scratch: &mut Scratch) -> [f64; ACTION_COUNT] {
        assert_eq!(
            x.len(),
            self.dims[0],
            "observation width {} does not match network input width {}",
            x.len(),
            self.dims[0]
        );
        scratch.fit(self);
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let out = self.dims[l + 1];
            let (done, rest) = scratch.acts.split_at_mut(l);
            let input: &[f64] = if l == 0 { x } else { &done[l - 1] };
            let act = &mut rest[0];
            act.copy_from_slice(&layer.b);
            for (i, &xi) in input.iter().enumerate() {
                let row = &layer.w[i * out..(i + 1) * out];
                for (a, &w) in act.iter_mut().zip(row) {
                    *a += w * xi;
                }
            }
            if l < last {
                for a in act.iter_mut() {
                    if *a < 0.0 {
                        *a = 0.0;
                    }
                }
            }
        }
        let q = &scratch.acts[last];
        [q[0], q[1], q[2]]
    }

    /// Backpropagates the squared TD error of one transition, scaled by
    /// `weight`, into `grads`. Returns the unscaled squared error.
    ///
    /// `scratch` must hold the activations of a forward pass on
    /// `t.obs.values` done immediately before.
    fn backward_into(
        &self,
        t: &Transition,
        y: f64,
        weight: f64,
        grads: &mut NetGradients,
        scratch: &mut Scratch,
    ) -> f64 {
        let last = self.layers.len() - 1;
        let q_taken = scratch.acts[last][t.action];
        let err = q_taken - y;

        scratch.delta.clear();
        scratch.delta.resize(ACTION_COUNT, 0.0);
        scratch.delta[t.action] = 2.0 * err * weight;

        for l in (0..self.layers.len()).rev() {
            let out = self.dims[l + 1];
            let input: &[f64] = if l == 0 {
                &t.obs.values
            } else {
                &scratch.acts[l - 1]
            };
            let layer = &self.layers[l];
            let g = &mut grads.layers[l];
            for (gb, &d) in g.b.iter_mut().zip(&scratch.delta) {
                *gb += d;
            }
            scratch.delta_prev.clear();
            scratch.delta_prev.resize(self.dims[l], 0.0);
            for (i, &xi) in input.iter().enumerate() {
                let w_row = &layer.w[i * out..(i + 1) * out];
                let g_row = &mut g.w[i * out..(i + 1) * out];
                let mut dx = 0.0;
                for ((gw, &w), &d) in g_row.iter_mut().zip(w_row).zip(&scratch.delta) {
                    *gw += d * xi;
                    dx += w * d;
                }
                // ReLU gate of the upstream layer.
                scratch.delta_prev[i] = if l == 0 || xi > 0.0 { dx } else { 0.0 };
            }
            std::mem::swap(&mut scratch.delta, &mut scratch.delta_prev);
        }
        err * err
    }
}

/// Reusable forward/backward buffers for one network shape.
#[derive(Debug, Clone)]
pub struct Scratch {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Scratch {
    pub fn for_net(net: &QNetwork) -> Self {
        Self {
            acts: net.dims[1..].iter().map(|&d| vec![0.0; d]).collect(),
            delta: Vec::new(),
            delta_prev: Vec::new(),
        }
    }

    fn fit(&mut self, net: &QNetwork) {
        if self.acts.len() != net.layers.len()
            || self.acts.iter().zip(&net.dims[1..]).any(|(a, &d)| a.len() != d)
        {
            *self = Self::for_net(net);
        }
    }
}

/// Per-parameter gradients, shaped like the network they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGradients {
    layers: Vec<Layer>,
}

impl NetGradients {
    pub fn zeros(net: &QNetwork) -> Self {
        Self {
            layers: net
                .dims
                .windows(2)
                .map(|d| Layer::zeros(d[0], d[1]))
                .collect(),
        }
    }

    pub fn reset(&mut self) {
        for l in &mut self.layers {
            l.w.fill(0.0);
            l.b.fill(0.0);
        }
    }

    pub fn layer(&self, i: usize) -> &Layer {
        &self.layers[i]
    }

    pub fn param(&self, k: usize) -> f64 {
        flat_param(&self.layers, k)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }
}

fn flat_param(layers: &[Layer], mut k: usize) -> f64 {
    for l in layers {
        if k < l.w.len() {
            return l.w[k];
        }
        k -= l.w.len();
        if k < l.b.len() {
            return l.b[k];
        }
        k -= l.b.len();
    }
    panic!("parameter index out of range");
}

fn flat_param_mut(layers: &mut [Layer], mut k: usize) -> &mut f64 {
    for l in layers {
        if k < l.w.len() {
            return &mut l.w[k];
        }
        k -= l.w.len();
        if k < l.b.len() {
            return &mut l.b[k];
        }
        k -= l.b.len();
    }
    panic!("parameter index out of range");
}

/// One-step bootstrapped regression target: `r` for terminal transitions,
/// otherwise `r + gamma * max(next_q)`.
pub fn td_target(r: f64, next_q: &[f64; ACTION_COUNT], terminal: bool, gamma: f64) -> f64 {
    if terminal {
        r
    } else {
        r + gamma * next_q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Mean squared TD error of a batch. Targets come from `target_net` and are
/// treated as constants.
pub fn loss(net: &QNetwork, target_net: &QNetwork, batch: &[Transition], gamma: f64) -> f64 {
    assert!(!batch.is_empty(), "loss of an empty batch is undefined");
    let mut scratch = Scratch::for_net(net);
    let mut total = 0.0;
    for t in batch {
        let next_q = target_net.forward_scratch(&t.next_obs.values, &mut scratch);
        let y = td_target(t.reward, &next_q, t.terminal, gamma);
        let q = net.forward_scratch(&t.obs.values, &mut scratch);
        let err = q[t.action] - y;
        total += err * err;
    }
    total / batch.len() as f64
}

/// Analytic gradient of [`loss`] with respect to every parameter of `net`.
pub fn gradients(
    net: &QNetwork,
    target_net: &QNetwork,
    batch: &[Transition],
    gamma: f64,
) -> NetGradients {
    assert!(!batch.is_empty());
    let mut grads = NetGradients::zeros(net);
    let mut scratch = Scratch::for_net(net);
    let weight = 1.0 / batch.len() as f64;
    for t in batch {
        let next_q = target_net.forward_scratch(&t.next_obs.values, &mut scratch);
        let y = td_target(t.reward, &next_q, t.terminal, gamma);
        net.forward_scratch(&t.obs.values, &mut scratch);
        net.backward_into(t, y, weight, &mut grads, &mut scratch);
    }
    grads
}

/// Batched gradient pass reusing caller buffers; returns the batch loss.
pub(crate) fn accumulate_batch<'a>(
    net: &QNetwork,
    target_net: &QNetwork,
    batch: impl Iterator<Item = &'a Transition>,
    batch_len: usize,
    gamma: f64,
    grads: &mut NetGradients,
    scratch: &mut Scratch,
) -> f64 {
    let weight = 1.0 / batch_len as f64;
    let mut total = 0.0;
    for t in batch {
        let next_q = target_net.forward_scratch(&t.next_obs.values, scratch);
        let y = td_target(t.reward, &next_q, t.terminal, gamma);
        net.forward_scratch(&t.obs.values, scratch);
        total += net.backward_into(t, y, weight, grads, scratch);
    }
    total * weight
}

/// Deep copy for use as a frozen target network.
pub fn sync_target(net: &QNetwork) -> QNetwork {
    net.clone()
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    Format(String),
}

/// Writes the network to a text checkpoint.
///
/// Line layout, all values space-separated with full round-trip precision:
///
/// ```text
/// kickrl-qnet v1
/// dims <input> <hidden> <hidden> 3
/// weights <layer> <in*out values, row-major over (in, out)>
/// biases <layer> <out values>
/// ```
pub fn save_checkpoint(net: &QNetwork, path: &Path) -> Result<(), CheckpointError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "kickrl-qnet v1")?;
    write!(f, "dims")?;
    for d in &net.dims {
        write!(f, " {d}")?;
    }
    writeln!(f)?;
    for (l, layer) in net.layers.iter().enumerate() {
        write!(f, "weights {l}")?;
        for v in &layer.w {
            write!(f, " {v}")?;
        }
        writeln!(f)?;
        write!(f, "biases {l}")?;
        for v in &layer.b {
            write!(f, " {v}")?;
        }
        writeln!(f)?;
    }
    f.flush()?;
    Ok(())
}

/// Reads a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(path: &Path) -> Result<QNetwork, CheckpointError> {
    let bad = |msg: &str| CheckpointError::Format(format!("{}: {msg}", path.display()));
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut lines = f.lines();

    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    if header.trim() != "kickrl-qnet v1" {
        return Err(bad(&format!("unsupported header {header:?}")));
    }

    let dims_line = lines.next().ok_or_else(|| bad("missing dims line"))??;
    let mut it = dims_line.split_whitespace();
    if it.next() != Some("dims") {
        return Err(bad("expected dims line"));
    }
    let dims: Vec<usize> = it
        .map(|t| t.parse().map_err(|_| bad(&format!("bad dim {t:?}"))))
        .collect::<Result<_, _>>()?;
    if dims.len() != 4 || dims[3] != ACTION_COUNT || dims.iter().any(|&d| d == 0) {
        return Err(bad(&format!("unsupported dims {dims:?}")));
    }

    let mut layers = Vec::new();
    for l in 0..dims.len() - 1 {
        let (fan_in, fan_out) = (dims[l], dims[l + 1]);
        let w = parse_array(&mut lines, "weights", l, fan_in * fan_out, &bad)?;
        let b = parse_array(&mut lines, "biases", l, fan_out, &bad)?;
        layers.push(Layer { w, b });
    }
    Ok(QNetwork { dims, layers })
}

fn parse_array(
    lines: &mut impl Iterator<Item = std::io::Result<String>>,
    kind: &str,
    layer: usize,
    expect_len: usize,
    bad: &dyn Fn(&str) -> CheckpointError,
) -> Result<Vec<f64>, CheckpointError> {
    let line = lines
        .next()
        .ok_or_else(|| bad(&format!("missing {kind} {layer}")))??;
    let mut it = line.split_whitespace();
    if it.next() != Some(kind) || it.next() != Some(layer.to_string().as_str()) {
        return Err(bad(&format!("expected {kind} {layer} line")));
    }
    let vals: Vec<f64> = it
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(&format!("bad value {t:?} in {kind} {layer}")))
        })
        .collect::<Result<_, _>>()?;
    if vals.len() != expect_len {
        return Err(bad(&format!(
            "{kind} {layer} has {} values, expected {expect_len}",
            vals.len()
        )));
    }
    Ok(vals)
}
