//! From-scratch deep Q-learning: MLP value network, experience replay,
//! periodically synchronized target network, epsilon-greedy exploration, and
//! Adam on the squared TD error.

mod adam;
pub mod network;
mod replay;

pub use adam::{adam_update, AdamState};
pub use network::{
    gradients, load_checkpoint, loss, save_checkpoint, sync_target, td_target, CheckpointError,
    NetGradients, QNetwork, Scratch, ACTION_COUNT,
};
pub use replay::ReplayBuffer;

use crate::obs::Observation;
use rand::Rng;

/// One replay record.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    /// Action index in `0..ACTION_COUNT`.
    pub action: usize,
    pub reward: f64,
    pub next_obs: Observation,
    pub terminal: bool,
}

/// Training hyperparameters. Every field is exposed in the experiment config
/// so ablations can assert that only the observation encoding differs.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Target network refresh period, in gradient updates.
    pub target_sync_interval: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Episodes over which epsilon anneals linearly from start to end.
    pub epsilon_decay_episodes: u32,
    /// Replay size below which updates are skipped.
    pub warmup_transitions: usize,
    pub hidden_width: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            learning_rate: 1e-3,
            batch_size: 64,
            replay_capacity: 50_000,
            target_sync_interval: 200,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_episodes: 500,
            warmup_transitions: 1000,
            hidden_width: 64,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(format!("agent.gamma must be in [0, 1), got {}", self.gamma));
        }
        if !(self.learning_rate > 0.0) {
            return Err(format!(
                "agent.learning_rate must be > 0, got {}",
                self.learning_rate
            ));
        }
        for (name, v) in [
            ("agent.batch_size", self.batch_size),
            ("agent.replay_capacity", self.replay_capacity),
            ("agent.warmup_transitions", self.warmup_transitions),
            ("agent.hidden_width", self.hidden_width),
        ] {
            if v == 0 {
                return Err(format!("{name} must be >= 1"));
            }
        }
        if self.target_sync_interval == 0 {
            return Err("agent.target_sync_interval must be >= 1".into());
        }
        if self.epsilon_decay_episodes == 0 {
            return Err("agent.epsilon_decay_episodes must be >= 1".into());
        }
        for (name, v) in [
            ("agent.epsilon_start", self.epsilon_start),
            ("agent.epsilon_end", self.epsilon_end),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        if self.epsilon_end > self.epsilon_start {
            return Err(format!(
                "agent.epsilon_end {} must not exceed agent.epsilon_start {}",
                self.epsilon_end, self.epsilon_start
            ));
        }
        Ok(())
    }
}

/// Exploration rate for a (0-based) episode: linear from `epsilon_start` to
/// `epsilon_end` over `epsilon_decay_episodes`, then constant.
pub fn epsilon_for_episode(cfg: &AgentConfig, episode: u32) -> f64 {
    let frac = (episode as f64 / cfg.epsilon_decay_episodes as f64).min(1.0);
    cfg.epsilon_start * (1.0 - frac) + cfg.epsilon_end * frac
}

/// Epsilon-greedy choice over the action values. Greedy ties break toward
/// the lowest index.
pub fn select_action<R: Rng>(q: &[f64; ACTION_COUNT], epsilon: f64, rng: &mut R) -> usize {
    debug_assert!((0.0..=1.0).contains(&epsilon));
    if rng.gen_range(0.0..1.0) < epsilon {
        rng.gen_range(0..ACTION_COUNT)
    } else {
        let mut best = 0;
        for (i, &v) in q.iter().enumerate().skip(1) {
            if v > q[best] {
                best = i;
            }
        }
        best
    }
}

/// A Q-network, its frozen target copy, replay memory, and optimizer state.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    net: QNetwork,
    target: QNetwork,
    pub replay: ReplayBuffer,
    adam: AdamState,
    cfg: AgentConfig,
    train_steps: u64,
    grads: NetGradients,
    scratch: Scratch,
    batch_idx: Vec<usize>,
}

impl DqnAgent {
    /// Fresh agent; `rng` seeds the weight initialization only.
    pub fn new<R: Rng>(cfg: AgentConfig, input_dim: usize, rng: &mut R) -> Self {
        let net = QNetwork::new(input_dim, cfg.hidden_width, rng);
        let target = sync_target(&net);
        let adam = AdamState::new(&net);
        let grads = NetGradients::zeros(&net);
        let scratch = Scratch::for_net(&net);
        Self {
            replay: ReplayBuffer::new(cfg.replay_capacity),
            net,
            target,
            adam,
            cfg,
            train_steps: 0,
            grads,
            scratch,
            batch_idx: Vec::new(),
        }
    }

    pub fn net(&self) -> &QNetwork {
        &self.net
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    /// Action values of the live network for one observation.
    pub fn q_values(&mut self, obs: &Observation) -> [f64; ACTION_COUNT] {
        self.net.forward_scratch(&obs.values, &mut self.scratch)
    }

    /// Epsilon-greedy action for one observation.
    pub fn act<R: Rng>(&mut self, obs: &Observation, epsilon: f64, rng: &mut R) -> usize {
        let q = self.q_values(obs);
        select_action(&q, epsilon, rng)
    }

    pub fn record(&mut self, t: Transition) {
        assert_eq!(
            t.obs.len(),
            self.net.input_dim(),
            "transition width does not match the agent's input width"
        );
        self.replay.push(t);
    }

    /// One gradient update on a uniformly sampled batch, or `None` while the
    /// replay is below the warmup threshold.
    ///
    /// Every `target_sync_interval` updates the target network is refreshed
    /// to a copy of the live network.
    pub fn train_step<R: Rng>(&mut self, rng: &mut R) -> Option<f64> {
        if self.replay.len() < self.cfg.warmup_transitions {
            return None;
        }
        self.replay
            .sample_indices(self.cfg.batch_size, rng, &mut self.batch_idx);
        self.grads.reset();
        let replay = &self.replay;
        let batch = self.batch_idx.iter().map(|&i| replay.get(i));
        let loss = network::accumulate_batch(
            &self.net,
            &self.target,
            batch,
            self.batch_idx.len(),
            self.cfg.gamma,
            &mut self.grads,
            &mut self.scratch,
        );
        self.adam
            .apply(&mut self.net, &self.grads, self.cfg.learning_rate);
        self.train_steps += 1;
        if self.train_steps % self.cfg.target_sync_interval == 0 {
            self.target = sync_target(&self.net);
        }
        Some(loss)
    }
}
