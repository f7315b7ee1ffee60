//! From-scratch policy optimization: network, GAE, PPO / A2C losses, Adam.

mod adam;
mod buffer;
mod checkpoint;
mod loss;
mod network;

pub use adam::{clip_grad_norm, Adam};
pub use buffer::{compute_gae, RolloutBuffer};
pub use checkpoint::Checkpoint;
pub use loss::{
    a2c_loss, importance_ratios, normalize_advantages, policy_loss, ppo_loss, Batch, LossStats, PolicyObjective,
};
pub use network::{log_softmax, ActionDistribution, Dense, ForwardCache, PolicyParams};

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("observation width {found} does not match network input {expected}")]
    Shape { expected: usize, found: usize },
    #[error("non-finite {0}; aborting update")]
    NonFinite(&'static str),
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    Format(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ppo,
    A2c,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ppo => "ppo",
            Algorithm::A2c => "a2c",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = OptimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ppo" => Ok(Algorithm::Ppo),
            "a2c" => Ok(Algorithm::A2c),
            _ => Err(OptimError::InvalidConfig(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Optimizer hyperparameters. Defaults follow the common library defaults for
/// each algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_range: f64,
    pub learning_rate: f64,
    /// Rollout length per environment.
    pub n_steps: usize,
    pub n_epochs: usize,
    pub batch_size: usize,
    pub vf_coef: f64,
    pub ent_coef: f64,
    pub max_grad_norm: f64,
    pub n_envs: usize,
    pub normalize_advantage: bool,
    pub hidden: Vec<usize>,
    /// Policy and value heads on separate trunks instead of one shared trunk.
    #[serde(default)]
    pub separate_value_trunk: bool,
}

impl OptimConfig {
    pub fn ppo() -> Self {
        OptimConfig {
            algorithm: Algorithm::Ppo,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_range: 0.2,
            learning_rate: 3e-4,
            n_steps: 2048,
            n_epochs: 10,
            batch_size: 64,
            vf_coef: 0.5,
            ent_coef: 0.0,
            max_grad_norm: 0.5,
            n_envs: 4,
            normalize_advantage: true,
            hidden: vec![64, 64],
            separate_value_trunk: true,
        }
    }

    pub fn a2c() -> Self {
        OptimConfig {
            algorithm: Algorithm::A2c,
            gamma: 0.99,
            gae_lambda: 1.0,
            clip_range: 0.2,
            learning_rate: 7e-4,
            n_steps: 5,
            n_epochs: 1,
            batch_size: 20,
            vf_coef: 0.5,
            ent_coef: 0.0,
            max_grad_norm: 0.5,
            n_envs: 4,
            normalize_advantage: false,
            hidden: vec![64, 64],
            separate_value_trunk: true,
        }
    }

    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Ppo => Self::ppo(),
            Algorithm::A2c => Self::a2c(),
        }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |m: &str| Err(OptimError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gamma and lambda must lie in [0, 1]");
        }
        if self.algorithm == Algorithm::Ppo && !(self.clip_range > 0.0 && self.clip_range < 1.0) {
            return bad("clip range must lie in (0, 1)");
        }
        if self.n_envs == 0 || self.n_steps == 0 || self.n_epochs == 0 || self.batch_size == 0 {
            return bad("rollout and batch sizes must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.max_grad_norm > 0.0) {
            return bad("learning rate and gradient cap must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub grad_norm: f64,
    pub minibatches: usize,
}

impl UpdateStats {
    fn accumulate(&mut self, s: &LossStats, grad_norm: f64) {
        self.loss += s.loss;
        self.policy_loss += s.policy_loss;
        self.value_loss += s.value_loss;
        self.entropy += s.entropy;
        self.approx_kl += s.approx_kl;
        self.clip_fraction += s.clip_fraction;
        self.grad_norm += grad_norm;
        self.minibatches += 1;
    }

    fn average(mut self) -> Self {
        let n = self.minibatches.max(1) as f64;
        self.loss /= n;
        self.policy_loss /= n;
        self.value_loss /= n;
        self.entropy /= n;
        self.approx_kl /= n;
        self.clip_fraction /= n;
        self.grad_norm /= n;
        self
    }
}

/// Clipped-surrogate epochs over shuffled minibatches of a finished buffer.
pub fn ppo_update<R: Rng + ?Sized>(
    params: &mut PolicyParams,
    adam: &mut Adam,
    buffer: &RolloutBuffer,
    config: &OptimConfig,
    rng: &mut R,
) -> Result<UpdateStats, OptimError> {
    let mut stats = UpdateStats::default();
    let mut indices: Vec<usize> = (0..buffer.len()).collect();
    for _ in 0..config.n_epochs {
        indices.shuffle(rng);
        for chunk in indices.chunks(config.batch_size) {
            let mut batch = buffer.batch(chunk);
            if config.normalize_advantage {
                normalize_advantages(&mut batch.advantages);
            }
            let (loss, mut grads) = ppo_loss(params, &batch, config.clip_range, config.vf_coef, config.ent_coef)?;
            let norm = clip_grad_norm(&mut grads, config.max_grad_norm);
            adam.apply(params, &grads, config.learning_rate);
            stats.accumulate(&loss, norm);
        }
    }
    Ok(stats.average())
}

/// Loss and gradient of the on-policy advantage actor-critic objective over
/// the whole buffer.
pub fn a2c_gradients(params: &PolicyParams, buffer: &RolloutBuffer, config: &OptimConfig) -> Result<(LossStats, PolicyParams), OptimError> {
    let all: Vec<usize> = (0..buffer.len()).collect();
    let mut batch = buffer.batch(&all);
    if config.normalize_advantage {
        normalize_advantages(&mut batch.advantages);
    }
    a2c_loss(params, &batch, config.vf_coef, config.ent_coef)
}

/// One A2C step: full-buffer gradient, norm clipping, Adam.
pub fn a2c_update(
    params: &mut PolicyParams,
    adam: &mut Adam,
    buffer: &RolloutBuffer,
    config: &OptimConfig,
) -> Result<UpdateStats, OptimError> {
    let (loss, mut grads) = a2c_gradients(params, buffer, config)?;
    let norm = clip_grad_norm(&mut grads, config.max_grad_norm);
    adam.apply(params, &grads, config.learning_rate);
    let mut stats = UpdateStats::default();
    stats.accumulate(&loss, norm);
    Ok(stats.average())
}
