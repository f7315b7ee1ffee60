use ndarray::Array2;

use super::loss::Batch;

/// Generalized advantage estimation over one environment's trajectory.
///
/// `dones[t]` marks that the episode ended with step `t`; no value is
/// bootstrapped across it. `last_value` is `V(s_T)` for the state after the
/// final step. Returns `(advantages, returns)` with `returns = A + V`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = last_value;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Per-step rollout storage for `n_envs` environments, env-major
/// (`index = env * n_steps + t`).
#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    n_envs: usize,
    n_steps: usize,
    obs_dim: usize,
    filled: Vec<usize>,
    pub obs: Vec<f64>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub dones: Vec<bool>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBuffer {
    pub fn new(n_envs: usize, n_steps: usize, obs_dim: usize) -> Self {
        let n = n_envs * n_steps;
        RolloutBuffer {
            n_envs,
            n_steps,
            obs_dim,
            filled: vec![0; n_envs],
            obs: vec![0.0; n * obs_dim],
            actions: vec![0; n],
            rewards: vec![0.0; n],
            values: vec![0.0; n],
            log_probs: vec![0.0; n],
            dones: vec![false; n],
            advantages: vec![0.0; n],
            returns: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.n_envs * self.n_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_envs(&self) -> usize {
        self.n_envs
    }

    pub fn is_full(&self) -> bool {
        self.filled.iter().all(|&f| f == self.n_steps)
    }

    pub fn clear(&mut self) {
        self.filled.iter_mut().for_each(|f| *f = 0);
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(&mut self, env: usize, obs: &[f64], action: usize, reward: f64, value: f64, log_prob: f64, done: bool) {
        let t = self.filled[env];
        assert!(t < self.n_steps, "rollout buffer full for env {env}");
        assert_eq!(obs.len(), self.obs_dim);
        let i = env * self.n_steps + t;
        self.obs[i * self.obs_dim..(i + 1) * self.obs_dim].copy_from_slice(obs);
        self.actions[i] = action;
        self.rewards[i] = reward;
        self.values[i] = value;
        self.log_probs[i] = log_prob;
        self.dones[i] = done;
        self.filled[env] = t + 1;
    }

    /// Fills advantages and returns; `last_values[e]` bootstraps env `e`.
    pub fn finish(&mut self, last_values: &[f64], gamma: f64, lambda: f64) {
        assert_eq!(last_values.len(), self.n_envs);
        for e in 0..self.n_envs {
            let r = e * self.n_steps..(e + 1) * self.n_steps;
            let (adv, ret) = compute_gae(
                &self.rewards[r.clone()],
                &self.values[r.clone()],
                &self.dones[r.clone()],
                last_values[e],
                gamma,
                lambda,
            );
            self.advantages[r.clone()].copy_from_slice(&adv);
            self.returns[r].copy_from_slice(&ret);
        }
    }

    /// Gathers the given sample indices into a batch.
    pub fn batch(&self, indices: &[usize]) -> Batch {
        let d = self.obs_dim;
        let mut obs = Array2::zeros((indices.len(), d));
        for (row, &i) in indices.iter().enumerate() {
            obs.row_mut(row)
                .as_slice_mut()
                .expect("row-major")
                .copy_from_slice(&self.obs[i * d..(i + 1) * d]);
        }
        Batch {
            obs,
            actions: indices.iter().map(|&i| self.actions[i]).collect(),
            old_log_probs: indices.iter().map(|&i| self.log_probs[i]).collect(),
            advantages: indices.iter().map(|&i| self.advantages[i]).collect(),
            returns: indices.iter().map(|&i| self.returns[i]).collect(),
        }
    }
}
