//! PPO clipped-surrogate and A2C objectives with analytic gradients.

use ndarray::{Array1, Array2};

use super::network::{log_softmax, PolicyParams};
use super::OptimError;

/// A batch of decisions to differentiate through.
#[derive(Debug, Clone)]
pub struct Batch {
    /// `n x input_dim`
    pub obs: Array2<f64>,
    pub actions: Vec<usize>,
    /// Log-probabilities under the policy that collected the samples.
    pub old_log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// How the policy term weighs each sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyObjective {
    /// `min(r A, clip(r, 1 - eps, 1 + eps) A)` with `r` the importance ratio.
    Clipped { clip: f64 },
    /// `A log pi(a|s)`, on-policy.
    Vanilla,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Scalar loss `policy + vf_coef * mse(V, R) - ent_coef * entropy` and its
/// gradient w.r.t. every parameter.
pub fn policy_loss(
    params: &PolicyParams,
    batch: &Batch,
    objective: PolicyObjective,
    vf_coef: f64,
    ent_coef: f64,
) -> Result<(LossStats, PolicyParams), OptimError> {
    let n = batch.len();
    if n == 0 {
        return Err(OptimError::EmptyBatch);
    }
    let cache = params.forward_batch(batch.obs.view())?;
    let inv_n = 1.0 / n as f64;
    let mut d_logits = Array2::<f64>::zeros((n, 4));
    let mut d_values = Array1::<f64>::zeros(n);
    let mut stats = LossStats::default();

    for i in 0..n {
        let logits = cache.logits.row(i);
        let lp = log_softmax(logits.as_slice().expect("row-major"));
        let probs: Vec<f64> = lp.iter().map(|l| l.exp()).collect();
        let a = batch.actions[i];
        let adv = batch.advantages[i];

        // d(policy term)/d(log pi(a|s))
        let d_logp = match objective {
            PolicyObjective::Clipped { clip } => {
                let log_ratio = lp[a] - batch.old_log_probs[i];
                let ratio = log_ratio.exp();
                let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
                let unclipped_obj = ratio * adv;
                let clipped_obj = clipped * adv;
                stats.policy_loss -= unclipped_obj.min(clipped_obj) * inv_n;
                stats.approx_kl += ((ratio - 1.0) - log_ratio) * inv_n;
                if (ratio - 1.0).abs() > clip {
                    stats.clip_fraction += inv_n;
                }
                if unclipped_obj <= clipped_obj {
                    -adv * ratio * inv_n
                } else {
                    0.0
                }
            }
            PolicyObjective::Vanilla => {
                stats.policy_loss -= adv * lp[a] * inv_n;
                -adv * inv_n
            }
        };

        let entropy: f64 = -probs.iter().zip(&lp).map(|(p, l)| p * l).sum::<f64>();
        stats.entropy += entropy * inv_n;
        for j in 0..4 {
            let onehot = if j == a { 1.0 } else { 0.0 };
            // d log pi(a)/d l_j = 1[j=a] - p_j ;  dH/d l_j = -p_j (log p_j + H)
            d_logits[[i, j]] = d_logp * (onehot - probs[j]) + ent_coef * inv_n * probs[j] * (lp[j] + entropy);
        }

        let err = cache.values[i] - batch.returns[i];
        stats.value_loss += err * err * inv_n;
        d_values[i] = 2.0 * vf_coef * err * inv_n;
    }

    stats.loss = stats.policy_loss + vf_coef * stats.value_loss - ent_coef * stats.entropy;
    if !stats.loss.is_finite() {
        return Err(OptimError::NonFinite("loss"));
    }
    let grads = params.backward(&cache, &d_logits, &d_values);
    if !grads.is_finite() {
        return Err(OptimError::NonFinite("gradient"));
    }
    Ok((stats, grads))
}

pub fn ppo_loss(
    params: &PolicyParams,
    batch: &Batch,
    clip: f64,
    vf_coef: f64,
    ent_coef: f64,
) -> Result<(LossStats, PolicyParams), OptimError> {
    policy_loss(params, batch, PolicyObjective::Clipped { clip }, vf_coef, ent_coef)
}

pub fn a2c_loss(
    params: &PolicyParams,
    batch: &Batch,
    vf_coef: f64,
    ent_coef: f64,
) -> Result<(LossStats, PolicyParams), OptimError> {
    policy_loss(params, batch, PolicyObjective::Vanilla, vf_coef, ent_coef)
}

/// Importance ratios `exp(log pi_new - log pi_old)` of a batch.
pub fn importance_ratios(params: &PolicyParams, batch: &Batch) -> Result<Vec<f64>, OptimError> {
    let cache = params.forward_batch(batch.obs.view())?;
    Ok((0..batch.len())
        .map(|i| {
            let lp = log_softmax(cache.logits.row(i).as_slice().expect("row-major"));
            (lp[batch.actions[i]] - batch.old_log_probs[i]).exp()
        })
        .collect())
}

/// In-place `(x - mean) / (std + 1e-8)` with the unbiased standard deviation.
pub fn normalize_advantages(adv: &mut [f64]) {
    let n = adv.len();
    if n < 2 {
        return;
    }
    let mean = adv.iter().sum::<f64>() / n as f64;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt() + 1e-8;
    adv.iter_mut().for_each(|a| *a = (*a - mean) / std);
}
