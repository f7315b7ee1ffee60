use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;

use super::HarnessError;
use crate::gridworld::{EnvState, Layout};
use crate::observe::ObservationSpec;
use crate::optimize::{ActionDistribution, PolicyParams};

/// Mean undiscounted return over `episodes` episodes. Each episode runs on a
/// layout drawn uniformly from `layouts` (or the only one). Deterministic
/// evaluation takes argmax actions; otherwise actions are sampled from `rng`.
/// Observations are never augmented. Episodes advance in lockstep so the
/// network sees one batch per step.
pub fn evaluate<R: Rng + ?Sized>(
    params: &PolicyParams,
    spec: &ObservationSpec,
    layouts: &[Arc<Layout>],
    episodes: usize,
    deterministic: bool,
    rng: &mut R,
) -> Result<f64, HarnessError> {
    if layouts.is_empty() || episodes == 0 {
        return Err(HarnessError::Config("evaluation needs layouts and episodes".into()));
    }
    let mut states: Vec<EnvState> = (0..episodes)
        .map(|_| {
            let i = if layouts.len() == 1 { 0 } else { rng.random_range(0..layouts.len()) };
            EnvState::reset(Arc::clone(&layouts[i]))
        })
        .collect();
    let mut returns = vec![0.0; episodes];
    let mut active: Vec<usize> = (0..episodes).collect();
    let dim = params.input_dim();
    let mut flat = Vec::with_capacity(episodes * dim);
    while !active.is_empty() {
        flat.clear();
        for &i in &active {
            spec.encode_into::<R>(&states[i], None, &mut flat)?;
        }
        let obs = Array2::from_shape_vec((active.len(), dim), std::mem::take(&mut flat))
            .map_err(|_| HarnessError::Config("observation width mismatch".into()))?;
        let cache = params.forward_batch(obs.view())?;
        flat = obs.into_raw_vec_and_offset().0;
        for (row, &i) in active.iter().enumerate() {
            let l = cache.logits.row(row);
            let dist = ActionDistribution::new([l[0], l[1], l[2], l[3]]);
            let action = if deterministic { dist.argmax() } else { dist.sample(rng).0 };
            let out = states[i].step(action)?;
            returns[i] += out.reward;
            states[i] = out.next_state;
        }
        active.retain(|&i| !states[i].is_done());
    }
    Ok(returns.iter().sum::<f64>() / episodes as f64)
}

/// Greedy action of `params` for every state in `states`.
pub fn greedy_actions(
    params: &PolicyParams,
    spec: &ObservationSpec,
    states: &[EnvState],
) -> Result<Vec<crate::gridworld::Action>, HarnessError> {
    let dim = params.input_dim();
    let mut flat = Vec::with_capacity(states.len() * dim);
    for s in states {
        spec.encode_into::<rand::rngs::ThreadRng>(s, None, &mut flat)?;
    }
    let obs = Array2::from_shape_vec((states.len(), dim), flat)
        .map_err(|_| HarnessError::Config("observation width mismatch".into()))?;
    let cache = params.forward_batch(obs.view())?;
    Ok((0..states.len())
        .map(|i| {
            let l = cache.logits.row(i);
            ActionDistribution::new([l[0], l[1], l[2], l[3]]).argmax()
        })
        .collect())
}
