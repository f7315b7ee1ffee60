//! The rollout / reshape / sample / step / store / update loop with periodic
//! validation and evaluation.

use std::fs;
use std::sync::Arc;
use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{EnvSuite, EvalSet, RunConfig};
use super::eval::evaluate;
use super::metrics::{write_metrics, MetricRecord};
use super::seeds::SeedStreams;
use super::HarnessError;
use crate::gridworld::{EnvState, Layout};
use crate::optimize::{a2c_update, ppo_update, ActionDistribution, Adam, Algorithm, Checkpoint, PolicyParams, RolloutBuffer};

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub seed: u64,
    pub records: Vec<MetricRecord>,
    pub params: PolicyParams,
    /// Environment transitions summed over the parallel environments.
    pub steps: u64,
    pub updates: usize,
    pub stopped_early: bool,
    /// Episode resets per training layout.
    pub layout_resets: Vec<u64>,
}

impl TrainOutcome {
    pub fn checkpoint(&self, config: &RunConfig) -> Checkpoint<RunConfig> {
        Checkpoint {
            config: config.clone(),
            seed: self.seed,
            step: self.steps,
            params: self.params.clone(),
        }
    }

    pub fn last_record(&self) -> Option<&MetricRecord> {
        self.records.last()
    }
}

/// Uniform draw of a training layout index.
pub fn sample_layout_index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    if n == 1 {
        0
    } else {
        rng.random_range(0..n)
    }
}

fn measure(params: &PolicyParams, config: &RunConfig, set: &EvalSet, seed: u64) -> Result<f64, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    evaluate(params, &config.obs, &set.layouts, set.episodes, set.deterministic, &mut rng)
}

/// Validation and evaluation returns of `params` under the run's suite.
pub fn validate_and_evaluate(
    params: &PolicyParams,
    config: &RunConfig,
    suite: &EnvSuite,
    seed: u64,
    round: u64,
) -> Result<(f64, f64), HarnessError> {
    let streams = SeedStreams::new(seed);
    let v = measure(params, config, &suite.validation, streams.eval_round(2 * round))?;
    let e = measure(params, config, &suite.evaluation, streams.eval_round(2 * round + 1))?;
    Ok((v, e))
}

pub fn train(config: &RunConfig, seed: u64) -> Result<TrainOutcome, HarnessError> {
    config.validate()?;
    let suite = EnvSuite::build(config.env, config.mode, config.eval_episodes)?;
    train_on(config, &suite, seed)
}

/// Trains one seed against a prebuilt suite.
pub fn train_on(config: &RunConfig, suite: &EnvSuite, seed: u64) -> Result<TrainOutcome, HarnessError> {
    let clock = Instant::now();
    let opt = &config.optim;
    let streams = SeedStreams::new(seed);
    let first = &suite.train[0];
    let obs_dim = config.obs.encoded_len(first.height(), first.width());
    let n_envs = opt.n_envs;

    let mut params = PolicyParams::init(
        obs_dim,
        &opt.hidden,
        opt.separate_value_trunk,
        &mut ChaCha8Rng::seed_from_u64(streams.init),
    );
    let mut adam = Adam::new(params.num_params());
    let mut update_rng = ChaCha8Rng::seed_from_u64(streams.update);
    let mut env_rngs: Vec<ChaCha8Rng> = (0..n_envs).map(|e| ChaCha8Rng::seed_from_u64(streams.env(e))).collect();
    let mut layout_resets = vec![0u64; suite.train.len()];

    let reset = |rng: &mut ChaCha8Rng, counts: &mut [u64]| -> EnvState {
        let i = sample_layout_index(rng, suite.train.len());
        counts[i] += 1;
        EnvState::reset(Arc::clone(&suite.train[i]) as Arc<Layout>)
    };
    let mut states: Vec<EnvState> = env_rngs.iter_mut().map(|rng| reset(rng, &mut layout_resets)).collect();
    let mut current = Array2::<f64>::zeros((n_envs, obs_dim));
    let mut scratch = Vec::with_capacity(obs_dim);
    for e in 0..n_envs {
        scratch.clear();
        config.obs.encode_into(&states[e], Some(&mut env_rngs[e]), &mut scratch)?;
        current.row_mut(e).assign(&ndarray::ArrayView1::from(&scratch));
    }

    let mut buffer = RolloutBuffer::new(n_envs, opt.n_steps, obs_dim);
    let mut records = Vec::new();
    let mut global_step = 0u64;
    let mut next_eval = config.eval_interval;
    let mut round = 0u64;
    let mut updates = 0usize;
    let mut stopped_early = false;

    'outer: while global_step < config.total_steps {
        buffer.clear();
        for _ in 0..opt.n_steps {
            let cache = params.forward_batch(current.view())?;
            for e in 0..n_envs {
                let l = cache.logits.row(e);
                let (action, log_prob) = ActionDistribution::new([l[0], l[1], l[2], l[3]]).sample(&mut env_rngs[e]);
                let out = states[e].step(action)?;
                let done = out.done();
                buffer.push(
                    e,
                    current.row(e).as_slice().expect("row-major"),
                    action.index(),
                    out.reward,
                    cache.values[e],
                    log_prob,
                    done,
                );
                states[e] = if done {
                    reset(&mut env_rngs[e], &mut layout_resets)
                } else {
                    out.next_state
                };
                scratch.clear();
                config.obs.encode_into(&states[e], Some(&mut env_rngs[e]), &mut scratch)?;
                current.row_mut(e).assign(&ndarray::ArrayView1::from(&scratch));
            }
            global_step += n_envs as u64;

            while global_step >= next_eval {
                let (v, ev) = validate_and_evaluate(&params, config, suite, seed, round)?;
                round += 1;
                records.push(MetricRecord {
                    step: next_eval,
                    seed,
                    validation_return: v,
                    evaluation_return: ev,
                    wall_s: if config.record_wall_clock {
                        clock.elapsed().as_secs_f64()
                    } else {
                        0.0
                    },
                });
                next_eval += config.eval_interval;
                if config.threshold.is_some_and(|t| v >= t) {
                    stopped_early = true;
                    break 'outer;
                }
            }
            if global_step >= config.total_steps {
                break 'outer;
            }
        }

        let last_values = params.forward_batch(current.view())?.values;
        buffer.finish(last_values.as_slice().expect("contiguous"), opt.gamma, opt.gae_lambda);
        match config.algorithm {
            Algorithm::Ppo => ppo_update(&mut params, &mut adam, &buffer, opt, &mut update_rng)?,
            Algorithm::A2c => a2c_update(&mut params, &mut adam, &buffer, opt)?,
        };
        updates += 1;
    }

    Ok(TrainOutcome {
        seed,
        records,
        params,
        steps: global_step,
        updates,
        stopped_early,
        layout_resets,
    })
}

/// Trains every configured seed and writes `config.json`,
/// `metrics_seed<S>.csv` and `checkpoint_seed<S>.json` into the output directory.
pub fn run_experiment(config: &RunConfig) -> Result<Vec<TrainOutcome>, HarnessError> {
    config.validate()?;
    let suite = EnvSuite::build(config.env, config.mode, config.eval_episodes)?;
    fs::create_dir_all(&config.out_dir)?;
    fs::write(config.out_dir.join("config.json"), serde_json::to_string_pretty(config)?)?;
    let mut outcomes = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let outcome = train_on(config, &suite, seed)?;
        write_metrics(&outcome.records, &config.out_dir.join(format!("metrics_seed{seed}.csv")))?;
        outcome
            .checkpoint(config)
            .save(&config.out_dir.join(format!("checkpoint_seed{seed}.json")))?;
        outcomes.push(outcome);
    }
    Ok(outcomes)
}
