use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::gridworld::{build_pool, maze11_single, maze7_single, shift_test, shift_train, Layout, POOL_SIZE};
use crate::observe::{ObsMethod, ObservationSpec};
use crate::optimize::{Algorithm, OptimConfig};

pub const DEFAULT_EVAL_INTERVAL: u64 = 1 << 13;
pub const DEFAULT_EVAL_EPISODES: usize = 100;
/// Early-stop return for the shift world (threshold line of the training curves).
pub const SHIFT_THRESHOLD: f64 = 40.0;
/// First generator seed of the maze pools.
pub const POOL_BASE_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvFamily {
    Shift,
    Maze7,
    Maze11,
}

impl EnvFamily {
    pub fn name(self) -> &'static str {
        match self {
            EnvFamily::Shift => "shift",
            EnvFamily::Maze7 => "maze7",
            EnvFamily::Maze11 => "maze11",
        }
    }

    pub fn maze_size(self) -> Option<usize> {
        match self {
            EnvFamily::Shift => None,
            EnvFamily::Maze7 => Some(7),
            EnvFamily::Maze11 => Some(11),
        }
    }
}

impl fmt::Display for EnvFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvFamily {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "shift" => Ok(EnvFamily::Shift),
            "maze7" => Ok(EnvFamily::Maze7),
            "maze11" => Ok(EnvFamily::Maze11),
            _ => Err(HarnessError::Config(format!("unknown environment {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    Single,
    Pool,
}

impl TrainingMode {
    pub fn name(self) -> &'static str {
        match self {
            TrainingMode::Single => "single",
            TrainingMode::Pool => "pool",
        }
    }
}

impl fmt::Display for TrainingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrainingMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(TrainingMode::Single),
            "pool" => Ok(TrainingMode::Pool),
            _ => Err(HarnessError::Config(format!("unknown training mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub obs: ObservationSpec,
    pub env: EnvFamily,
    pub mode: TrainingMode,
    pub total_steps: u64,
    pub eval_interval: u64,
    pub eval_episodes: usize,
    pub seeds: Vec<u64>,
    /// Absolute validation return that ends training early.
    pub threshold: Option<f64>,
    pub out_dir: PathBuf,
    /// When false the `wall_s` metric column is written as 0.
    pub record_wall_clock: bool,
    pub optim: OptimConfig,
}

impl RunConfig {
    /// Defaults for an algorithm / observation / environment combination.
    pub fn new(algorithm: Algorithm, method: ObsMethod, env: EnvFamily, mode: TrainingMode) -> Self {
        let obs = match env.maze_size() {
            Some(size) => ObservationSpec::maze(method, size),
            None => ObservationSpec::holey(method),
        };
        RunConfig {
            algorithm,
            obs,
            env,
            mode,
            total_steps: default_budget(env, mode),
            eval_interval: DEFAULT_EVAL_INTERVAL,
            eval_episodes: DEFAULT_EVAL_EPISODES,
            seeds: vec![0],
            threshold: (env == EnvFamily::Shift).then_some(SHIFT_THRESHOLD),
            out_dir: PathBuf::from("runs"),
            record_wall_clock: true,
            optim: OptimConfig::for_algorithm(algorithm),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.env == EnvFamily::Shift && self.obs.method == ObsMethod::Rad {
            return bad("augmentation (--obs rad) is only defined for maze environments".into());
        }
        if self.env == EnvFamily::Shift && self.mode == TrainingMode::Pool {
            return bad("the shift world has no pool mode".into());
        }
        if self.optim.algorithm != self.algorithm {
            return bad("optimizer settings belong to a different algorithm".into());
        }
        if self.eval_interval == 0 || self.total_steps == 0 || self.eval_episodes == 0 {
            return bad("step budget, eval interval and eval episodes must be positive".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        self.obs.validate()?;
        self.optim.validate()?;
        Ok(())
    }

    /// Short identifier such as `ppo_radius_shift_single`.
    pub fn label(&self) -> String {
        format!("{}_{}_{}_{}", self.algorithm, self.obs.method, self.env, self.mode)
    }
}

pub fn default_budget(env: EnvFamily, mode: TrainingMode) -> u64 {
    match (env, mode) {
        (EnvFamily::Shift, _) => 1_000_000,
        (EnvFamily::Maze7, _) => 200_000,
        (EnvFamily::Maze11, TrainingMode::Single) => 150_000,
        (EnvFamily::Maze11, TrainingMode::Pool) => 300_000,
    }
}

/// Layout set measured by one metric.
#[derive(Debug, Clone)]
pub struct EvalSet {
    pub layouts: Vec<Arc<Layout>>,
    pub episodes: usize,
    pub deterministic: bool,
}

/// Training layouts plus the validation (seen) and evaluation (unseen) sets.
#[derive(Debug, Clone)]
pub struct EnvSuite {
    pub train: Vec<Arc<Layout>>,
    pub validation: EvalSet,
    pub evaluation: EvalSet,
}

impl EnvSuite {
    pub fn build(env: EnvFamily, mode: TrainingMode, maze_episodes: usize) -> Result<Self, HarnessError> {
        let (single, size) = match env {
            EnvFamily::Shift => {
                let train = shift_train();
                return Ok(EnvSuite {
                    train: vec![Arc::clone(&train)],
                    validation: EvalSet {
                        layouts: vec![train],
                        episodes: 1,
                        deterministic: true,
                    },
                    evaluation: EvalSet {
                        layouts: vec![shift_test()],
                        episodes: 1,
                        deterministic: true,
                    },
                });
            }
            EnvFamily::Maze7 => (maze7_single(), 7),
            EnvFamily::Maze11 => (maze11_single(), 11),
        };
        let pool = build_pool(size, size, POOL_SIZE, Arc::clone(&single), POOL_BASE_SEED)?;
        let single_set = EvalSet {
            layouts: vec![single],
            episodes: maze_episodes,
            deterministic: false,
        };
        let pool_set = EvalSet {
            layouts: pool.layouts,
            episodes: maze_episodes,
            deterministic: false,
        };
        Ok(match mode {
            TrainingMode::Single => EnvSuite {
                train: single_set.layouts.clone(),
                validation: single_set,
                evaluation: pool_set,
            },
            TrainingMode::Pool => EnvSuite {
                train: pool_set.layouts.clone(),
                validation: pool_set,
                evaluation: single_set,
            },
        })
    }
}
