//! Agent-centric observation processing for discrete gridworlds.
//!
//! The crate bundles four layers:
//!
//! - [`gridworld`]: layouts, episode dynamics, maze generation and a BFS oracle.
//! - [`observe`]: full observations, the Radius/Action/Object crops and a
//!   random-augmentation baseline, plus the network input encoding.
//! - [`optimize`]: a small dense actor-critic network with hand-written
//!   backpropagation, GAE, PPO and A2C losses and an Adam step.
//! - [`harness`]: the training loop, evaluation, heatmaps, metric files and plots.

pub mod gridworld;
pub mod harness;
pub mod observe;
pub mod optimize;

pub use gridworld::{Action, EnvState, FeatureKind, GridError, Layout, MazePool, StepOutcome};


