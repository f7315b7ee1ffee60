//! Observation processing: full observations, the Radius / Action / Object
//! crops, random augmentation, and the flat network encoding.

mod crop;
mod encode;
mod rad;

pub use crop::{crop_action, crop_object, crop_radius, scan_nearest, sentinel_offset};
pub use encode::{one_hot, scaled_offsets, SENTINEL_VALUE};
pub use rad::{rad_crop, rad_cutout, rad_translate};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridworld::{full_observation, Action, EnvState, FeatureGrid, FeatureKind, Offset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObserveError {
    #[error("invalid observation spec: {0}")]
    InvalidSpec(String),
    #[error("{op}: grid {grid:?} incompatible with {target:?}")]
    Dimensions {
        op: &'static str,
        grid: (usize, usize),
        target: (usize, usize),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObsMethod {
    Fo,
    Radius,
    Action,
    Object,
    Rad,
}

impl ObsMethod {
    pub const ALL: [ObsMethod; 5] = [
        ObsMethod::Fo,
        ObsMethod::Radius,
        ObsMethod::Action,
        ObsMethod::Object,
        ObsMethod::Rad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObsMethod::Fo => "fo",
            ObsMethod::Radius => "radius",
            ObsMethod::Action => "action",
            ObsMethod::Object => "object",
            ObsMethod::Rad => "rad",
        }
    }
}

impl fmt::Display for ObsMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObsMethod {
    type Err = ObserveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ObsMethod::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| ObserveError::InvalidSpec(format!("unknown observation method {s:?}")))
    }
}

/// Augmentation parameters: crop window, translate canvas, inclusive cutout side range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadConfig {
    pub crop: (usize, usize),
    pub translate: (usize, usize),
    pub cutout: (usize, usize),
}

impl RadConfig {
    /// Ratios for the two maze sizes; `None` for other sizes.
    pub fn for_maze(size: usize) -> Option<Self> {
        match size {
            7 => Some(RadConfig {
                crop: (6, 6),
                translate: (7, 7),
                cutout: (0, 2),
            }),
            11 => Some(RadConfig {
                crop: (9, 9),
                translate: (11, 11),
                cutout: (0, 3),
            }),
            _ => None,
        }
    }
}

/// Grid with an extra pad token (`None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenGrid {
    pub height: usize,
    pub width: usize,
    pub cells: Vec<Option<FeatureKind>>,
}

impl From<&FeatureGrid> for TokenGrid {
    fn from(g: &FeatureGrid) -> Self {
        TokenGrid {
            height: g.height,
            width: g.width,
            cells: g.cells.iter().copied().map(Some).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSpec {
    pub method: ObsMethod,
    pub radius: (usize, usize),
    pub action_offsets: Vec<Offset>,
    pub objects: Vec<FeatureKind>,
    pub nearest: usize,
    pub rad: Option<RadConfig>,
}

impl ObservationSpec {
    /// Parameters for the holey shift worlds.
    pub fn holey(method: ObsMethod) -> Self {
        ObservationSpec {
            method,
            radius: (2, 2),
            action_offsets: Action::OFFSETS.to_vec(),
            objects: vec![FeatureKind::Wall, FeatureKind::Field, FeatureKind::Hole, FeatureKind::Goal],
            nearest: 1,
            rad: None,
        }
    }

    /// Parameters for square mazes of side `size`.
    pub fn maze(method: ObsMethod, size: usize) -> Self {
        ObservationSpec {
            method,
            radius: (2, 2),
            action_offsets: Action::OFFSETS.to_vec(),
            objects: vec![FeatureKind::Wall, FeatureKind::Field, FeatureKind::Goal],
            nearest: 2,
            rad: RadConfig::for_maze(size),
        }
    }

    pub fn validate(&self) -> Result<(), ObserveError> {
        let bad = |m: &str| Err(ObserveError::InvalidSpec(m.to_string()));
        if self.radius.0 < 1 || self.radius.1 < 1 {
            return bad("radius must be at least 1 in both dimensions");
        }
        if self.nearest < 1 {
            return bad("nearest count must be at least 1");
        }
        if self.objects.is_empty() || self.objects.contains(&FeatureKind::Agent) {
            return bad("object set must be non-empty and exclude the agent");
        }
        if self.action_offsets.len() != Action::COUNT {
            return bad("one action offset per action is required");
        }
        if self.method == ObsMethod::Rad && self.rad.is_none() {
            return bad("augmentation needs a maze-sized rad config");
        }
        Ok(())
    }

    /// Shape of the reshaped observation before encoding.
    pub fn observation_shape(&self, height: usize, width: usize) -> Vec<usize> {
        match self.method {
            ObsMethod::Fo | ObsMethod::Rad => vec![height, width],
            ObsMethod::Radius => vec![2 * self.radius.0 + 1, 2 * self.radius.1 + 1],
            ObsMethod::Action => vec![self.action_offsets.len()],
            ObsMethod::Object => vec![self.objects.len() * self.nearest, 2],
        }
    }

    /// Shape of the encoded vector (one-hot axis last for grid methods).
    pub fn encoded_shape(&self, height: usize, width: usize) -> Vec<usize> {
        let mut shape = self.observation_shape(height, width);
        if self.method != ObsMethod::Object {
            shape.push(FeatureKind::COUNT);
        }
        shape
    }

    pub fn encoded_len(&self, height: usize, width: usize) -> usize {
        self.encoded_shape(height, width).iter().product()
    }

    /// Appends the encoded observation of `state` to `out`. `augment` supplies
    /// the randomness for augmentation during rollouts; without it the
    /// augmentation method reduces to the full observation.
    pub fn encode_into<R: Rng + ?Sized>(
        &self,
        state: &EnvState,
        augment: Option<&mut R>,
        out: &mut Vec<f64>,
    ) -> Result<(), ObserveError> {
        let full = full_observation(state);
        let pos = state.agent_pos();
        match self.method {
            ObsMethod::Fo => one_hot(full.cells.iter().copied().map(Some), out),
            ObsMethod::Radius => {
                let win = crop_radius(&full, pos, self.radius);
                one_hot(win.cells.into_iter().map(Some), out);
            }
            ObsMethod::Action => {
                one_hot(crop_action(&full, pos, &self.action_offsets).into_iter().map(Some), out)
            }
            ObsMethod::Object => {
                let offsets = crop_object(&full, pos, &self.objects, self.nearest);
                scaled_offsets(&offsets, full.height, full.width, out);
            }
            ObsMethod::Rad => {
                let cfg = self
                    .rad
                    .ok_or_else(|| ObserveError::InvalidSpec("missing rad config".into()))?;
                if (full.height, full.width) != cfg.translate {
                    return Err(ObserveError::Dimensions {
                        op: "augment",
                        grid: (full.height, full.width),
                        target: cfg.translate,
                    });
                }
                match augment {
                    Some(rng) => {
                        let grid = TokenGrid::from(&full);
                        let grid = rad_crop(&grid, cfg.crop, rng)?;
                        let grid = rad_translate(&grid, cfg.translate, rng)?;
                        let grid = rad_cutout(&grid, cfg.cutout, rng)?;
                        one_hot(grid.cells, out);
                    }
                    None => one_hot(full.cells.iter().copied().map(Some), out),
                }
            }
        }
        Ok(())
    }

    /// Observation of `state` under this spec.
    pub fn apply<R: Rng + ?Sized>(&self, state: &EnvState, augment: Option<&mut R>) -> Result<Observation, ObserveError> {
        let layout = state.layout();
        let mut values = Vec::with_capacity(self.encoded_len(layout.height(), layout.width()));
        self.encode_into(state, augment, &mut values)?;
        Ok(Observation {
            values,
            shape: self.encoded_shape(layout.height(), layout.width()),
        })
    }

    /// Deterministic (evaluation-time) observation.
    pub fn observe(&self, state: &EnvState) -> Result<Observation, ObserveError> {
        self.apply::<rand::rngs::ThreadRng>(state, None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub values: Vec<f64>,
    pub shape: Vec<usize>,
}
