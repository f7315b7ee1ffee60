//! Grid environment engine.
//!
//! A [`Layout`] is the immutable environment definition; an [`EnvState`] is one
//! episode's mutable state. Rewards: every step costs 1, entering the goal pays
//! +50 and entering a hole costs 50, both on top of the step cost. Episodes end
//! on goal or hole and are truncated after [`MAX_EPISODE_STEPS`] steps.

mod env;
mod layout;
mod maze;
mod path;

pub use env::{full_observation, EnvState, FeatureGrid, StepOutcome};
pub use layout::{shift_test, shift_train, Layout, SHIFT_TEST_MAP, SHIFT_TRAIN_MAP};
pub use maze::{
    build_pool, generate_maze, maze11_single, maze7_single, single_maze_seed, MazePool,
    MAZE11_SINGLE_PATH, MAZE7_SINGLE_PATH, POOL_SIZE,
};
pub use path::{optimal_return, shortest_path, shortest_path_actions, shortest_path_from};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// (row, col) with row 0 at the top.
pub type Pos = (usize, usize);
/// Signed (row, col) displacement.
pub type Offset = (isize, isize);

pub const STEP_REWARD: f64 = -1.0;
pub const GOAL_REWARD: f64 = 50.0;
pub const HOLE_REWARD: f64 = -50.0;
pub const MAX_EPISODE_STEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("layout is not rectangular: row {row} has width {found}, expected {expected}")]
    NotRectangular {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("layout is empty")]
    Empty,
    #[error("unknown layout character {0:?}")]
    UnknownChar(char),
    #[error("layout has no agent start 'A'")]
    MissingAgent,
    #[error("layout has more than one agent start 'A'")]
    DuplicateAgent,
    #[error("layout has no goal 'G'")]
    MissingGoal,
    #[error("layout has more than one goal 'G'")]
    DuplicateGoal,
    #[error("border cell {0:?} is not a wall")]
    OpenBorder(Pos),
    #[error("agent start {0:?} is not a field cell")]
    BadStart(Pos),
    #[error("layout cells must not contain the agent feature")]
    AgentInCells,
    #[error("goal is unreachable from the agent start")]
    Unreachable,
    #[error("maze dimensions must be odd and at least 5, got {0}x{1}")]
    BadMazeSize(usize, usize),
    #[error("episode already finished")]
    EpisodeFinished,
}

/// The five cell features. `Agent` only ever appears in observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureKind {
    Wall,
    Field,
    Hole,
    Goal,
    Agent,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [
        FeatureKind::Wall,
        FeatureKind::Field,
        FeatureKind::Hole,
        FeatureKind::Goal,
        FeatureKind::Agent,
    ];
    pub const COUNT: usize = 5;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn to_char(self) -> char {
        match self {
            FeatureKind::Wall => '#',
            FeatureKind::Field => '_',
            FeatureKind::Hole => 'H',
            FeatureKind::Goal => 'G',
            FeatureKind::Agent => 'A',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '#' => Some(FeatureKind::Wall),
            '_' | ' ' => Some(FeatureKind::Field),
            'H' => Some(FeatureKind::Hole),
            'G' => Some(FeatureKind::Goal),
            'A' => Some(FeatureKind::Agent),
            _ => None,
        }
    }

    pub fn parse_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wall" => Some(FeatureKind::Wall),
            "field" => Some(FeatureKind::Field),
            "hole" => Some(FeatureKind::Hole),
            "goal" => Some(FeatureKind::Goal),
            "agent" => Some(FeatureKind::Agent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Up,
    Right,
    Down,
    Left,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Right, Action::Down, Action::Left];
    pub const COUNT: usize = 4;

    /// Offsets in action order; also the default Action-crop parameterization.
    pub const OFFSETS: [Offset; 4] = [(-1, 0), (0, 1), (1, 0), (0, -1)];

    pub fn offset(self) -> Offset {
        Self::OFFSETS[self.index()]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn token(self) -> char {
        match self {
            Action::Up => 'U',
            Action::Right => 'R',
            Action::Down => 'D',
            Action::Left => 'L',
        }
    }

    pub fn from_token(c: char) -> Option<Self> {
        match c {
            'U' => Some(Action::Up),
            'R' => Some(Action::Right),
            'D' => Some(Action::Down),
            'L' => Some(Action::Left),
            _ => None,
        }
    }
}

/// `pos + offset` if it stays inside a `height x width` grid.
pub fn offset_pos(pos: Pos, offset: Offset, height: usize, width: usize) -> Option<Pos> {
    let r = pos.0 as isize + offset.0;
    let c = pos.1 as isize + offset.1;
    (r >= 0 && c >= 0 && (r as usize) < height && (c as usize) < width).then_some((r as usize, c as usize))
}
