use std::sync::Arc;

use super::{
    offset_pos, Action, FeatureKind, GridError, Layout, Pos, GOAL_REWARD, HOLE_REWARD,
    MAX_EPISODE_STEPS, STEP_REWARD,
};

/// One episode's state over a shared layout.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    layout: Arc<Layout>,
    agent_pos: Pos,
    steps_taken: usize,
    terminated: bool,
    truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub next_state: EnvState,
    pub terminated: bool,
    pub truncated: bool,
}

impl StepOutcome {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

impl EnvState {
    pub fn reset(layout: Arc<Layout>) -> Self {
        let agent_pos = layout.agent_start();
        EnvState {
            layout,
            agent_pos,
            steps_taken: 0,
            terminated: false,
            truncated: false,
        }
    }

    /// A fresh state with the agent placed on an arbitrary field cell.
    pub fn with_agent_at(layout: Arc<Layout>, agent_pos: Pos) -> Option<Self> {
        if agent_pos.0 >= layout.height()
            || agent_pos.1 >= layout.width()
            || layout.get(agent_pos) != FeatureKind::Field
        {
            return None;
        }
        Some(EnvState {
            layout,
            agent_pos,
            steps_taken: 0,
            terminated: false,
            truncated: false,
        })
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn agent_pos(&self) -> Pos {
        self.agent_pos
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn is_done(&self) -> bool {
        self.terminated || self.truncated
    }

    /// Pure transition. Walls block movement but the step is still paid.
    pub fn step(&self, action: Action) -> Result<StepOutcome, GridError> {
        if self.is_done() {
            return Err(GridError::EpisodeFinished);
        }
        let layout = &self.layout;
        let target = offset_pos(self.agent_pos, action.offset(), layout.height(), layout.width())
            .filter(|&p| layout.get(p) != FeatureKind::Wall)
            .unwrap_or(self.agent_pos);
        let mut reward = STEP_REWARD;
        let mut terminated = false;
        match layout.get(target) {
            FeatureKind::Goal => {
                reward += GOAL_REWARD;
                terminated = true;
            }
            FeatureKind::Hole => {
                reward += HOLE_REWARD;
                terminated = true;
            }
            _ => {}
        }
        let steps_taken = self.steps_taken + 1;
        let truncated = !terminated && steps_taken >= MAX_EPISODE_STEPS;
        let next_state = EnvState {
            layout: Arc::clone(layout),
            agent_pos: target,
            steps_taken,
            terminated,
            truncated,
        };
        Ok(StepOutcome {
            reward,
            next_state,
            terminated,
            truncated,
        })
    }
}

/// Row-major grid of features with the agent overlaid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureGrid {
    pub height: usize,
    pub width: usize,
    pub cells: Vec<FeatureKind>,
}

impl FeatureGrid {
    pub fn get(&self, pos: Pos) -> FeatureKind {
        self.cells[pos.0 * self.width + pos.1]
    }
}

/// Layout cells with `Agent` written over the agent position.
pub fn full_observation(state: &EnvState) -> FeatureGrid {
    let layout = state.layout();
    let mut cells = layout.cells().to_vec();
    let (r, c) = state.agent_pos();
    cells[r * layout.width() + c] = FeatureKind::Agent;
    FeatureGrid {
        height: layout.height(),
        width: layout.width(),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{shift_test, shift_train, shortest_path_actions};

    #[test]
    fn reset_places_agent() {
        let s = EnvState::reset(shift_train());
        assert_eq!(s.agent_pos(), (1, 1));
        assert_eq!(s.steps_taken(), 0);
        assert!(!s.terminated() && !s.truncated());
    }

    #[test]
    fn reset_after_terminal_is_fresh() {
        let layout = shift_train();
        let mut s = EnvState::reset(Arc::clone(&layout));
        for a in shortest_path_actions(&layout).unwrap() {
            s = s.step(a).unwrap().next_state;
        }
        assert!(s.terminated());
        let fresh = EnvState::reset(Arc::clone(s.layout()));
        assert_eq!(fresh, EnvState::reset(layout));
    }

    #[test]
    fn field_wall_hole_rewards() {
        let s = EnvState::reset(shift_train());
        let out = s.step(Action::Right).unwrap();
        assert_eq!(out.reward, -1.0);
        assert!(!out.terminated);
        assert_eq!(out.next_state.agent_pos(), (1, 2));

        let out = s.step(Action::Up).unwrap();
        assert_eq!(out.reward, -1.0);
        assert_eq!(out.next_state.agent_pos(), (1, 1));
        assert_eq!(out.next_state.steps_taken(), 1);

        let s = EnvState::reset(shift_test());
        let s = s.step(Action::Down).unwrap().next_state;
        let out = s.step(Action::Down).unwrap();
        assert_eq!(out.reward, -51.0);
        assert!(out.terminated && !out.truncated);
        assert!(matches!(out.next_state.step(Action::Up), Err(GridError::EpisodeFinished)));
    }

    #[test]
    fn goal_step_and_optimal_return() {
        let layout = shift_train();
        let mut s = EnvState::reset(Arc::clone(&layout));
        let mut total = 0.0;
        let mut last = 0.0;
        for a in shortest_path_actions(&layout).unwrap() {
            let out = s.step(a).unwrap();
            total += out.reward;
            last = out.reward;
            s = out.next_state;
        }
        assert_eq!(last, 49.0);
        assert_eq!(total, 42.0);
        let grid = full_observation(&s);
        assert_eq!(grid.get((5, 5)), FeatureKind::Agent);
    }

    #[test]
    fn truncation_at_step_limit() {
        let mut s = EnvState::reset(shift_train());
        let mut total = 0.0;
        for i in 0..MAX_EPISODE_STEPS {
            let out = s.step(Action::Up).unwrap();
            total += out.reward;
            assert_eq!(out.truncated, i + 1 == MAX_EPISODE_STEPS);
            s = out.next_state;
        }
        assert_eq!(total, -100.0);
        assert!(s.truncated() && !s.terminated());
    }

    #[test]
    fn full_observation_overlay() {
        let grid = full_observation(&EnvState::reset(shift_train()));
        assert_eq!((grid.height, grid.width), (7, 9));
        assert_eq!(grid.get((1, 1)), FeatureKind::Agent);
        assert_eq!(grid.cells.iter().filter(|&&k| k == FeatureKind::Agent).count(), 1);

        let open = Layout::parse("open", "#####\n#A__#\n#___#\n#__G#\n#####\n").unwrap();
        let grid = full_observation(&EnvState::reset(Arc::new(open)));
        let count = |k| grid.cells.iter().filter(|&&c| c == k).count();
        assert_eq!(count(FeatureKind::Agent), 1);
        assert_eq!(count(FeatureKind::Wall), 16);
        assert_eq!(count(FeatureKind::Field), 7);
    }
}
