use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::Arc;

use super::eval::greedy_actions;
use super::HarnessError;
use crate::gridworld::{offset_pos, Action, EnvState, FeatureKind, Layout, Pos, MAX_EPISODE_STEPS};
use crate::observe::ObservationSpec;
use crate::optimize::PolicyParams;

/// Dominant (argmax) action of a policy on every cell the agent can stand on.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub layout: Arc<Layout>,
    /// Row-major; `None` on walls, holes and the goal.
    pub actions: Vec<Option<Action>>,
}

pub fn dominant_action_heatmap(
    params: &PolicyParams,
    spec: &ObservationSpec,
    layout: Arc<Layout>,
) -> Result<Heatmap, HarnessError> {
    let cells: Vec<Pos> = layout.standable_cells().collect();
    let states: Vec<EnvState> = cells
        .iter()
        .map(|&p| EnvState::with_agent_at(Arc::clone(&layout), p).expect("standable cell"))
        .collect();
    let greedy = greedy_actions(params, spec, &states)?;
    let mut actions = vec![None; layout.height() * layout.width()];
    for (p, a) in cells.into_iter().zip(greedy) {
        actions[p.0 * layout.width() + p.1] = Some(a);
    }
    Ok(Heatmap { layout, actions })
}

/// Outcome of following the heatmap greedily from one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyOutcome {
    Goal(usize),
    Hole(usize),
    Loop,
    TimeOut,
}

impl Heatmap {
    pub fn get(&self, pos: Pos) -> Option<Action> {
        self.actions[pos.0 * self.layout.width() + pos.1]
    }

    /// Follows the recorded actions from `start` (wall bumps stay in place).
    pub fn follow(&self, start: Pos) -> GreedyOutcome {
        let l = &self.layout;
        let mut pos = start;
        let mut seen = HashSet::new();
        for steps in 1..=MAX_EPISODE_STEPS {
            let Some(action) = self.get(pos) else {
                return GreedyOutcome::Loop;
            };
            if !seen.insert(pos) {
                return GreedyOutcome::Loop;
            }
            let next = offset_pos(pos, action.offset(), l.height(), l.width())
                .filter(|&p| l.get(p) != FeatureKind::Wall)
                .unwrap_or(pos);
            match l.get(next) {
                FeatureKind::Goal => return GreedyOutcome::Goal(steps),
                FeatureKind::Hole => return GreedyOutcome::Hole(steps),
                _ => pos = next,
            }
        }
        GreedyOutcome::TimeOut
    }

    /// Standable cells from which greedy following does not reach the goal.
    pub fn failing_cells(&self) -> Vec<Pos> {
        self.layout
            .standable_cells()
            .filter(|&p| !matches!(self.follow(p), GreedyOutcome::Goal(_)))
            .collect()
    }

    /// One CSV row per grid row; `U`/`R`/`D`/`L` on standable cells, empty elsewhere.
    pub fn to_csv(&self) -> String {
        let w = self.layout.width();
        let mut out = String::new();
        for row in self.actions.chunks(w) {
            let line: Vec<String> = row.iter().map(|a| a.map(|a| a.token().to_string()).unwrap_or_default()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Arrow rendering over the layout.
    pub fn to_svg(&self) -> String {
        const CELL: usize = 40;
        let (h, w) = (self.layout.height(), self.layout.width());
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            w * CELL,
            h * CELL,
            w * CELL,
            h * CELL
        );
        for r in 0..h {
            for c in 0..w {
                let fill = match self.layout.get((r, c)) {
                    FeatureKind::Wall => "#555555",
                    FeatureKind::Hole => "#d62728",
                    FeatureKind::Goal => "#2ca02c",
                    _ => "#f4f4f4",
                };
                let (x, y) = (c * CELL, r * CELL);
                let _ = writeln!(
                    svg,
                    r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#999999"/>"##
                );
                if let Some(a) = self.get((r, c)) {
                    let arrow = match a {
                        Action::Up => '↑',
                        Action::Right => '→',
                        Action::Down => '↓',
                        Action::Left => '←',
                    };
                    let _ = writeln!(
                        svg,
                        r#"<text x="{}" y="{}" font-size="24" text-anchor="middle" dominant-baseline="central">{arrow}</text>"#,
                        x + CELL / 2,
                        y + CELL / 2
                    );
                }
            }
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{shift_test, shift_train};
    use crate::observe::ObsMethod;

    /// Zero network except the policy bias, so every state prefers `action`.
    fn always(action: Action, input_dim: usize) -> PolicyParams {
        let mut p = PolicyParams::zeros(input_dim, &[4]);
        p.policy_head.bias[action.index()] = 5.0;
        p
    }

    #[test]
    fn forced_action_everywhere() {
        let spec = ObservationSpec::holey(ObsMethod::Radius);
        let hm = dominant_action_heatmap(&always(Action::Right, 125), &spec, shift_test()).unwrap();
        let layout = shift_test();
        for r in 0..layout.height() {
            for c in 0..layout.width() {
                match layout.get((r, c)) {
                    FeatureKind::Field => assert_eq!(hm.get((r, c)), Some(Action::Right)),
                    _ => assert_eq!(hm.get((r, c)), None),
                }
            }
        }
        let csv = hm.to_csv();
        assert_eq!(csv.lines().count(), 7);
        assert_eq!(csv.lines().next().unwrap(), ",,,,,,,,");
        assert_eq!(csv.lines().nth(1).unwrap(), ",R,R,R,R,R,R,R,");
    }

    #[test]
    fn follow_outcomes() {
        let spec = ObservationSpec::holey(ObsMethod::Fo);
        let hm = dominant_action_heatmap(&always(Action::Down, 315), &spec, shift_train()).unwrap();
        // column 5 leads straight down onto the goal
        assert_eq!(hm.follow((4, 5)), GreedyOutcome::Goal(1));
        assert_eq!(hm.follow((2, 4)), GreedyOutcome::Hole(1));
        // pushing into the bottom wall forever
        assert_eq!(hm.follow((5, 1)), GreedyOutcome::Loop);
        assert!(!hm.failing_cells().is_empty());
        assert!(hm.to_svg().starts_with("<svg"));
    }
}
