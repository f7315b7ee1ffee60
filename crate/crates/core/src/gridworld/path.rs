use std::collections::VecDeque;

use super::{offset_pos, Action, FeatureKind, GridError, Layout, Pos, GOAL_REWARD};

/// BFS distances to the goal from every cell, walking through fields only.
/// `None` marks walls, holes and disconnected cells.
fn distances_to_goal(layout: &Layout) -> Vec<Option<usize>> {
    let (h, w) = (layout.height(), layout.width());
    let mut dist = vec![None; h * w];
    let goal = layout.goal();
    dist[goal.0 * w + goal.1] = Some(0);
    let mut queue = VecDeque::from([goal]);
    while let Some(pos) = queue.pop_front() {
        let d = dist[pos.0 * w + pos.1].unwrap();
        for action in Action::ALL {
            let Some(next) = offset_pos(pos, action.offset(), h, w) else {
                continue;
            };
            let i = next.0 * w + next.1;
            if dist[i].is_none() && layout.get(next) == FeatureKind::Field {
                dist[i] = Some(d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

/// Minimal number of actions from `from` to the goal avoiding walls and holes.
pub fn shortest_path_from(layout: &Layout, from: Pos) -> Option<usize> {
    distances_to_goal(layout)[from.0 * layout.width() + from.1]
}

/// Minimal number of actions from the agent start to the goal.
pub fn shortest_path(layout: &Layout) -> Result<usize, GridError> {
    shortest_path_from(layout, layout.agent_start()).ok_or(GridError::Unreachable)
}

/// One BFS-optimal action sequence from the agent start (first optimal action
/// in `Action::ALL` order at every cell).
pub fn shortest_path_actions(layout: &Layout) -> Result<Vec<Action>, GridError> {
    let dist = distances_to_goal(layout);
    let (h, w) = (layout.height(), layout.width());
    let mut pos = layout.agent_start();
    let mut remaining = dist[pos.0 * w + pos.1].ok_or(GridError::Unreachable)?;
    let mut actions = Vec::with_capacity(remaining);
    while remaining > 0 {
        let (action, next) = Action::ALL
            .iter()
            .filter_map(|&a| offset_pos(pos, a.offset(), h, w).map(|n| (a, n)))
            .find(|(_, n)| dist[n.0 * w + n.1] == Some(remaining - 1))
            .expect("BFS layer has a predecessor");
        actions.push(action);
        pos = next;
        remaining -= 1;
    }
    Ok(actions)
}

/// Return of an optimal episode: the goal bonus minus one per step.
pub fn optimal_return(layout: &Layout) -> Result<f64, GridError> {
    Ok(GOAL_REWARD - shortest_path(layout)? as f64)
}
