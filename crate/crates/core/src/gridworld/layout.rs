use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{path, FeatureKind, GridError, Pos};

/// Training configuration of the holey shift world: the hole barrier is open
/// on the left, so the shortest path runs down column 1.
pub const SHIFT_TRAIN_MAP: &str = "\
#########
#A______#
#_______#
#__HHHHH#
#_______#
#____G__#
#########
";

/// Shifted test configuration: the barrier is open on the right and blocks
/// the training-optimal path.
pub const SHIFT_TEST_MAP: &str = "\
#########
#A______#
#_______#
#HHHHH__#
#_______#
#____G__#
#########
";

/// Immutable environment definition. The agent is not part of `cells`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    name: String,
    height: usize,
    width: usize,
    cells: Vec<FeatureKind>,
    agent_start: Pos,
    goal: Pos,
}

impl Layout {
    /// Validates every layout invariant, including goal reachability.
    pub fn new(
        name: impl Into<String>,
        height: usize,
        width: usize,
        cells: Vec<FeatureKind>,
        agent_start: Pos,
    ) -> Result<Self, GridError> {
        if height == 0 || width == 0 || cells.len() != height * width {
            return Err(GridError::Empty);
        }
        if cells.contains(&FeatureKind::Agent) {
            return Err(GridError::AgentInCells);
        }
        let mut goal = None;
        for (i, &cell) in cells.iter().enumerate() {
            if cell == FeatureKind::Goal {
                if goal.is_some() {
                    return Err(GridError::DuplicateGoal);
                }
                goal = Some((i / width, i % width));
            }
        }
        let goal = goal.ok_or(GridError::MissingGoal)?;
        for r in 0..height {
            for c in 0..width {
                let border = r == 0 || c == 0 || r + 1 == height || c + 1 == width;
                if border && cells[r * width + c] != FeatureKind::Wall {
                    return Err(GridError::OpenBorder((r, c)));
                }
            }
        }
        if agent_start.0 >= height
            || agent_start.1 >= width
            || cells[agent_start.0 * width + agent_start.1] != FeatureKind::Field
        {
            return Err(GridError::BadStart(agent_start));
        }
        let layout = Layout {
            name: name.into(),
            height,
            width,
            cells,
            agent_start,
            goal,
        };
        path::shortest_path(&layout)?;
        Ok(layout)
    }

    /// Parses the ASCII map format: `#` wall, `_` or space field, `H` hole,
    /// `G` goal, `A` agent start. Empty lines are ignored.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, GridError> {
        let rows: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(GridError::Empty);
        }
        let width = rows[0].chars().count();
        let mut cells = Vec::with_capacity(rows.len() * width);
        let mut start = None;
        for (r, row) in rows.iter().enumerate() {
            let found = row.chars().count();
            if found != width {
                return Err(GridError::NotRectangular {
                    row: r,
                    found,
                    expected: width,
                });
            }
            for (c, ch) in row.chars().enumerate() {
                match FeatureKind::from_char(ch) {
                    Some(FeatureKind::Agent) => {
                        if start.replace((r, c)).is_some() {
                            return Err(GridError::DuplicateAgent);
                        }
                        cells.push(FeatureKind::Field);
                    }
                    Some(kind) => cells.push(kind),
                    None => return Err(GridError::UnknownChar(ch)),
                }
            }
        }
        let start = start.ok_or(GridError::MissingAgent)?;
        Layout::new(name, rows.len(), width, cells, start)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cells(&self) -> &[FeatureKind] {
        &self.cells
    }

    pub fn agent_start(&self) -> Pos {
        self.agent_start
    }

    pub fn goal(&self) -> Pos {
        self.goal
    }

    pub fn get(&self, pos: Pos) -> FeatureKind {
        self.cells[pos.0 * self.width + pos.1]
    }

    /// Cells the agent can occupy at a decision point (fields only).
    pub fn standable_cells(&self) -> impl Iterator<Item = Pos> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &k)| k == FeatureKind::Field)
            .map(move |(i, _)| (i / self.width, i % self.width))
    }

    /// Equality of everything except the name.
    pub fn same_structure(&self, other: &Layout) -> bool {
        self.height == other.height
            && self.width == other.width
            && self.agent_start == other.agent_start
            && self.cells == other.cells
    }

    pub fn contains(&self, kind: FeatureKind) -> bool {
        self.cells.contains(&kind)
    }

    /// Renders back into the ASCII map format.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity(self.height * (self.width + 1));
        for r in 0..self.height {
            for c in 0..self.width {
                if (r, c) == self.agent_start {
                    out.push('A');
                } else {
                    out.push(self.get((r, c)).to_char());
                }
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ascii())
    }
}

pub fn shift_train() -> Arc<Layout> {
    Arc::new(Layout::parse("shift_train", SHIFT_TRAIN_MAP).expect("built-in layout"))
}

pub fn shift_test() -> Arc<Layout> {
    Arc::new(Layout::parse("shift_test", SHIFT_TEST_MAP).expect("built-in layout"))
}
