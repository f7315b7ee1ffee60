use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{path, FeatureKind, GridError, Layout};

pub const POOL_SIZE: usize = 100;
/// Shortest path of the deterministic 7x7 configuration (optimal return 42).
pub const MAZE7_SINGLE_PATH: usize = 8;
/// Shortest path of the deterministic 11x11 configuration (optimal return 30).
pub const MAZE11_SINGLE_PATH: usize = 20;

/// Perfect maze carved by a randomized depth-first search over the rooms at
/// odd coordinates. The start is the room at (1, 1); the goal is a uniformly
/// drawn other room.
pub fn generate_maze(height: usize, width: usize, seed: u64) -> Result<Layout, GridError> {
    if height < 5 || width < 5 || height.is_multiple_of(2) || width.is_multiple_of(2) {
        return Err(GridError::BadMazeSize(height, width));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (room_rows, room_cols) = ((height - 1) / 2, (width - 1) / 2);
    let mut cells = vec![FeatureKind::Wall; height * width];
    let mut visited = vec![false; room_rows * room_cols];
    let room_cell = |rr: usize, rc: usize| (2 * rr + 1) * width + 2 * rc + 1;

    visited[0] = true;
    cells[room_cell(0, 0)] = FeatureKind::Field;
    let mut stack = vec![(0usize, 0usize)];
    let mut options = Vec::with_capacity(4);
    while let Some(&(rr, rc)) = stack.last() {
        options.clear();
        if rr > 0 && !visited[(rr - 1) * room_cols + rc] {
            options.push((rr - 1, rc));
        }
        if rc + 1 < room_cols && !visited[rr * room_cols + rc + 1] {
            options.push((rr, rc + 1));
        }
        if rr + 1 < room_rows && !visited[(rr + 1) * room_cols + rc] {
            options.push((rr + 1, rc));
        }
        if rc > 0 && !visited[rr * room_cols + rc - 1] {
            options.push((rr, rc - 1));
        }
        if options.is_empty() {
            stack.pop();
            continue;
        }
        let (nr, nc) = options[rng.random_range(0..options.len())];
        visited[nr * room_cols + nc] = true;
        cells[room_cell(nr, nc)] = FeatureKind::Field;
        // passage cell halfway between the two rooms
        cells[(rr + nr + 1) * width + rc + nc + 1] = FeatureKind::Field;
        stack.push((nr, nc));
    }

    let goal_room = rng.random_range(1..room_rows * room_cols);
    cells[room_cell(goal_room / room_cols, goal_room % room_cols)] = FeatureKind::Goal;
    Layout::new(format!("maze{height}x{width}-{seed}"), height, width, cells, (1, 1))
}

/// First seed (scanning 0, 1, 2, ...) whose maze has the requested shortest path.
pub fn single_maze_seed(height: usize, width: usize, path_len: usize) -> Result<u64, GridError> {
    for seed in 0.. {
        let maze = generate_maze(height, width, seed)?;
        if path::shortest_path(&maze)? == path_len {
            return Ok(seed);
        }
    }
    unreachable!()
}

fn single(height: usize, width: usize, path_len: usize, name: &str) -> Arc<Layout> {
    let seed = single_maze_seed(height, width, path_len).expect("valid maze size");
    let maze = generate_maze(height, width, seed).expect("valid maze size");
    let renamed = Layout::new(
        name,
        maze.height(),
        maze.width(),
        maze.cells().to_vec(),
        maze.agent_start(),
    )
    .expect("generated maze is valid");
    Arc::new(renamed)
}

/// The deterministic 7x7 training/test configuration.
pub fn maze7_single() -> Arc<Layout> {
    single(7, 7, MAZE7_SINGLE_PATH, "maze7_single")
}

/// The deterministic 11x11 training/test configuration.
pub fn maze11_single() -> Arc<Layout> {
    single(11, 11, MAZE11_SINGLE_PATH, "maze11_single")
}

/// A fixed set of generated mazes that never contains the excluded layout.
#[derive(Debug, Clone)]
pub struct MazePool {
    pub seeds: Vec<u64>,
    pub layouts: Vec<Arc<Layout>>,
    pub excluded: Arc<Layout>,
    /// Seeds passed over because they reproduced the excluded layout or an
    /// earlier member.
    pub skipped: Vec<u64>,
}

impl MazePool {
    pub fn len(&self) -> usize {
        self.layouts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layouts.is_empty()
    }
}

/// Generates `count` distinct mazes from seeds `base_seed, base_seed + 1, ...`,
/// skipping any seed whose maze equals `excluded` or an existing member.
pub fn build_pool(
    height: usize,
    width: usize,
    count: usize,
    excluded: Arc<Layout>,
    base_seed: u64,
) -> Result<MazePool, GridError> {
    let mut pool = MazePool {
        seeds: Vec::with_capacity(count),
        layouts: Vec::with_capacity(count),
        excluded,
        skipped: Vec::new(),
    };
    let mut seed = base_seed;
    while pool.layouts.len() < count {
        let maze = generate_maze(height, width, seed)?;
        let collides = maze.same_structure(&pool.excluded)
            || pool.layouts.iter().any(|l| l.same_structure(&maze));
        if collides {
            pool.skipped.push(seed);
        } else {
            pool.seeds.push(seed);
            pool.layouts.push(Arc::new(maze));
        }
        seed += 1;
    }
    Ok(pool)
}
