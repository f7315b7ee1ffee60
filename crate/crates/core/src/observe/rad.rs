//! Random crop / translate / cutout augmentation on discrete grids.
//!
//! Pad cells are `None` and encode to an all-zero one-hot.

use rand::Rng;

use super::{ObserveError, TokenGrid};

/// Uniformly placed contiguous `target` window of `grid`.
pub fn rad_crop<R: Rng + ?Sized>(grid: &TokenGrid, target: (usize, usize), rng: &mut R) -> Result<TokenGrid, ObserveError> {
    if target.0 == 0 || target.1 == 0 || target.0 > grid.height || target.1 > grid.width {
        return Err(ObserveError::Dimensions {
            op: "crop",
            grid: (grid.height, grid.width),
            target,
        });
    }
    let r0 = rng.random_range(0..=grid.height - target.0);
    let c0 = rng.random_range(0..=grid.width - target.1);
    let mut cells = Vec::with_capacity(target.0 * target.1);
    for r in r0..r0 + target.0 {
        cells.extend_from_slice(&grid.cells[r * grid.width + c0..r * grid.width + c0 + target.1]);
    }
    Ok(TokenGrid {
        height: target.0,
        width: target.1,
        cells,
    })
}

/// Places `grid` at a uniform offset inside a pad-filled `target` canvas.
pub fn rad_translate<R: Rng + ?Sized>(
    grid: &TokenGrid,
    target: (usize, usize),
    rng: &mut R,
) -> Result<TokenGrid, ObserveError> {
    if target.0 < grid.height || target.1 < grid.width {
        return Err(ObserveError::Dimensions {
            op: "translate",
            grid: (grid.height, grid.width),
            target,
        });
    }
    let r0 = rng.random_range(0..=target.0 - grid.height);
    let c0 = rng.random_range(0..=target.1 - grid.width);
    let mut cells = vec![None; target.0 * target.1];
    for r in 0..grid.height {
        let dst = (r0 + r) * target.1 + c0;
        cells[dst..dst + grid.width].copy_from_slice(&grid.cells[r * grid.width..(r + 1) * grid.width]);
    }
    Ok(TokenGrid {
        height: target.0,
        width: target.1,
        cells,
    })
}

/// Blanks one patch whose side lengths are drawn uniformly from the inclusive
/// range `sides` per dimension, at a uniform position.
pub fn rad_cutout<R: Rng + ?Sized>(
    grid: &TokenGrid,
    sides: (usize, usize),
    rng: &mut R,
) -> Result<TokenGrid, ObserveError> {
    if sides.0 > sides.1 || sides.1 > grid.height.min(grid.width) {
        return Err(ObserveError::Dimensions {
            op: "cutout",
            grid: (grid.height, grid.width),
            target: sides,
        });
    }
    let ph = rng.random_range(sides.0..=sides.1);
    let pw = rng.random_range(sides.0..=sides.1);
    let r0 = rng.random_range(0..=grid.height - ph);
    let c0 = rng.random_range(0..=grid.width - pw);
    let mut out = grid.clone();
    for r in r0..r0 + ph {
        for c in c0..c0 + pw {
            out.cells[r * grid.width + c] = None;
        }
    }
    Ok(out)
}
