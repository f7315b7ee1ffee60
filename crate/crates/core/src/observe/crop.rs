//! The three agent-centric reshaping transforms.

use crate::gridworld::{offset_pos, FeatureGrid, FeatureKind, Offset, Pos};

/// Window of side `2 * rho + 1` centred on the agent. Cells outside the grid
/// read as walls.
pub fn crop_radius(full: &FeatureGrid, agent_pos: Pos, rho: (usize, usize)) -> FeatureGrid {
    let (h, w) = (2 * rho.0 + 1, 2 * rho.1 + 1);
    let mut cells = Vec::with_capacity(h * w);
    for dr in -(rho.0 as isize)..=rho.0 as isize {
        for dc in -(rho.1 as isize)..=rho.1 as isize {
            cells.push(
                offset_pos(agent_pos, (dr, dc), full.height, full.width)
                    .map_or(FeatureKind::Wall, |p| full.get(p)),
            );
        }
    }
    FeatureGrid {
        height: h,
        width: w,
        cells,
    }
}

/// The cells reachable by one action each, in offset order.
pub fn crop_action(full: &FeatureGrid, agent_pos: Pos, offsets: &[Offset]) -> Vec<FeatureKind> {
    offsets
        .iter()
        .map(|&o| {
            offset_pos(agent_pos, o, full.height, full.width).map_or(FeatureKind::Wall, |p| full.get(p))
        })
        .collect()
}

/// Up to `eta` positions holding `kind`, nearest first by Manhattan distance
/// with row-major tie-breaking. Missing entries are `None`.
pub fn scan_nearest(full: &FeatureGrid, agent_pos: Pos, kind: FeatureKind, eta: usize) -> Vec<Option<Pos>> {
    let mut hits: Vec<(usize, Pos)> = full
        .cells
        .iter()
        .enumerate()
        .filter(|(_, &k)| k == kind)
        .map(|(i, _)| {
            let p = (i / full.width, i % full.width);
            (p.0.abs_diff(agent_pos.0) + p.1.abs_diff(agent_pos.1), p)
        })
        .collect();
    // cells are enumerated row-major, so a stable sort keeps that order on ties
    hits.sort_by_key(|&(d, _)| d);
    let mut out: Vec<Option<Pos>> = hits.into_iter().take(eta).map(|(_, p)| Some(p)).collect();
    out.resize(eta, None);
    out
}

/// Offset assigned to missing objects; lies outside every real offset.
pub fn sentinel_offset(full: &FeatureGrid) -> Offset {
    (full.height as isize, full.width as isize)
}

/// Offsets from the agent to the `eta` nearest cells of each object type,
/// object-major in the order of `objects`. Shape `(objects.len() * eta, 2)`.
pub fn crop_object(full: &FeatureGrid, agent_pos: Pos, objects: &[FeatureKind], eta: usize) -> Vec<Offset> {
    let sentinel = sentinel_offset(full);
    objects
        .iter()
        .flat_map(|&kind| scan_nearest(full, agent_pos, kind, eta))
        .map(|hit| match hit {
            Some(p) => (
                p.0 as isize - agent_pos.0 as isize,
                p.1 as isize - agent_pos.1 as isize,
            ),
            None => sentinel,
        })
        .collect()
}
