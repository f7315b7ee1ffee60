//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::sync::Arc;

use crop_core::gridworld::{generate_maze, shift_test, shift_train, EnvState, FeatureKind, Layout, Pos};
use crop_core::optimize::PolicyParams;

/// Feature at `(r, c)` with the agent overlaid, or `Wall` outside the grid.
fn cell(layout: &Layout, agent: Pos, r: i64, c: i64) -> FeatureKind {
    if r < 0 || c < 0 || r >= layout.height() as i64 || c >= layout.width() as i64 {
        return FeatureKind::Wall;
    }
    let p = (r as usize, c as usize);
    if p == agent {
        FeatureKind::Agent
    } else {
        layout.get(p)
    }
}

/// Naive double-loop slicer with wall padding.
pub fn naive_radius(layout: &Layout, agent: Pos, rho: (usize, usize)) -> Vec<FeatureKind> {
    let (rr, rc) = (rho.0 as i64, rho.1 as i64);
    let mut out = Vec::new();
    let mut r = agent.0 as i64 - rr;
    while r <= agent.0 as i64 + rr {
        let mut c = agent.1 as i64 - rc;
        while c <= agent.1 as i64 + rc {
            out.push(cell(layout, agent, r, c));
            c += 1;
        }
        r += 1;
    }
    out
}

/// Up, right, down, left neighbours.
pub fn naive_action(layout: &Layout, agent: Pos) -> Vec<FeatureKind> {
    let (r, c) = (agent.0 as i64, agent.1 as i64);
    vec![
        cell(layout, agent, r - 1, c),
        cell(layout, agent, r, c + 1),
        cell(layout, agent, r + 1, c),
        cell(layout, agent, r, c - 1),
    ]
}

/// Exhaustive scan: every matching cell keyed by (distance, row, col).
pub fn naive_nearest(layout: &Layout, agent: Pos, kind: FeatureKind, eta: usize) -> Vec<Option<Pos>> {
    let mut found = Vec::new();
    for r in 0..layout.height() {
        for c in 0..layout.width() {
            if cell(layout, agent, r as i64, c as i64) == kind {
                let d = (r as i64 - agent.0 as i64).abs() + (c as i64 - agent.1 as i64).abs();
                found.push((d, r, c));
            }
        }
    }
    found.sort();
    (0..eta).map(|i| found.get(i).map(|&(_, r, c)| (r, c))).collect()
}

pub fn naive_object(layout: &Layout, agent: Pos, objects: &[FeatureKind], eta: usize) -> Vec<(isize, isize)> {
    let mut out = Vec::new();
    for &kind in objects {
        for hit in naive_nearest(layout, agent, kind, eta) {
            out.push(match hit {
                Some((r, c)) => (r as isize - agent.0 as isize, c as isize - agent.1 as isize),
                None => (layout.height() as isize, layout.width() as isize),
            });
        }
    }
    out
}

/// Shift layouts plus `n` generated mazes alternating 7x7 and 11x11.
pub fn oracle_layouts(n: usize) -> Vec<Arc<Layout>> {
    let mut layouts = vec![shift_train(), shift_test()];
    for i in 0..n {
        let size = if i % 2 == 0 { 7 } else { 11 };
        layouts.push(Arc::new(generate_maze(size, size, 1000 + i as u64).unwrap()));
    }
    layouts
}

pub fn standable_states(layout: &Arc<Layout>) -> Vec<EnvState> {
    layout
        .standable_cells()
        .map(|p| EnvState::with_agent_at(Arc::clone(layout), p).unwrap())
        .collect()
}

/// Largest relative error between an analytic gradient and central
/// differences of `loss` with step `h`. Relative errors use
/// `max(|analytic|, |numeric|, floor)` as denominator.
pub fn max_fd_error(params: &PolicyParams, grads: &PolicyParams, h: f64, floor: f64, loss: impl Fn(&PolicyParams) -> f64) -> f64 {
    let flat = params.to_flat();
    let analytic = grads.to_flat();
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let mut x = flat.clone();
        x[i] = flat[i] + h;
        probe.set_flat(&x);
        let up = loss(&probe);
        x[i] = flat[i] - h;
        probe.set_flat(&x);
        let down = loss(&probe);
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(floor);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}

/// A small random network (weights ~ N(0, 0.5)) with a random batch whose
/// old log-probabilities are perturbed away from the current policy.
pub fn random_case(seed: u64, separate: bool) -> (PolicyParams, crop_core::optimize::Batch) {
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.5).unwrap();
    let input = rng.random_range(3..8);
    let hidden = [rng.random_range(2..6), rng.random_range(2..6)];
    let mut params = PolicyParams::zeros_with(input, &hidden, separate);
    let flat: Vec<f64> = (0..params.num_params()).map(|_| normal.sample(&mut rng)).collect();
    params.set_flat(&flat);

    let n = rng.random_range(4..12);
    let obs = Array2::from_shape_fn((n, input), |_| normal.sample(&mut rng) * 2.0);
    let cache = params.forward_batch(obs.view()).unwrap();
    let mut actions = Vec::with_capacity(n);
    let mut old_log_probs = Vec::with_capacity(n);
    for i in 0..n {
        let a = rng.random_range(0..4);
        let lp = crop_core::optimize::log_softmax(cache.logits.row(i).as_slice().unwrap());
        actions.push(a);
        old_log_probs.push(lp[a] + rng.random_range(-0.4..0.4));
    }
    let advantages = (0..n).map(|_| normal.sample(&mut rng) * 2.0).collect();
    let returns = (0..n).map(|_| normal.sample(&mut rng) * 2.0).collect();
    (
        params,
        crop_core::optimize::Batch {
            obs,
            actions,
            old_log_probs,
            advantages,
            returns,
        },
    )
}
