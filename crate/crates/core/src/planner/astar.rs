use crate::geometry::Vec3;
use crate::mapping::OccupancyGrid;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("start position is inside an obstacle's inflation")]
    StartOccupied,
    #[error("goal position is inside an obstacle's inflation")]
    GoalOccupied,
}

/// 26-connected neighborhood with Euclidean step costs.
fn neighbor_offsets(resolution: f64) -> Vec<([i32; 3], f64)> {
    let mut out = Vec::with_capacity(26);
    for dz in -1..=1i32 {
        for dy in -1..=1i32 {
            for dx in -1..=1i32 {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                let cost = ((dx * dx + dy * dy + dz * dz) as f64).sqrt() * resolution;
                out.push(([dx, dy, dz], cost));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Node {
    f: f64,
    idx: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Min-by-f with index tie-break keeps expansion order deterministic.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Shortest collision-free voxel path over Free and Unknown space with the
/// grid's inflation applied, shortcut-smoothed into sparse waypoints.
/// `Ok(None)` means no path exists.
pub fn plan_path(
    grid: &OccupancyGrid,
    start: &Vec3,
    goal: &Vec3,
) -> Result<Option<Vec<Vec3>>, PlanError> {
    let start_vox = grid.voxel_of(start).ok_or(PlanError::StartOccupied)?;
    let goal_vox = grid.voxel_of(goal).ok_or(PlanError::GoalOccupied)?;
    if grid.is_blocked(&start_vox) {
        return Err(PlanError::StartOccupied);
    }
    if grid.is_blocked(&goal_vox) {
        return Err(PlanError::GoalOccupied);
    }

    let dims = grid.dims();
    let n = dims[0] * dims[1] * dims[2];
    let start_idx = grid.index(&start_vox);
    let goal_idx = grid.index(&goal_vox);
    let goal_center = grid.voxel_center(&goal_vox);

    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let offsets = neighbor_offsets(grid.resolution());

    let unindex = |idx: usize| -> [i32; 3] {
        let x = idx % dims[0];
        let y = (idx / dims[0]) % dims[1];
        let z = idx / (dims[0] * dims[1]);
        [x as i32, y as i32, z as i32]
    };

    let mut open = BinaryHeap::new();
    g[start_idx] = 0.0;
    open.push(Node {
        f: (grid.voxel_center(&start_vox) - goal_center).norm(),
        idx: start_idx,
    });

    let mut found = false;
    while let Some(Node { idx, .. }) = open.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        if idx == goal_idx {
            found = true;
            break;
        }
        let v = unindex(idx);
        let base = g[idx];
        for (off, cost) in &offsets {
            let w = [v[0] + off[0], v[1] + off[1], v[2] + off[2]];
            if !grid.in_bounds(&w) || grid.is_blocked(&w) {
                continue;
            }
            let widx = grid.index(&w);
            if closed[widx] {
                continue;
            }
            let cand = base + cost;
            if cand < g[widx] {
                g[widx] = cand;
                parent[widx] = idx;
                open.push(Node {
                    f: cand + (grid.voxel_center(&w) - goal_center).norm(),
                    idx: widx,
                });
            }
        }
    }
    if !found {
        return Ok(None);
    }

    let mut chain = vec![goal_idx];
    while *chain.last().unwrap() != start_idx {
        chain.push(parent[*chain.last().unwrap()]);
    }
    chain.reverse();

    let mut waypoints: Vec<Vec3> = Vec::with_capacity(chain.len() + 2);
    waypoints.push(*start);
    for &idx in chain.iter().skip(1).take(chain.len().saturating_sub(2)) {
        waypoints.push(grid.voxel_center(&unindex(idx)));
    }
    waypoints.push(*goal);
    Ok(Some(shortcut(grid, &waypoints)))
}

/// Greedy line-of-sight shortcutting over the waypoint chain.
fn shortcut(grid: &OccupancyGrid, waypoints: &[Vec3]) -> Vec<Vec3> {
    let mut out = vec![waypoints[0]];
    let mut i = 0;
    while i + 1 < waypoints.len() {
        let mut best = i + 1;
        for j in (i + 1..waypoints.len()).rev() {
            if line_of_sight(grid, &waypoints[i], &waypoints[j]) {
                best = j;
                break;
            }
        }
        out.push(waypoints[best]);
        i = best;
    }
    out
}

/// True when the straight segment stays out of the inflated obstacle set.
pub fn line_of_sight(grid: &OccupancyGrid, a: &Vec3, b: &Vec3) -> bool {
    let d = b - a;
    let len = d.norm();
    let steps = (len / (grid.resolution() / 3.0)).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let p = a + d * (k as f64 / steps as f64);
        if grid.is_blocked_point(&p) {
            return false;
        }
    }
    true
}
