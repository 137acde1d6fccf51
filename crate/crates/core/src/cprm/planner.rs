use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::geometry::{segment_collision_free, Vec3, VoxelGrid};
use crate::visibility::polyline_length;

/// A collision-free connection between two via-points.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPath {
    pub polyline: Vec<Vec3>,
    pub length: f64,
}

fn free(grid: &VoxelGrid, a: &Vec3, b: &Vec3) -> bool {
    segment_collision_free(grid, a, b).unwrap_or(false)
}

/// Joins `a` and `b` through the free cells of `safe` (an obstacle grid already dilated
/// by the safety distance). Tries the straight segment first, then a 26-connected grid
/// search whose result is shortcut-smoothed. `None` when no path of length at most
/// `d_max` is found.
pub fn local_plan(a: &Vec3, b: &Vec3, safe: &VoxelGrid, d_max: f64) -> Option<LocalPath> {
    let direct = (b - a).norm();
    if direct > d_max {
        return None;
    }
    if free(safe, a, b) {
        return Some(LocalPath {
            polyline: vec![*a, *b],
            length: direct,
        });
    }
    let start = safe.world_to_cell(a)?;
    let goal = safe.world_to_cell(b)?;
    if safe.get(start) || safe.get(goal) {
        return None;
    }
    // grid paths overestimate the smoothed length, so allow some slack in the search
    let budget = 1.25 * d_max + safe.resolution();
    let cells = grid_search(safe, start, goal, a, b, budget)?;
    let mut points = Vec::with_capacity(cells.len() + 2);
    points.push(*a);
    points.extend(cells.iter().map(|&c| safe.cell_center(c)));
    points.push(*b);
    let points = smooth(safe, points);
    if !points.windows(2).all(|w| free(safe, &w[0], &w[1])) {
        return None;
    }
    let length = polyline_length(&points);
    (length <= d_max).then_some(LocalPath {
        polyline: points,
        length,
    })
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    g: f64,
    cell: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A* over cell centers, pruning nodes whose optimistic total exceeds `budget`.
fn grid_search(
    grid: &VoxelGrid,
    start: [usize; 3],
    goal: [usize; 3],
    a: &Vec3,
    b: &Vec3,
    budget: f64,
) -> Option<Vec<[usize; 3]>> {
    let goal_center = grid.cell_center(goal);
    let lead_in = (grid.cell_center(start) - a).norm();
    let lead_out = (goal_center - b).norm();
    let dims = grid.dims();
    let start_idx = grid.index(start);
    let goal_idx = grid.index(goal);
    let mut best: HashMap<usize, f64> = HashMap::new();
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut open = BinaryHeap::new();
    best.insert(start_idx, 0.0);
    let h0 = (grid.cell_center(start) - goal_center).norm();
    open.push(Open {
        f: h0,
        g: 0.0,
        cell: start_idx,
    });
    while let Some(Open { g, cell, .. }) = open.pop() {
        if g > best[&cell] {
            continue;
        }
        if cell == goal_idx {
            let mut path = vec![grid.coords(cell)];
            let mut cur = cell;
            while let Some(&p) = parent.get(&cur) {
                path.push(grid.coords(p));
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        let c = grid.coords(cell);
        let center = grid.cell_center(c);
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 && dz == 0 {
                        continue;
                    }
                    let n = [c[0] as i64 + dx, c[1] as i64 + dy, c[2] as i64 + dz];
                    if (0..3).any(|k| n[k] < 0 || n[k] >= dims[k] as i64) {
                        continue;
                    }
                    let nc = [n[0] as usize, n[1] as usize, n[2] as usize];
                    if grid.get(nc) {
                        continue;
                    }
                    let ncenter = grid.cell_center(nc);
                    let diagonal = (dx != 0) as u8 + (dy != 0) as u8 + (dz != 0) as u8 > 1;
                    if diagonal && !free(grid, &center, &ncenter) {
                        continue;
                    }
                    let ng = g + (ncenter - center).norm();
                    let h = (ncenter - goal_center).norm();
                    if lead_in + ng + h + lead_out > budget {
                        continue;
                    }
                    let nidx = grid.index(nc);
                    if best.get(&nidx).is_none_or(|&old| ng < old) {
                        best.insert(nidx, ng);
                        parent.insert(nidx, cell);
                        open.push(Open {
                            f: ng + h,
                            g: ng,
                            cell: nidx,
                        });
                    }
                }
            }
        }
    }
    None
}

/// Greedy shortcutting: from each kept point jump to the farthest later point reachable
/// by a free chord; repeated until nothing changes.
fn smooth(grid: &VoxelGrid, mut points: Vec<Vec3>) -> Vec<Vec3> {
    loop {
        let mut out = vec![points[0]];
        let mut i = 0;
        while i + 1 < points.len() {
            let mut j = points.len() - 1;
            while j > i + 1 && !free(grid, &points[i], &points[j]) {
                j -= 1;
            }
            out.push(points[j]);
            i = j;
        }
        if out.len() == points.len() {
            return out;
        }
        points = out;
    }
}
