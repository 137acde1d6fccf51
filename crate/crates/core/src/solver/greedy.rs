use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{Route, RoutingGraph, Solution, SolverError, SolverParams};
use crate::visibility::{required_count, CoverageBits};

/// Coverage-per-length greedy. The agent with the shortest walk so far moves next, along
/// its incident edge with the best ratio of newly seen patches to length (lower
/// neighbour id on ties). An agent with no such edge heads for the nearest node that
/// has one.
pub fn greedy_baseline(graph: &RoutingGraph, params: &SolverParams) -> Result<Solution, SolverError> {
    graph.check_solvable(params)?;
    let required = required_count(graph.patch_count(), params.delta_d);
    let mut routes = vec![Route::at(params.depot); params.agents];
    let mut coverage = CoverageBits::zeros(graph.patch_count());
    let mut covered = 0;
    while covered < required {
        let agent = (0..routes.len())
            .min_by(|&a, &b| routes[a].length.total_cmp(&routes[b].length).then(a.cmp(&b)))
            .unwrap();
        let at = routes[agent].current();
        let edge = match best_local_edge(graph, at, &coverage) {
            Some(e) => e,
            None => first_step_towards_gain(graph, at, &coverage)
                .expect("reachable coverage remains while below the ceiling"),
        };
        routes[agent].push(graph, edge, None);
        covered += coverage.or_assign_count(&graph.edge(edge).coverage);
    }
    Ok(Solution::from_routes(graph, routes, params))
}

fn best_local_edge(graph: &RoutingGraph, v: usize, coverage: &CoverageBits) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &(_, e) in graph.neighbors(v) {
        let gain = coverage.count_new(&graph.edge(e).coverage);
        if gain == 0 {
            continue;
        }
        let len = graph.edge(e).length;
        let ratio = if len > 0.0 { gain as f64 / len } else { f64::INFINITY };
        if best.map_or(true, |(r, _)| ratio > r) {
            best = Some((ratio, e));
        }
    }
    best.map(|(_, e)| e)
}

/// First edge of a shortest path to the closest node (lowest id on ties) that has an
/// incident edge adding coverage.
fn first_step_towards_gain(graph: &RoutingGraph, from: usize, coverage: &CoverageBits) -> Option<usize> {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut first = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[from] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Key(0.0), from)));
    while let Some(Reverse((Key(d), v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        if v != from && best_local_edge(graph, v, coverage).is_some() {
            return Some(first[v]);
        }
        for &(u, e) in graph.neighbors(v) {
            let nd = d + graph.edge(e).length;
            if nd < dist[u] {
                dist[u] = nd;
                first[u] = if v == from { e } else { first[v] };
                heap.push(Reverse((Key(nd), u)));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
