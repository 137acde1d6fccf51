#![allow(dead_code)]

use std::path::PathBuf;

use coverage_planner::app::RunConfig;
use coverage_planner::solver::{GraphEdge, RoutingGraph};
use coverage_planner::visibility::CoverageBits;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

pub fn load_config(name: &str) -> RunConfig {
    RunConfig::load(config_path(name)).expect("bundled config loads")
}

fn graph(n: usize, m: usize, spec: &[(usize, usize, f64, &[usize])]) -> RoutingGraph {
    let edges = spec
        .iter()
        .map(|&(a, b, length, bits)| GraphEdge {
            a,
            b,
            length,
            coverage: CoverageBits::from_indices(m, bits.iter().copied()),
        })
        .collect();
    RoutingGraph::new(n, m, edges).unwrap()
}

/// Six nodes, eight edges, six patches, each patch seen from exactly one edge.
pub fn six_node() -> RoutingGraph {
    graph(
        6,
        6,
        &[
            (0, 1, 2.0, &[0]),
            (0, 2, 3.0, &[1]),
            (1, 2, 2.0, &[]),
            (1, 3, 4.0, &[2]),
            (2, 4, 2.0, &[3]),
            (3, 4, 3.0, &[]),
            (3, 5, 2.0, &[4]),
            (4, 5, 5.0, &[5]),
        ],
    )
}

/// Hand-traced chromosome for [`six_node`] with K = 2: agent 0 walks 0-1-3-5 (length 8),
/// agent 1 walks 0-2-4-5 (length 10); full coverage after the sixth key.
pub const SIX_NODE_KEYS: [f64; 8] = [0.2, 1.7, 0.9, 1.95, 0.8, 1.7, 0.3, 1.3];

/// Triangle 0-1-2 with lengths 3, 4, 5, each edge seeing its own patch.
pub fn triangle() -> RoutingGraph {
    graph(3, 3, &[(0, 1, 3.0, &[0]), (1, 2, 4.0, &[1]), (0, 2, 5.0, &[2])])
}

/// Random connected graph: a random spanning tree plus extra edges, lengths in
/// [1, 10] on a 0.1 grid, every patch seen from one or two edges.
pub fn random_graph<R: Rng>(rng: &mut R, nodes: usize, patches: usize, extra: usize) -> RoutingGraph {
    let mut order: Vec<usize> = (1..nodes).collect();
    order.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut placed = vec![0usize];
    for v in order {
        let u = *placed.choose(rng).unwrap();
        pairs.push((u.min(v), u.max(v)));
        placed.push(v);
    }
    let mut tries = 0;
    while pairs.len() < nodes - 1 + extra && tries < 1000 {
        tries += 1;
        let (a, b) = (rng.gen_range(0..nodes), rng.gen_range(0..nodes));
        let p = (a.min(b), a.max(b));
        if a != b && !pairs.contains(&p) {
            pairs.push(p);
        }
    }
    let mut bits: Vec<Vec<usize>> = vec![Vec::new(); pairs.len()];
    for k in 0..patches {
        let copies = rng.gen_range(1..=2);
        for _ in 0..copies {
            bits[rng.gen_range(0..pairs.len())].push(k);
        }
    }
    let edges = pairs
        .iter()
        .zip(bits)
        .map(|(&(a, b), bits)| GraphEdge {
            a,
            b,
            length: (rng.gen_range(10..=100) as f64) / 10.0,
            coverage: CoverageBits::from_indices(patches, bits),
        })
        .collect();
    RoutingGraph::new(nodes, patches, edges).unwrap()
}

fn mask_of(bits: &CoverageBits) -> usize {
    bits.iter_ones().fold(0, |m, k| m | (1 << k))
}

/// Exact min-max optimum with no limit on walk length, for at most 2 agents and 12
/// patches, requiring every patch: Dijkstra over (node, collected patch set), then the
/// best split of the patch set between the agents.
pub fn exact_min_max(g: &RoutingGraph, depot: usize, agents: usize) -> f64 {
    assert!(agents <= 2 && g.patch_count() <= 12);
    let full = (1usize << g.patch_count()) - 1;
    let n = g.node_count();
    let masks = full + 1;
    let mut dist = vec![f64::INFINITY; n * masks];
    let mut done = vec![false; n * masks];
    dist[depot * masks] = 0.0;
    // dense Dijkstra: the state space is tiny
    loop {
        let mut best = None;
        for s in 0..n * masks {
            if !done[s] && dist[s].is_finite() && best.map_or(true, |b: usize| dist[s] < dist[b]) {
                best = Some(s);
            }
        }
        let Some(s) = best else { break };
        done[s] = true;
        let (v, mask) = (s / masks, s % masks);
        for &(u, e) in g.neighbors(v) {
            let edge = g.edge(e);
            let t = u * masks + (mask | mask_of(&edge.coverage));
            let nd = dist[s] + edge.length;
            if nd < dist[t] {
                dist[t] = nd;
            }
        }
    }
    // cheapest walk collecting at least each set
    let mut w = vec![f64::INFINITY; masks];
    for v in 0..n {
        for mask in 0..masks {
            w[mask] = w[mask].min(dist[v * masks + mask]);
        }
    }
    for bit in 0..g.patch_count() {
        for mask in 0..masks {
            if mask & (1 << bit) == 0 {
                w[mask] = w[mask].min(w[mask | (1 << bit)]);
            }
        }
    }
    if agents == 1 {
        return w[full];
    }
    (0..masks)
        .map(|a| w[a].max(w[full & !a]))
        .fold(f64::INFINITY, f64::min)
}
