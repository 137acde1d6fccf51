use std::collections::HashMap;

use super::{Route, RoutingGraph, Solution, SolverError, SolverParams};
use crate::visibility::{required_count, CoverageBits};

pub const ORACLE_MAX_NODES: usize = 8;
pub const ORACLE_MAX_AGENTS: usize = 2;
pub const ORACLE_MAX_EDGES: usize = 6;

#[derive(Clone)]
struct Walk {
    nodes: Vec<usize>,
    edges: Vec<usize>,
    length: f64,
}

/// Exact min-max optimum over every combination of walks with at most
/// `max_edges` edges each, for tiny instances only.
pub fn exhaustive_oracle(
    graph: &RoutingGraph,
    params: &SolverParams,
    max_edges: usize,
) -> Result<Solution, SolverError> {
    if graph.node_count() > ORACLE_MAX_NODES
        || params.agents > ORACLE_MAX_AGENTS
        || max_edges > ORACLE_MAX_EDGES
    {
        return Err(SolverError::OracleBounds(format!(
            "{} nodes, {} agents, {} edges per walk (limits {ORACLE_MAX_NODES}, {ORACLE_MAX_AGENTS}, {ORACLE_MAX_EDGES})",
            graph.node_count(),
            params.agents,
            max_edges
        )));
    }
    graph.check_solvable(params)?;
    let required = required_count(graph.patch_count(), params.delta_d);

    // shortest walk for every distinct coverage set
    let mut best: HashMap<CoverageBits, Walk> = HashMap::new();
    let mut walk = Walk {
        nodes: vec![params.depot],
        edges: Vec::new(),
        length: 0.0,
    };
    let cov = CoverageBits::zeros(graph.patch_count());
    enumerate(graph, max_edges, &mut walk, &cov, &mut best);

    let mut list: Vec<(CoverageBits, Walk)> = best.into_iter().collect();
    list.sort_by(|a, b| {
        a.1.length
            .total_cmp(&b.1.length)
            .then_with(|| a.1.edges.cmp(&b.1.edges))
    });

    let chosen: Option<Vec<Walk>> = if params.agents == 1 {
        list.iter()
            .find(|(c, _)| c.count_ones() >= required)
            .map(|(_, w)| vec![w.clone()])
    } else {
        // the longer walk of the optimal pair is the first j (by length) that some i <= j completes
        let mut found = None;
        'outer: for j in 0..list.len() {
            for i in 0..=j {
                let mut u = list[i].0.clone();
                u.or_assign(&list[j].0);
                if u.count_ones() >= required {
                    found = Some(vec![list[i].1.clone(), list[j].1.clone()]);
                    break 'outer;
                }
            }
        }
        found
    };
    let walks = chosen.ok_or_else(|| {
        SolverError::OracleBounds(format!("no combination of walks with at most {max_edges} edges is feasible"))
    })?;
    let routes = walks
        .into_iter()
        .map(|w| Route {
            nodes: w.nodes,
            edges: w.edges,
            length: w.length,
            key_slots: Vec::new(),
        })
        .collect();
    Ok(Solution::from_routes(graph, routes, params))
}

fn enumerate(
    graph: &RoutingGraph,
    max_edges: usize,
    walk: &mut Walk,
    cov: &CoverageBits,
    best: &mut HashMap<CoverageBits, Walk>,
) {
    let keep = match best.get(cov) {
        Some(w) => {
            walk.length < w.length || (walk.length == w.length && walk.edges < w.edges)
        }
        None => true,
    };
    if keep {
        best.insert(cov.clone(), walk.clone());
    }
    if walk.edges.len() == max_edges {
        return;
    }
    let at = *walk.nodes.last().unwrap();
    for &(next, e) in graph.neighbors(at) {
        let mut c = cov.clone();
        c.or_assign(&graph.edge(e).coverage);
        let len = walk.length;
        walk.nodes.push(next);
        walk.edges.push(e);
        walk.length += graph.edge(e).length;
        enumerate(graph, max_edges, walk, &c, best);
        walk.nodes.pop();
        walk.edges.pop();
        walk.length = len;
    }
}
