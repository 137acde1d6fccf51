use rand::Rng;

use super::{Route, RoutingGraph, Solution, SolverParams};
use crate::visibility::{required_count, CoverageBits};

/// Random-key chromosome. Every key lies in `[0, K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome(pub Vec<f64>);

impl Chromosome {
    pub fn random<R: Rng + ?Sized>(len: usize, agents: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| random_key(agents, rng)).collect())
    }

    pub fn keys(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn random_key<R: Rng + ?Sized>(agents: usize, rng: &mut R) -> f64 {
    let k = agents as f64;
    let key = rng.gen::<f64>() * k;
    // gen() is in [0, 1) but the product can round up to K
    if key >= k {
        k - k * f64::EPSILON
    } else {
        key
    }
}

/// Splits a key into `(agent, edge id, next node)` given each agent's current node.
/// Returns `None` when the selected agent sits on an isolated node.
pub fn decode_key(
    key: f64,
    positions: &[usize],
    graph: &RoutingGraph,
) -> Option<(usize, usize, usize)> {
    let k = positions.len();
    let floor = key.floor();
    let agent = (floor.max(0.0) as usize).min(k - 1);
    let frac = (key - agent as f64).clamp(0.0, 1.0);
    let nbrs = graph.neighbors(positions[agent]);
    if nbrs.is_empty() {
        return None;
    }
    let deg = nbrs.len();
    let idx = ((frac * deg as f64).floor() as usize).min(deg - 1);
    let (next, edge) = nbrs[idx];
    Some((agent, edge, next))
}

/// Decodes a chromosome and scores it. A feasible decode scores its longest walk; an
/// infeasible one gets the longest walk plus `w * shortfall * total edge length`.
pub fn evaluate_fitness(chrom: &Chromosome, graph: &RoutingGraph, params: &SolverParams) -> Solution {
    let m = graph.patch_count();
    let required = required_count(m, params.delta_d);
    let mut routes = vec![Route::at(params.depot); params.agents];
    let mut positions = vec![params.depot; params.agents];
    let mut coverage = CoverageBits::zeros(m);
    let mut covered = 0;
    let mut consumed = 0;

    if covered < required {
        for (slot, &key) in chrom.keys().iter().enumerate() {
            consumed = slot + 1;
            let Some((agent, edge, next)) = decode_key(key, &positions, graph) else {
                continue;
            };
            routes[agent].push(graph, edge, Some(slot));
            positions[agent] = next;
            covered += coverage.or_assign_count(&graph.edge(edge).coverage);
            if covered >= required {
                break;
            }
        }
    }

    let max_len = routes.iter().map(|r| r.length).fold(0.0, f64::max);
    let (fitness, feasible) = score(max_len, covered, required, graph, params);
    Solution {
        routes,
        coverage,
        fitness,
        feasible,
        keys_consumed: consumed,
    }
}

fn score(
    max_len: f64,
    covered: usize,
    required: usize,
    graph: &RoutingGraph,
    params: &SolverParams,
) -> (f64, bool) {
    if covered >= required {
        return (max_len, true);
    }
    let achieved = covered as f64 / graph.patch_count() as f64;
    let shortfall = (params.delta_d - achieved).max(0.0);
    let penalty = params.infeasibility_penalty_weight * shortfall * graph.total_length();
    (max_len + penalty, false)
}

/// Reusable buffers for [`fitness_only`].
pub(crate) struct Scratch {
    positions: Vec<usize>,
    lengths: Vec<f64>,
    coverage: CoverageBits,
}

impl Scratch {
    pub(crate) fn new(graph: &RoutingGraph, params: &SolverParams) -> Self {
        Self {
            positions: vec![params.depot; params.agents],
            lengths: vec![0.0; params.agents],
            coverage: CoverageBits::zeros(graph.patch_count()),
        }
    }
}

/// Same decode as [`evaluate_fitness`] without building routes; returns `(fitness, feasible)`.
pub(crate) fn fitness_only(
    keys: &[f64],
    graph: &RoutingGraph,
    params: &SolverParams,
    s: &mut Scratch,
) -> (f64, bool) {
    let required = required_count(graph.patch_count(), params.delta_d);
    s.positions.fill(params.depot);
    s.lengths.fill(0.0);
    s.coverage.reset();
    let mut covered = 0;
    if covered < required {
        for &key in keys {
            let Some((agent, edge, next)) = decode_key(key, &s.positions, graph) else {
                continue;
            };
            s.positions[agent] = next;
            let e = graph.edge(edge);
            s.lengths[agent] += e.length;
            covered += s.coverage.or_assign_count(&e.coverage);
            if covered >= required {
                break;
            }
        }
    }
    let max_len = s.lengths.iter().copied().fold(0.0, f64::max);
    score(max_len, covered, required, graph, params)
}
