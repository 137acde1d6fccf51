//! Min-max set-covering routing on a coverage roadmap.
//!
//! A chromosome of random keys is decoded into `K` walks from a shared depot: the
//! integer part of a key picks the agent, the fractional part picks which neighbour of
//! that agent's current node to move to. Decoding stops as soon as the joint coverage
//! reaches the required ratio; the fitness is the longest walk.

mod brkga;
mod decode;
mod greedy;
mod io;
mod local;
mod oracle;

pub use brkga::{run_brkga, BrkgaRun, GenerationStats};
pub use decode::{decode_key, evaluate_fitness, Chromosome};
pub use greedy::greedy_baseline;
pub use io::{
    convergence_csv, read_solution, solution_to_string, write_solution, SolutionFile,
    SolutionMeta, SOLUTION_FORMAT_VERSION,
};
pub use local::two_opt_improve;
pub use oracle::{exhaustive_oracle, ORACLE_MAX_AGENTS, ORACLE_MAX_EDGES, ORACLE_MAX_NODES};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cprm::Cprm;
use crate::visibility::{required_count, CoverageBits};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error("invalid routing graph: {0}")]
    InvalidGraph(String),
    #[error("roadmap is not connected from the depot")]
    Disconnected,
    #[error("required coverage {required:.4} exceeds the achievable {ceiling:.4}")]
    CeilingTooLow { ceiling: f64, required: f64 },
    #[error("no feasible individual after all generations (best attempt covers {:.4})", best.coverage_ratio())]
    NoFeasible {
        best: Box<Solution>,
        history: Vec<GenerationStats>,
    },
    #[error("instance exceeds the exhaustive search bounds: {0}")]
    OracleBounds(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed solution file at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    /// Number of agents `K`.
    pub agents: usize,
    /// Required coverage ratio.
    pub delta_d: f64,
    pub population_size: usize,
    pub generations: usize,
    pub elite_fraction: f64,
    /// Fraction of each new generation made of fresh random chromosomes.
    pub mutant_fraction: f64,
    /// Per-key probability of inheriting from the elite parent.
    pub elite_inherit_prob: f64,
    /// Probability that a new individual goes through 2-opt improvement.
    pub local_improve_prob: f64,
    /// Chromosome length as a multiple of the node count.
    pub chromosome_length_factor: f64,
    pub depot: usize,
    pub infeasibility_penalty_weight: f64,
    pub rng_seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            agents: 1,
            delta_d: 0.98,
            population_size: 1000,
            generations: 100,
            elite_fraction: 0.1,
            mutant_fraction: 0.2,
            elite_inherit_prob: 0.5,
            local_improve_prob: 0.2,
            chromosome_length_factor: 1.0,
            depot: 0,
            infeasibility_penalty_weight: 100.0,
            rng_seed: 0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidParams(m));
        if self.agents == 0 {
            return bad("at least one agent is required".into());
        }
        if !(0.0..=1.0).contains(&self.delta_d) {
            return bad(format!("delta_d must be in [0, 1], got {}", self.delta_d));
        }
        for (name, v) in [
            ("elite_fraction", self.elite_fraction),
            ("mutant_fraction", self.mutant_fraction),
            ("elite_inherit_prob", self.elite_inherit_prob),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must be in (0, 1), got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.local_improve_prob) {
            return bad(format!(
                "local_improve_prob must be in [0, 1], got {}",
                self.local_improve_prob
            ));
        }
        if self.elite_fraction + self.mutant_fraction >= 1.0 {
            return bad("elite_fraction + mutant_fraction must be below 1".into());
        }
        if self.population_size < 2 {
            return bad("population_size must be at least 2".into());
        }
        if !(self.chromosome_length_factor > 0.0) {
            return bad("chromosome_length_factor must be positive".into());
        }
        if !(self.infeasibility_penalty_weight >= 0.0) {
            return bad("infeasibility_penalty_weight must be non-negative".into());
        }
        Ok(())
    }

    pub fn chromosome_length(&self, nodes: usize) -> usize {
        ((self.chromosome_length_factor * nodes as f64).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub coverage: CoverageBits,
}

impl GraphEdge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// The solver's view of a roadmap: topology, edge lengths and edge coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingGraph {
    edges: Vec<GraphEdge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    patches: usize,
    total_length: f64,
}

impl RoutingGraph {
    pub fn new(nodes: usize, patches: usize, edges: Vec<GraphEdge>) -> Result<Self, SolverError> {
        let mut adjacency = vec![Vec::new(); nodes];
        for (i, e) in edges.iter().enumerate() {
            if e.a >= nodes || e.b >= nodes || e.a == e.b {
                return Err(SolverError::InvalidGraph(format!(
                    "edge {i} has invalid endpoints {} - {}",
                    e.a, e.b
                )));
            }
            if e.coverage.len() != patches {
                return Err(SolverError::InvalidGraph(format!(
                    "edge {i} carries {} coverage bits, expected {patches}",
                    e.coverage.len()
                )));
            }
            if !(e.length >= 0.0) {
                return Err(SolverError::InvalidGraph(format!("edge {i} has negative length")));
            }
            adjacency[e.a].push((e.b, i));
            adjacency[e.b].push((e.a, i));
        }
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(SolverError::InvalidGraph(format!("node {v} has parallel edges")));
            }
        }
        let total_length = edges.iter().map(|e| e.length).sum();
        Ok(Self {
            edges,
            adjacency,
            patches,
            total_length,
        })
    }

    pub fn from_cprm(g: &Cprm) -> Self {
        let edges = g
            .edges()
            .iter()
            .map(|e| GraphEdge {
                a: e.a,
                b: e.b,
                length: e.length,
                coverage: e.coverage.clone(),
            })
            .collect();
        Self::new(g.nodes().len(), g.patch_count(), edges)
            .expect("a validated roadmap is a valid routing graph")
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn patch_count(&self) -> usize {
        self.patches
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &GraphEdge {
        &self.edges[e]
    }

    /// `(neighbour, edge id)` sorted by neighbour id.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        let list = &self.adjacency[u];
        list.binary_search_by(|probe| probe.0.cmp(&v))
            .ok()
            .map(|i| list[i].1)
    }

    /// Sum of all edge lengths.
    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn achievable_coverage(&self) -> CoverageBits {
        let mut bits = CoverageBits::zeros(self.patches);
        for e in &self.edges {
            bits.or_assign(&e.coverage);
        }
        bits
    }

    pub fn connected_from(&self, start: usize) -> bool {
        if start >= self.node_count() {
            return false;
        }
        let mut seen = vec![false; self.node_count()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Shared preconditions of the solvers.
    pub fn check_solvable(&self, params: &SolverParams) -> Result<(), SolverError> {
        params.validate()?;
        if params.depot >= self.node_count() {
            return Err(SolverError::InvalidParams(format!(
                "depot {} is not a node (graph has {})",
                params.depot,
                self.node_count()
            )));
        }
        if !self.connected_from(params.depot) {
            return Err(SolverError::Disconnected);
        }
        let reach = self.achievable_coverage().count_ones();
        if reach < required_count(self.patches, params.delta_d) {
            return Err(SolverError::CeilingTooLow {
                ceiling: reach as f64 / self.patches.max(1) as f64,
                required: params.delta_d,
            });
        }
        Ok(())
    }
}

/// One agent's walk. `nodes` has one more entry than `edges`; it starts at the depot.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    pub length: f64,
    /// Chromosome position that produced each edge (empty for non-decoded solutions).
    pub key_slots: Vec<usize>,
}

impl Route {
    pub fn at(depot: usize) -> Self {
        Self {
            nodes: vec![depot],
            edges: Vec::new(),
            length: 0.0,
            key_slots: Vec::new(),
        }
    }

    pub fn current(&self) -> usize {
        *self.nodes.last().unwrap()
    }

    pub fn push(&mut self, graph: &RoutingGraph, edge: usize, slot: Option<usize>) {
        let e = graph.edge(edge);
        let next = e.other(self.current());
        self.nodes.push(next);
        self.edges.push(edge);
        self.length += e.length;
        if let Some(s) = slot {
            self.key_slots.push(s);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub coverage: CoverageBits,
    pub fitness: f64,
    pub feasible: bool,
    /// Keys consumed by the decoder (total edges for non-decoded solutions).
    pub keys_consumed: usize,
}

impl Solution {
    pub fn max_length(&self) -> f64 {
        self.routes.iter().map(|r| r.length).fold(0.0, f64::max)
    }

    pub fn coverage_ratio(&self) -> f64 {
        if self.coverage.is_empty() {
            return 1.0;
        }
        crate::visibility::coverage_ratio(&self.coverage)
    }

    /// Builds a solution from finished walks; fitness is the longest walk.
    pub fn from_routes(graph: &RoutingGraph, routes: Vec<Route>, params: &SolverParams) -> Self {
        let mut coverage = CoverageBits::zeros(graph.patch_count());
        for r in &routes {
            for &e in &r.edges {
                coverage.or_assign(&graph.edge(e).coverage);
            }
        }
        let feasible =
            coverage.count_ones() >= required_count(graph.patch_count(), params.delta_d);
        let keys_consumed = routes.iter().map(|r| r.edges.len()).sum();
        let mut sol = Self {
            routes,
            coverage,
            fitness: 0.0,
            feasible,
            keys_consumed,
        };
        sol.fitness = sol.max_length();
        sol
    }
}
