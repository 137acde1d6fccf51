use std::collections::BTreeSet;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use rayon::prelude::*;

use super::RunConfig;
use crate::cprm::{Cprm, PlanningSpace};
use crate::geometry::segment_collision_free;
use crate::solver::{Route, RoutingGraph, SolutionFile, SolverParams};
use crate::visibility::{path_visibility, polyline_length, required_count, CoverageBits};

/// Outcome of replaying a solution from scratch.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub patches: usize,
    pub covered: usize,
    pub replayed_ratio: f64,
    /// Ratio the solver wrote into the solution.
    pub reported_ratio: f64,
    pub delta_d: f64,
    pub agent_lengths: Vec<f64>,
    pub max_length: f64,
    /// Sub-segments that enter the safety-dilated occupancy or leave the grid.
    pub collision_violations: usize,
    /// Route steps that do not follow a roadmap edge, or walks that do not start at the depot.
    pub walk_errors: usize,
    pub pass: bool,
}

impl VerificationReport {
    fn finish(
        coverage: &CoverageBits,
        reported_ratio: f64,
        params: &SolverParams,
        agent_lengths: Vec<f64>,
        collision_violations: usize,
        walk_errors: usize,
    ) -> Self {
        let patches = coverage.len();
        let covered = coverage.count_ones();
        let replayed_ratio = if patches == 0 { 1.0 } else { covered as f64 / patches as f64 };
        let max_length = agent_lengths.iter().copied().fold(0.0, f64::max);
        let pass = covered >= required_count(patches, params.delta_d)
            && collision_violations == 0
            && walk_errors == 0;
        Self {
            patches,
            covered,
            replayed_ratio,
            reported_ratio,
            delta_d: params.delta_d,
            agent_lengths,
            max_length,
            collision_violations,
            walk_errors,
            pass,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verification {}", if self.pass { "PASS" } else { "FAIL" });
        let _ = writeln!(
            out,
            "coverage {} ({}/{}), required {}, solver reported {}",
            self.replayed_ratio, self.covered, self.patches, self.delta_d, self.reported_ratio
        );
        for (k, l) in self.agent_lengths.iter().enumerate() {
            let _ = writeln!(out, "agent {k} length {l}");
        }
        let _ = writeln!(out, "max_length {}", self.max_length);
        let _ = writeln!(out, "collision_violations {}", self.collision_violations);
        let _ = writeln!(out, "walk_errors {}", self.walk_errors);
        out
    }
}

/// Counts route steps that do not match the graph, calling `edge_ends` for the endpoints.
fn walk_errors(routes: &[Route], depot: usize, edge_count: usize, edge_ends: impl Fn(usize) -> (usize, usize)) -> usize {
    let mut errors = 0;
    for r in routes {
        if r.nodes.first() != Some(&depot) {
            errors += 1;
        }
        for (i, &e) in r.edges.iter().enumerate() {
            if e >= edge_count {
                errors += 1;
                continue;
            }
            let (a, b) = edge_ends(e);
            let (u, v) = (r.nodes[i], r.nodes[i + 1]);
            if !((a == u && b == v) || (a == v && b == u)) {
                errors += 1;
            }
        }
    }
    errors
}

/// Replays a solution against the structure: rebuilds the mesh, surface patches and
/// safety grid from the config, re-evaluates the visibility of every flown primitive and
/// re-checks every polyline segment for collisions. Only the roadmap geometry (polylines
/// and via-point orientations) is taken from the roadmap file.
pub fn verify_solution(cfg: &RunConfig, cprm: &Cprm, sol: &SolutionFile) -> Result<VerificationReport> {
    let space = PlanningSpace::new(cfg.load_mesh()?, &cfg.sampling, cfg.camera.clone())?;
    verify_in_space(&space, cfg.sampling.path_spacing, cprm, sol)
}

/// [`verify_solution`] against an already rebuilt planning space.
pub fn verify_in_space(
    space: &PlanningSpace,
    path_spacing: f64,
    cprm: &Cprm,
    sol: &SolutionFile,
) -> Result<VerificationReport> {
    let m = space.scene.patch_count();
    if m != sol.coverage.len() || m != cprm.patch_count() {
        bail!(
            "patch count mismatch: structure has {m}, solution {}, roadmap {}",
            sol.coverage.len(),
            cprm.patch_count()
        );
    }
    let params = &sol.meta.params;
    let edges = cprm.edges();
    let errors = walk_errors(&sol.routes, params.depot, edges.len(), |e| (edges[e].a, edges[e].b));

    let flown: BTreeSet<usize> = sol
        .routes
        .iter()
        .flat_map(|r| r.edges.iter().copied())
        .filter(|&e| e < edges.len())
        .collect();
    let flown: Vec<usize> = flown.into_iter().collect();
    let nodes = cprm.nodes();
    let replays: Vec<(CoverageBits, usize)> = flown
        .par_iter()
        .map(|&e| {
            let p = &edges[e];
            let bits = path_visibility(
                &p.polyline,
                &nodes[p.a].view,
                &nodes[p.b].view,
                &space.scene,
                path_spacing,
            );
            let hits = p
                .polyline
                .windows(2)
                .filter(|w| !matches!(segment_collision_free(&space.safe, &w[0], &w[1]), Ok(true)))
                .count();
            (bits, hits)
        })
        .collect();
    let mut coverage = CoverageBits::zeros(m);
    let mut collisions = 0;
    for (bits, hits) in &replays {
        coverage.or_assign(bits);
        collisions += hits;
    }
    let lengths = sol
        .routes
        .iter()
        .map(|r| {
            r.edges
                .iter()
                .filter(|&&e| e < edges.len())
                .map(|&e| polyline_length(&edges[e].polyline))
                .sum()
        })
        .collect();
    Ok(VerificationReport::finish(
        &coverage,
        sol_ratio(sol),
        params,
        lengths,
        collisions,
        errors,
    ))
}

fn sol_ratio(sol: &SolutionFile) -> f64 {
    if sol.coverage.is_empty() {
        1.0
    } else {
        sol.coverage.count_ones() as f64 / sol.coverage.len() as f64
    }
}

/// Graph-level replay for roadmaps without geometry: walk structure, lengths and the
/// union of edge coverage are recomputed from the graph alone.
pub fn replay_on_graph(
    graph: &RoutingGraph,
    routes: &[Route],
    reported_ratio: f64,
    params: &SolverParams,
) -> VerificationReport {
    let edges = graph.edges();
    let errors = walk_errors(routes, params.depot, edges.len(), |e| (edges[e].a, edges[e].b));
    let mut coverage = CoverageBits::zeros(graph.patch_count());
    let mut lengths = Vec::with_capacity(routes.len());
    for r in routes {
        let mut len = 0.0;
        for &e in r.edges.iter().filter(|&&e| e < edges.len()) {
            coverage.or_assign(&edges[e].coverage);
            len += edges[e].length;
        }
        lengths.push(len);
    }
    VerificationReport::finish(&coverage, reported_ratio, params, lengths, 0, errors)
}
