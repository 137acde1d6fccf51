//! Coverage roadmap: via-points in the feasible viewing shell joined by collision-free
//! path primitives, each carrying its length and the patches it sees.

mod build;
mod io;
mod planner;
mod sampling;

pub use build::{build_cprm, BuildReport, IterationStats, PlanningSpace};
pub use io::{read_cprm, write_cprm, CPRM_FORMAT_VERSION};
pub use planner::{local_plan, LocalPath};
pub use sampling::{assign_orientation, dual_sample_viapoints, random_sample_viapoints, Shell};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, SurfacePatchSet, Vec3};
use crate::visibility::{CameraError, CoverageBits};

#[derive(Debug, Error)]
pub enum CprmError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error("invalid sampling parameters: {0}")]
    InvalidParams(String),
    #[error("the feasible via-point shell is empty")]
    EmptyShell,
    #[error("no unseen patches to sample toward")]
    NothingUnseen,
    #[error(
        "achievable coverage {ceiling:.4} is below the required {required:.4}; {} patches cannot be seen from the roadmap: {uncoverable:?}",
        uncoverable.len()
    )]
    InsufficientCoverage {
        ceiling: f64,
        required: f64,
        uncoverable: Vec<usize>,
    },
    #[error("invalid roadmap: {0}")]
    InvalidGraph(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed roadmap file at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A roadmap node: a camera position inside the viewing shell with its view direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViaPoint {
    pub id: usize,
    pub position: Vec3,
    pub view: Vec3,
}

/// An undirected roadmap edge. The polyline runs from node `a` to node `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPrimitive {
    pub id: usize,
    pub a: usize,
    pub b: usize,
    pub polyline: Vec<Vec3>,
    pub length: f64,
    pub coverage: CoverageBits,
}

impl PathPrimitive {
    pub fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }

    /// Polyline oriented to start at `from`.
    pub fn polyline_from(&self, from: usize) -> Vec<Vec3> {
        let mut pts = self.polyline.clone();
        if from == self.b && from != self.a {
            pts.reverse();
        }
        pts
    }
}

/// Coverage probabilistic roadmap.
#[derive(Debug, Clone, PartialEq)]
pub struct Cprm {
    nodes: Vec<ViaPoint>,
    edges: Vec<PathPrimitive>,
    adjacency: Vec<Vec<(usize, usize)>>,
    patches: SurfacePatchSet,
}

impl Cprm {
    /// Validates ids, endpoints and coverage lengths and builds an adjacency index whose
    /// per-node lists are sorted by neighbour id.
    pub fn new(
        nodes: Vec<ViaPoint>,
        edges: Vec<PathPrimitive>,
        patches: SurfacePatchSet,
    ) -> Result<Self, CprmError> {
        let bad = |m: String| Err(CprmError::InvalidGraph(m));
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return bad(format!("node at position {i} has id {}", n.id));
            }
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.id != i {
                return bad(format!("edge at position {i} has id {}", e.id));
            }
            if e.a >= nodes.len() || e.b >= nodes.len() || e.a == e.b {
                return bad(format!("edge {i} has invalid endpoints {} - {}", e.a, e.b));
            }
            if e.coverage.len() != patches.len() {
                return bad(format!(
                    "edge {i} coverage has {} bits for {} patches",
                    e.coverage.len(),
                    patches.len()
                ));
            }
            adjacency[e.a].push((e.b, i));
            adjacency[e.b].push((e.a, i));
        }
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0].0 == w[1].0) {
                return bad(format!("node {v} has parallel edges"));
            }
        }
        Ok(Self {
            nodes,
            edges,
            adjacency,
            patches,
        })
    }

    pub fn nodes(&self) -> &[ViaPoint] {
        &self.nodes
    }

    pub fn edges(&self) -> &[PathPrimitive] {
        &self.edges
    }

    pub fn patches(&self) -> &SurfacePatchSet {
        &self.patches
    }

    pub fn patch_count(&self) -> usize {
        self.patches.len()
    }

    /// `(neighbour, edge id)` pairs sorted by neighbour id.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Union of all edge coverage: the best any set of walks can achieve.
    pub fn achievable_coverage(&self) -> CoverageBits {
        let mut bits = CoverageBits::zeros(self.patch_count());
        for e in &self.edges {
            bits.or_assign(&e.coverage);
        }
        bits
    }

    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        if start >= seen.len() {
            return seen;
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        self.reachable_from(0).iter().all(|&r| r)
    }
}

/// Tunables of the roadmap construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingParams {
    pub d_vis: f64,
    pub d_safe: f64,
    /// Longest straight-line distance between via-points that the local planner tries to join.
    pub d_max: f64,
    /// Largest number of unseen patches tolerated before sampling stops.
    pub m_min: usize,
    pub n_desired: usize,
    pub target_patch_area: f64,
    pub initial_sample_count: usize,
    pub dual_batch_size: usize,
    pub max_iterations: usize,
    pub rng_seed: u64,
    pub voxel_resolution: f64,
    /// Arc-length spacing of the camera poses used to evaluate a primitive.
    pub path_spacing: f64,
    /// Rejection attempts per dual sample before falling back to a uniform shell sample.
    pub dual_attempts: usize,
    pub cell_budget: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            d_vis: 50.0,
            d_safe: 2.0,
            d_max: 30.0,
            m_min: 0,
            n_desired: 500,
            target_patch_area: 4.0,
            initial_sample_count: 100,
            dual_batch_size: 30,
            max_iterations: 50,
            rng_seed: 0,
            voxel_resolution: 1.0,
            path_spacing: 2.0,
            dual_attempts: 50,
            cell_budget: 50_000_000,
        }
    }
}

impl SamplingParams {
    pub fn validate(&self) -> Result<(), CprmError> {
        let bad = |m: String| Err(CprmError::InvalidParams(m));
        if !(self.d_safe > 0.0 && self.d_safe < self.d_vis) {
            return bad(format!(
                "need 0 < d_safe < d_vis, got d_safe = {} and d_vis = {}",
                self.d_safe, self.d_vis
            ));
        }
        for (name, v) in [
            ("d_max", self.d_max),
            ("target_patch_area", self.target_patch_area),
            ("voxel_resolution", self.voxel_resolution),
            ("path_spacing", self.path_spacing),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("initial_sample_count", self.initial_sample_count),
            ("dual_batch_size", self.dual_batch_size),
            ("max_iterations", self.max_iterations),
            ("dual_attempts", self.dual_attempts),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        Ok(())
    }
}
