use rand::Rng;
use rayon::prelude::*;

use super::{
    dual_sample_viapoints, local_plan, random_sample_viapoints, Cprm, CprmError, PathPrimitive,
    SamplingParams, Shell, ViaPoint,
};
use crate::geometry::{
    dilate, fill_interior, sample_surface_patches, voxel_subtract, voxelize_with_budget,
    TriangleMesh, VoxelGrid,
};
use crate::visibility::{coverage_ratio, path_visibility, CameraModel, CoverageBits, Scene};

/// Everything the sampler and the verifier need about the structure.
#[derive(Debug, Clone)]
pub struct PlanningSpace {
    pub scene: Scene,
    /// Solid occupancy of the structure.
    pub solid: VoxelGrid,
    /// Occupancy dilated by the safety distance; collision queries run against it.
    pub safe: VoxelGrid,
    /// Cells within viewing range but outside the safety distance.
    pub shell: Shell,
}

impl PlanningSpace {
    pub fn new(
        mesh: TriangleMesh,
        params: &SamplingParams,
        camera: CameraModel,
    ) -> Result<Self, CprmError> {
        params.validate()?;
        camera.validate()?;
        if params.d_vis != camera.d_vis || params.d_safe != camera.d_safe {
            return Err(CprmError::InvalidParams(format!(
                "sampling distances (d_vis {}, d_safe {}) disagree with the camera (d_vis {}, d_safe {})",
                params.d_vis, params.d_safe, camera.d_vis, camera.d_safe
            )));
        }
        let res = params.voxel_resolution;
        let surface = voxelize_with_budget(
            &mesh,
            res,
            params.d_vis + res,
            params.cell_budget as u128,
        )?;
        let solid = fill_interior(&surface);
        let reach = dilate(&solid, params.d_vis);
        let safe = dilate(&solid, params.d_safe);
        let shell = Shell::new(voxel_subtract(&reach, &safe)?)?;
        let patches = sample_surface_patches(&mesh, params.target_patch_area)?;
        Ok(Self {
            scene: Scene::new(mesh, patches, camera),
            solid,
            safe,
            shell,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    pub nodes: usize,
    pub edges: usize,
    pub unseen: usize,
    pub ceiling: f64,
    pub dual_hits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildReport {
    pub patch_count: usize,
    pub shell_cells: usize,
    pub iterations: usize,
    pub raw_nodes: usize,
    pub raw_edges: usize,
    pub raw_ceiling: f64,
    pub nodes: usize,
    pub edges: usize,
    /// Coverage ratio reachable on the delivered (connected) roadmap.
    pub ceiling: f64,
    pub uncoverable: Vec<usize>,
    pub history: Vec<IterationStats>,
}

/// Incremental dual path-primitive sampling.
///
/// Starts from a uniform batch in the shell, then repeats: draw a dual batch biased to
/// unseen patches, try to connect every new node pair closer than `d_max`, evaluate the
/// visibility of every new primitive and recompute the unseen set. Stops once at most
/// `m_min` patches are unseen and at least `n_desired` edges exist, or after
/// `max_iterations`. The largest connected component is delivered; the build fails if
/// its coverage ceiling is below `required_coverage`.
pub fn build_cprm<R: Rng + ?Sized>(
    space: &PlanningSpace,
    params: &SamplingParams,
    required_coverage: f64,
    rng: &mut R,
) -> Result<(Cprm, BuildReport), CprmError> {
    params.validate()?;
    let scene = &space.scene;
    let m = scene.patch_count();
    let mut nodes =
        random_sample_viapoints(&space.shell, scene, params.initial_sample_count, 0, rng);
    let mut edges: Vec<PathPrimitive> = Vec::new();
    let mut covered = CoverageBits::zeros(m);
    let mut unseen: Vec<usize> = (0..m).collect();
    let mut joined = 0usize;
    let mut history = Vec::new();
    let mut iterations = 0;

    while (unseen.len() > params.m_min || edges.len() < params.n_desired)
        && iterations < params.max_iterations
    {
        iterations += 1;
        let (batch, dual_hits) = if unseen.is_empty() {
            let batch = random_sample_viapoints(
                &space.shell,
                scene,
                params.dual_batch_size,
                nodes.len(),
                rng,
            );
            (batch, 0)
        } else {
            dual_sample_viapoints(
                &space.shell,
                &unseen,
                params.dual_batch_size,
                params.dual_attempts,
                scene,
                nodes.len(),
                rng,
            )?
        };
        nodes.extend(batch);

        let mut pairs = Vec::new();
        for j in joined..nodes.len() {
            for i in 0..j {
                if (nodes[i].position - nodes[j].position).norm() <= params.d_max {
                    pairs.push((i, j));
                }
            }
        }
        joined = nodes.len();
        let new_edges: Vec<_> = pairs
            .par_iter()
            .filter_map(|&(i, j)| {
                let (a, b) = (&nodes[i], &nodes[j]);
                let path = local_plan(&a.position, &b.position, &space.safe, params.d_max)?;
                let coverage =
                    path_visibility(&path.polyline, &a.view, &b.view, scene, params.path_spacing);
                Some((i, j, path, coverage))
            })
            .collect();
        for (i, j, path, coverage) in new_edges {
            covered.or_assign(&coverage);
            edges.push(PathPrimitive {
                id: edges.len(),
                a: i,
                b: j,
                polyline: path.polyline,
                length: path.length,
                coverage,
            });
        }
        unseen = covered.complement().iter_ones().collect();
        history.push(IterationStats {
            nodes: nodes.len(),
            edges: edges.len(),
            unseen: unseen.len(),
            ceiling: if m > 0 { coverage_ratio(&covered) } else { 0.0 },
            dual_hits,
        });
    }

    let raw_nodes = nodes.len();
    let raw_edges = edges.len();
    let raw_ceiling = coverage_ratio(&covered);
    let (nodes, edges) = largest_component(nodes, edges);
    let cprm = Cprm::new(nodes, edges, scene.patches.clone())?;
    let reach = cprm.achievable_coverage();
    let ceiling = coverage_ratio(&reach);
    let uncoverable: Vec<usize> = reach.complement().iter_ones().collect();
    if ceiling < required_coverage {
        return Err(CprmError::InsufficientCoverage {
            ceiling,
            required: required_coverage,
            uncoverable,
        });
    }
    let report = BuildReport {
        patch_count: m,
        shell_cells: space.shell.cell_count(),
        iterations,
        raw_nodes,
        raw_edges,
        raw_ceiling,
        nodes: cprm.nodes().len(),
        edges: cprm.edges().len(),
        ceiling,
        uncoverable,
        history,
    };
    Ok((cprm, report))
}

/// Keeps the component with the most nodes (ties: the one holding the lowest node id)
/// and renumbers nodes and edges in their original order.
fn largest_component(
    nodes: Vec<ViaPoint>,
    edges: Vec<PathPrimitive>,
) -> (Vec<ViaPoint>, Vec<PathPrimitive>) {
    let n = nodes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in &edges {
        let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let roots: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    let mut size = vec![0usize; n];
    for &r in &roots {
        size[r] += 1;
    }
    let Some(keep) = (0..n).max_by(|&a, &b| size[a].cmp(&size[b]).then(b.cmp(&a))) else {
        return (nodes, edges);
    };
    let mut remap = vec![usize::MAX; n];
    let mut kept_nodes = Vec::new();
    for (v, node) in nodes.into_iter().enumerate() {
        if roots[v] == keep {
            remap[v] = kept_nodes.len();
            kept_nodes.push(ViaPoint {
                id: kept_nodes.len(),
                ..node
            });
        }
    }
    let kept_edges = edges
        .into_iter()
        .filter(|e| remap[e.a] != usize::MAX)
        .enumerate()
        .map(|(id, e)| PathPrimitive {
            id,
            a: remap[e.a],
            b: remap[e.b],
            ..e
        })
        .collect();
    (kept_nodes, kept_edges)
}
