use rand::Rng;

use super::{CprmError, ViaPoint};
use crate::geometry::{Vec3, VoxelGrid};
use crate::visibility::{Pose, Scene};

/// The feasible via-point region with its occupied cells listed for uniform draws.
#[derive(Debug, Clone)]
pub struct Shell {
    grid: VoxelGrid,
    cells: Vec<usize>,
}

impl Shell {
    pub fn new(grid: VoxelGrid) -> Result<Self, CprmError> {
        let cells = grid.occupied_indices();
        if cells.is_empty() {
            return Err(CprmError::EmptyShell);
        }
        Ok(Self { grid, cells })
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.grid.world_to_cell(p).is_some_and(|c| self.grid.get(c))
    }

    /// Uniform cell, then a uniform point inside that cell.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        let idx = self.cells[rng.gen_range(0..self.cells.len())];
        let [i, j, k] = self.grid.coords(idx);
        let res = self.grid.resolution();
        let corner = self.grid.origin() + Vec3::new(i as f64, j as f64, k as f64) * res;
        corner + Vec3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()) * res
    }
}

/// Direction toward the nearest patch centroid that is unoccluded and within viewing
/// range; falls back to the nearest centroid. Equal distances resolve to the lower
/// patch index.
pub fn assign_orientation(position: &Vec3, scene: &Scene) -> Vec3 {
    let mut order: Vec<(f64, usize)> = scene
        .patches
        .iter()
        .enumerate()
        .map(|(k, p)| ((p.centroid - position).norm_squared(), k))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let d_vis2 = scene.camera.d_vis * scene.camera.d_vis;
    let chosen = order
        .iter()
        .take_while(|(d2, _)| *d2 <= d_vis2)
        .find(|(_, k)| scene.unoccluded(position, *k))
        .or(order.first())
        .map(|&(_, k)| k)
        .expect("scene has at least one patch");
    let dir = scene.patches.get(chosen).centroid - position;
    if dir.norm() > 0.0 {
        dir.normalize()
    } else {
        Vec3::x()
    }
}

/// `count` uniform samples in the shell, oriented by [`assign_orientation`], numbered
/// from `first_id`.
pub fn random_sample_viapoints<R: Rng + ?Sized>(
    shell: &Shell,
    scene: &Scene,
    count: usize,
    first_id: usize,
    rng: &mut R,
) -> Vec<ViaPoint> {
    (0..count)
        .map(|i| {
            let position = shell.sample_point(rng);
            ViaPoint {
                id: first_id + i,
                position,
                view: assign_orientation(&position, scene),
            }
        })
        .collect()
}

/// Uniform direction in the cone of half angle `max_angle` around unit `axis`.
fn sample_cone<R: Rng + ?Sized>(axis: &Vec3, max_angle: f64, rng: &mut R) -> Vec3 {
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = axis.cross(&helper).normalize();
    let v = axis.cross(&u);
    let cos_t = 1.0 - rng.gen::<f64>() * (1.0 - max_angle.cos());
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    axis * cos_t + (u * phi.cos() + v * phi.sin()) * sin_t
}

/// Samples biased toward unseen patches: pick an unseen patch, propose shell points in
/// front of it (within viewing range and angle) looking at it, and keep the first one
/// that actually sees it. After `attempts` failures a uniform shell sample is used, so
/// exactly `count` points come back. Also returns how many were targeted successes.
pub fn dual_sample_viapoints<R: Rng + ?Sized>(
    shell: &Shell,
    unseen: &[usize],
    count: usize,
    attempts: usize,
    scene: &Scene,
    first_id: usize,
    rng: &mut R,
) -> Result<(Vec<ViaPoint>, usize), CprmError> {
    if unseen.is_empty() {
        return Err(CprmError::NothingUnseen);
    }
    let cam = &scene.camera;
    let cone = cam.max_view_angle.to_radians();
    let mut out = Vec::with_capacity(count);
    let mut hits = 0;
    for i in 0..count {
        let k = unseen[rng.gen_range(0..unseen.len())];
        let patch = scene.patches.get(k);
        let mut found = None;
        for _ in 0..attempts {
            let dir = sample_cone(&patch.normal, cone, rng);
            let dist = rng.gen_range(cam.d_safe..=cam.d_vis);
            let position = patch.centroid + dir * dist;
            if !shell.contains(&position) {
                continue;
            }
            let pose = Pose::new(position, -dir);
            if scene.sees_patch(&pose, k) {
                found = Some(pose);
                break;
            }
        }
        let point = match found {
            Some(pose) => {
                hits += 1;
                ViaPoint {
                    id: first_id + i,
                    position: pose.position,
                    view: pose.view,
                }
            }
            None => {
                let position = shell.sample_point(rng);
                ViaPoint {
                    id: first_id + i,
                    position,
                    view: assign_orientation(&position, scene),
                }
            }
        };
        out.push(point);
    }
    Ok((out, hits))
}
