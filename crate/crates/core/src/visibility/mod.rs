//! Camera-model visibility of surface patches from single poses and from whole paths.

mod bits;

pub use bits::{coverage_ratio, required_count, CoverageBits};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{RayCaster, SurfacePatchSet, TriangleMesh, Vec3};

#[derive(Debug, Error, PartialEq)]
pub enum CameraError {
    #[error("invalid camera model: {0}")]
    Invalid(String),
}

/// Pinhole camera with a rectangular frustum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraModel {
    /// Diagonal field of view, degrees.
    pub diagonal_fov: f64,
    /// Largest accepted angle between the patch normal and the direction to the camera, degrees.
    pub max_view_angle: f64,
    pub d_vis: f64,
    pub d_safe: f64,
    /// Image width over height.
    pub aspect_ratio: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            diagonal_fov: 94.0,
            max_view_angle: 75.0,
            d_vis: 50.0,
            d_safe: 2.0,
            aspect_ratio: 4.0 / 3.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), CameraError> {
        let bad = |m: String| Err(CameraError::Invalid(m));
        if !(self.diagonal_fov > 0.0 && self.diagonal_fov < 180.0) {
            return bad(format!("diagonal_fov must be in (0, 180), got {}", self.diagonal_fov));
        }
        if !(self.max_view_angle > 0.0 && self.max_view_angle < 90.0) {
            return bad(format!("max_view_angle must be in (0, 90), got {}", self.max_view_angle));
        }
        if !(self.d_safe > 0.0 && self.d_safe < self.d_vis) {
            return bad(format!(
                "need 0 < d_safe < d_vis, got d_safe = {} and d_vis = {}",
                self.d_safe, self.d_vis
            ));
        }
        if !(self.aspect_ratio > 0.0) || !self.aspect_ratio.is_finite() {
            return bad(format!("aspect_ratio must be positive, got {}", self.aspect_ratio));
        }
        Ok(())
    }

    /// Tangents of the horizontal and vertical half angles.
    fn half_tangents(&self) -> (f64, f64) {
        let diag = (0.5 * self.diagonal_fov).to_radians().tan();
        let norm = (self.aspect_ratio * self.aspect_ratio + 1.0).sqrt();
        (diag * self.aspect_ratio / norm, diag / norm)
    }
}

/// Camera position and unit viewing direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub view: Vec3,
}

impl Pose {
    pub fn new(position: Vec3, view: Vec3) -> Self {
        Self {
            position,
            view: view.normalize(),
        }
    }
}

/// Camera frame: right and up axes perpendicular to the view direction. World +z is up
/// unless the camera looks (nearly) vertically, then +y is used.
fn camera_frame(view: &Vec3) -> (Vec3, Vec3) {
    let up_ref = if view.z.abs() > 0.999 { Vec3::y() } else { Vec3::z() };
    let right = view.cross(&up_ref).normalize();
    let up = right.cross(view);
    (right, up)
}

/// Read-only scene data shared by all visibility queries.
#[derive(Debug, Clone)]
pub struct Scene {
    pub mesh: TriangleMesh,
    pub caster: RayCaster,
    pub patches: SurfacePatchSet,
    pub camera: CameraModel,
}

impl Scene {
    pub fn new(mesh: TriangleMesh, patches: SurfacePatchSet, camera: CameraModel) -> Self {
        let caster = RayCaster::new(&mesh);
        Self {
            mesh,
            caster,
            patches,
            camera,
        }
    }

    pub fn patch_count(&self) -> usize {
        self.patches.len()
    }

    /// Whether the straight line from `from` to the centroid of patch `k` reaches the patch
    /// without hitting other geometry first.
    pub fn unoccluded(&self, from: &Vec3, k: usize) -> bool {
        let patch = self.patches.get(k);
        let delta = patch.centroid - from;
        let range = delta.norm();
        if range <= 0.0 {
            return false;
        }
        let dir = delta / range;
        let tol = 1e-6 * range.max(1.0);
        match self.caster.ray_hit(from, &dir, range + tol) {
            None => true,
            Some(hit) => hit.triangle == patch.triangle || hit.distance >= range - tol,
        }
    }

    /// All visibility conditions for a single patch.
    pub fn sees_patch(&self, pose: &Pose, k: usize) -> bool {
        let frame = camera_frame(&pose.view);
        self.sees_patch_in_frame(pose, frame, self.camera.half_tangents(), k)
    }

    fn sees_patch_in_frame(
        &self,
        pose: &Pose,
        (right, up): (Vec3, Vec3),
        (tan_h, tan_v): (f64, f64),
        k: usize,
    ) -> bool {
        let cam = &self.camera;
        let patch = self.patches.get(k);
        let ray = patch.centroid - pose.position;
        let range = ray.norm();
        if range < cam.d_safe || range > cam.d_vis {
            return false;
        }
        let forward = ray.dot(&pose.view);
        if forward <= 0.0
            || ray.dot(&right).abs() > tan_h * forward
            || ray.dot(&up).abs() > tan_v * forward
        {
            return false;
        }
        let facing = patch.normal.dot(&ray);
        if facing >= 0.0 {
            return false;
        }
        // angle between the normal and the direction back to the camera
        if -facing / range < cam.max_view_angle.to_radians().cos() {
            return false;
        }
        self.unoccluded(&pose.position, k)
    }
}

/// Coverage of every patch from a single camera pose.
pub fn viewpoint_visibility(pose: &Pose, scene: &Scene) -> CoverageBits {
    let frame = camera_frame(&pose.view);
    let tangents = scene.camera.half_tangents();
    let mut bits = CoverageBits::zeros(scene.patch_count());
    for k in 0..scene.patch_count() {
        if scene.sees_patch_in_frame(pose, frame, tangents, k) {
            bits.set(k);
        }
    }
    bits
}

/// Spherical interpolation between unit vectors.
pub fn slerp(a: &Vec3, b: &Vec3, t: f64) -> Vec3 {
    let cos = a.dot(b).clamp(-1.0, 1.0);
    let theta = cos.acos();
    if theta < 1e-9 {
        return *a;
    }
    if std::f64::consts::PI - theta < 1e-9 {
        // antiparallel: rotate about any axis perpendicular to a
        let helper = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let axis = a.cross(&helper).normalize();
        let ang = t * std::f64::consts::PI;
        return (a * ang.cos() + axis.cross(a) * ang.sin()).normalize();
    }
    let s = theta.sin();
    ((a * ((1.0 - t) * theta).sin() + b * (t * theta).sin()) / s).normalize()
}

pub fn polyline_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Camera poses sampled along a polyline: evenly spaced by arc length, no more than
/// `spacing` apart, always including both ends. Views are interpolated spherically from
/// `start_view` to `end_view` by arc-length fraction.
pub fn path_poses(points: &[Vec3], start_view: &Vec3, end_view: &Vec3, spacing: f64) -> Vec<Pose> {
    assert!(spacing > 0.0, "pose spacing must be positive");
    assert!(!points.is_empty());
    let total = polyline_length(points);
    if total <= 0.0 {
        return vec![Pose::new(points[0], *start_view)];
    }
    let segments = (total / spacing).ceil().max(1.0) as usize;
    let mut poses = Vec::with_capacity(segments + 1);
    let mut seg = 0usize;
    let mut seg_start = 0.0;
    for i in 0..=segments {
        let s = if i == segments {
            total
        } else {
            total * i as f64 / segments as f64
        };
        let position = if i == segments {
            *points.last().unwrap()
        } else {
            loop {
                let len = (points[seg + 1] - points[seg]).norm();
                if s <= seg_start + len || seg + 2 == points.len() {
                    let f = if len > 0.0 { ((s - seg_start) / len).clamp(0.0, 1.0) } else { 0.0 };
                    break points[seg] + (points[seg + 1] - points[seg]) * f;
                }
                seg_start += len;
                seg += 1;
            }
        };
        poses.push(Pose {
            position,
            view: slerp(start_view, end_view, s / total),
        });
    }
    poses
}

/// Union of viewpoint coverage over the poses sampled along a path.
pub fn path_visibility(
    points: &[Vec3],
    start_view: &Vec3,
    end_view: &Vec3,
    scene: &Scene,
    spacing: f64,
) -> CoverageBits {
    let mut bits = CoverageBits::zeros(scene.patch_count());
    for pose in path_poses(points, start_view, end_view, spacing) {
        bits.or_assign(&viewpoint_visibility(&pose, scene));
    }
    bits
}
