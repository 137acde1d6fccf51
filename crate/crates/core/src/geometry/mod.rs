//! Mesh ingestion, surface patch sampling, voxel occupancy and ray/segment queries.

mod mesh;
mod patches;
mod raycast;
mod voxel;

pub use mesh::{TriangleMesh, DEGENERATE_AREA};
pub use patches::{sample_surface_patches, SurfacePatch, SurfacePatchSet};
pub use raycast::{intersect_triangle, RayCaster, RayHit, SELF_HIT_EPSILON};
pub use voxel::{
    dilate, fill_interior, segment_collision_free, triangle_box_overlap, voxel_subtract, voxelize,
    voxelize_with_budget, VoxelGrid, DEFAULT_CELL_BUDGET,
};

use thiserror::Error;

pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported mesh format: {0} (expected .obj or binary .stl)")]
    UnsupportedFormat(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("triangle {triangle} references vertex {index} but only {vertices} vertices exist")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        vertices: usize,
    },
    #[error("mesh has no non-degenerate triangles")]
    EmptyMesh,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("voxel grid of {cells} cells exceeds the budget of {budget} cells; increase the resolution or the budget")]
    GridTooLarge { cells: u128, budget: u128 },
    #[error("voxel grids differ in origin, resolution or dimensions")]
    GridMismatch,
    #[error("point ({x}, {y}, {z}) lies outside the voxel grid")]
    OutOfBounds { x: f64, y: f64, z: f64 },
    #[error("malformed voxel grid file: {0}")]
    BadGridFile(String),
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&mut self, other: &Aabb) {
        self.min = self.min.inf(&other.min);
        self.max = self.max.sup(&other.max);
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        0.5 * (self.min + self.max)
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }
}
