use super::{GeometryError, TriangleMesh, Vec3};

/// One target surface element. Coverage bit `k` of a run always refers to patch `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePatch {
    pub centroid: Vec3,
    pub normal: Vec3,
    pub area: f64,
    /// Index of the mesh triangle the patch was cut from.
    pub triangle: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePatchSet {
    pub patches: Vec<SurfacePatch>,
    pub target_area: f64,
}

impl SurfacePatchSet {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.patches.iter().map(|p| p.area).sum()
    }

    pub fn get(&self, k: usize) -> &SurfacePatch {
        &self.patches[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &SurfacePatch> {
        self.patches.iter()
    }
}

/// Splits every triangle by recursive 4-way midpoint subdivision until each piece
/// has area at most `target_area`.
///
/// Patches are emitted triangle by triangle in depth-first child order, so the
/// indexing is a deterministic function of the mesh and `target_area`.
pub fn sample_surface_patches(
    mesh: &TriangleMesh,
    target_area: f64,
) -> Result<SurfacePatchSet, GeometryError> {
    if !(target_area > 0.0) || !target_area.is_finite() {
        return Err(GeometryError::InvalidArgument(format!(
            "target patch area must be positive, got {target_area}"
        )));
    }
    let mut patches = Vec::new();
    for t in 0..mesh.triangle_count() {
        subdivide(
            mesh.triangle(t),
            mesh.area(t),
            target_area,
            mesh.normal(t),
            t,
            &mut patches,
        );
    }
    Ok(SurfacePatchSet {
        patches,
        target_area,
    })
}

fn subdivide(
    [a, b, c]: [Vec3; 3],
    area: f64,
    target: f64,
    normal: Vec3,
    triangle: usize,
    out: &mut Vec<SurfacePatch>,
) {
    if area <= target {
        out.push(SurfacePatch {
            centroid: (a + b + c) / 3.0,
            normal,
            area,
            triangle,
        });
        return;
    }
    let ab = 0.5 * (a + b);
    let bc = 0.5 * (b + c);
    let ca = 0.5 * (c + a);
    let quarter = 0.25 * area;
    for child in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
        subdivide(child, quarter, target, normal, triangle, out);
    }
}
