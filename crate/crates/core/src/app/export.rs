use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;

use super::write_file;
use crate::cprm::Cprm;
use crate::geometry::{TriangleMesh, Vec3};
use crate::solver::Route;

/// Diffuse colours for the first agents; later agents get generated hues.
pub const PALETTE: [[f64; 3]; 8] = [
    [0.90, 0.10, 0.10],
    [0.10, 0.45, 0.90],
    [0.10, 0.70, 0.20],
    [0.95, 0.60, 0.05],
    [0.60, 0.20, 0.80],
    [0.05, 0.75, 0.75],
    [0.85, 0.20, 0.60],
    [0.55, 0.40, 0.15],
];

pub struct SceneExport {
    pub obj: String,
    pub mtl: String,
}

fn agent_color(k: usize) -> [f64; 3] {
    if let Some(c) = PALETTE.get(k) {
        return *c;
    }
    // golden-angle hue walk, full saturation
    let h = (k as f64 * 0.618_033_988_749_895).fract() * 6.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    match h as usize {
        0 => [1.0, x, 0.0],
        1 => [x, 1.0, 0.0],
        2 => [0.0, 1.0, x],
        3 => [0.0, x, 1.0],
        4 => [x, 0.0, 1.0],
        _ => [1.0, 0.0, x],
    }
}

/// The flown polyline of a walk: each edge's path in travel direction, joints shared.
pub fn route_polyline(cprm: &Cprm, route: &Route) -> Vec<Vec3> {
    let mut pts: Vec<Vec3> = Vec::new();
    for (i, &e) in route.edges.iter().enumerate() {
        let seg = cprm.edges()[e].polyline_from(route.nodes[i]);
        let skip = usize::from(!pts.is_empty());
        pts.extend(seg.into_iter().skip(skip));
    }
    pts
}

/// Wavefront OBJ of the structure plus one coloured line group per non-empty walk.
pub fn export_scene(mesh: &TriangleMesh, cprm: &Cprm, routes: &[Route], mtl_name: &str) -> SceneExport {
    let mut obj = String::new();
    let mut mtl = String::new();
    let _ = writeln!(obj, "mtllib {mtl_name}");
    let _ = writeln!(obj, "o structure");
    for v in mesh.vertices() {
        let _ = writeln!(obj, "v {} {} {}", v.x, v.y, v.z);
    }
    let _ = writeln!(obj, "g structure");
    let _ = writeln!(obj, "usemtl structure");
    for t in mesh.triangles() {
        let _ = writeln!(obj, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    let _ = writeln!(mtl, "newmtl structure\nKd 0.7 0.7 0.7\n");

    let mut next = mesh.vertices().len() + 1;
    for (k, r) in routes.iter().enumerate() {
        if r.edges.is_empty() {
            continue;
        }
        let pts = route_polyline(cprm, r);
        let [cr, cg, cb] = agent_color(k);
        let _ = writeln!(mtl, "newmtl agent_{k}\nKd {cr} {cg} {cb}\n");
        let _ = writeln!(obj, "o agent_{k}");
        for p in &pts {
            let _ = writeln!(obj, "v {} {} {}", p.x, p.y, p.z);
        }
        let _ = writeln!(obj, "g agent_{k}");
        let _ = writeln!(obj, "usemtl agent_{k}");
        let idx: Vec<String> = (next..next + pts.len()).map(|i| i.to_string()).collect();
        let _ = writeln!(obj, "l {}", idx.join(" "));
        next += pts.len();
    }
    SceneExport { obj, mtl }
}

/// Writes `<name>.obj` and the matching `.mtl` next to it.
pub fn write_scene_files(
    obj_path: &Path,
    mesh: &TriangleMesh,
    cprm: &Cprm,
    routes: &[Route],
) -> Result<()> {
    let mtl_path = obj_path.with_extension("mtl");
    let mtl_name = mtl_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scene.mtl".into());
    let export = export_scene(mesh, cprm, routes, &mtl_name);
    write_file(obj_path, export.obj)?;
    write_file(&mtl_path, export.mtl)
}
