//! Synthetic closed-surface structures used as fixtures and demos.

use std::collections::HashMap;

use crate::geometry::{TriangleMesh, Vec3};

/// A generated mesh together with the triangle count the generator promises.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub name: &'static str,
    pub mesh: TriangleMesh,
    pub declared_triangles: usize,
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Vec3>,
    lookup: HashMap<[u64; 3], usize>,
    triangles: Vec<[usize; 3]>,
}

impl Builder {
    fn vertex(&mut self, p: Vec3) -> usize {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        *self.lookup.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            self.vertices.len() - 1
        })
    }

    /// Planar quad `a b c d` (in boundary order) split along `a-c`, wound so the normal
    /// agrees with `outward`.
    fn quad(&mut self, [a, b, c, d]: [Vec3; 4], outward: Vec3) {
        let flip = (b - a).cross(&(c - a)).dot(&outward) < 0.0;
        let ids = [a, b, c, d].map(|p| self.vertex(p));
        if flip {
            self.triangles.push([ids[0], ids[2], ids[1]]);
            self.triangles.push([ids[0], ids[3], ids[2]]);
        } else {
            self.triangles.push([ids[0], ids[1], ids[2]]);
            self.triangles.push([ids[0], ids[2], ids[3]]);
        }
    }

    fn cuboid_faces(&mut self, lo: Vec3, hi: Vec3, skip_x: bool) {
        let p = |x: f64, y: f64, z: f64| Vec3::new(x, y, z);
        let (x0, y0, z0, x1, y1, z1) = (lo.x, lo.y, lo.z, hi.x, hi.y, hi.z);
        self.quad([p(x0, y0, z0), p(x1, y0, z0), p(x1, y1, z0), p(x0, y1, z0)], -Vec3::z());
        self.quad([p(x0, y0, z1), p(x1, y0, z1), p(x1, y1, z1), p(x0, y1, z1)], Vec3::z());
        self.quad([p(x0, y0, z0), p(x1, y0, z0), p(x1, y0, z1), p(x0, y0, z1)], -Vec3::y());
        self.quad([p(x0, y1, z0), p(x1, y1, z0), p(x1, y1, z1), p(x0, y1, z1)], Vec3::y());
        if !skip_x {
            self.quad([p(x0, y0, z0), p(x0, y1, z0), p(x0, y1, z1), p(x0, y0, z1)], -Vec3::x());
            self.quad([p(x1, y0, z0), p(x1, y1, z0), p(x1, y1, z1), p(x1, y0, z1)], Vec3::x());
        }
    }

    fn finish(self, name: &'static str, declared: usize) -> SyntheticScene {
        let mesh = TriangleMesh::new(self.vertices, self.triangles)
            .expect("generator produced a degenerate mesh");
        SyntheticScene {
            name,
            mesh,
            declared_triangles: declared,
        }
    }
}

/// Axis-aligned closed box, 12 triangles.
pub fn box_scene(lo: Vec3, hi: Vec3) -> SyntheticScene {
    let mut b = Builder::default();
    b.cuboid_faces(lo, hi, false);
    b.finish("box", 12)
}

/// Square ring-shaped building around an open courtyard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CourtyardSpec {
    pub outer: f64,
    pub courtyard: f64,
    pub height: f64,
}

impl Default for CourtyardSpec {
    fn default() -> Self {
        Self {
            outer: 24.0,
            courtyard: 10.0,
            height: 8.0,
        }
    }
}

/// Ring building: 4 outer walls, 4 courtyard walls, roof ring and floor ring, 32 triangles.
pub fn courtyard_building(spec: &CourtyardSpec) -> SyntheticScene {
    assert!(spec.courtyard > 0.0 && spec.courtyard < spec.outer && spec.height > 0.0);
    let w = spec.outer;
    let a = 0.5 * (spec.outer - spec.courtyard);
    let c = a + spec.courtyard;
    let h = spec.height;
    let outer = [(0.0, 0.0), (w, 0.0), (w, w), (0.0, w)];
    let inner = [(a, a), (c, a), (c, c), (a, c)];
    let mid = Vec3::new(0.5 * w, 0.5 * w, 0.0);
    let p = |(x, y): (f64, f64), z: f64| Vec3::new(x, y, z);
    let mut b = Builder::default();
    for s in 0..4 {
        let n = (s + 1) % 4;
        let edge_mid = 0.5 * (p(outer[s], 0.0) + p(outer[n], 0.0));
        let out_dir = (edge_mid - mid).normalize();
        b.quad([p(outer[s], 0.0), p(outer[n], 0.0), p(outer[n], h), p(outer[s], h)], out_dir);
        let inner_mid = 0.5 * (p(inner[s], 0.0) + p(inner[n], 0.0));
        let in_dir = (mid - inner_mid).normalize();
        b.quad([p(inner[s], 0.0), p(inner[n], 0.0), p(inner[n], h), p(inner[s], h)], in_dir);
        b.quad([p(outer[s], h), p(outer[n], h), p(inner[n], h), p(inner[s], h)], Vec3::z());
        b.quad([p(outer[s], 0.0), p(outer[n], 0.0), p(inner[n], 0.0), p(inner[s], 0.0)], -Vec3::z());
    }
    b.finish("courtyard", 32)
}

/// Two square towers joined by an enclosed sky bridge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwinTowerSpec {
    pub footprint: f64,
    pub gap: f64,
    pub height: f64,
    pub bridge_width: f64,
    pub bridge_bottom: f64,
    pub bridge_top: f64,
}

impl Default for TwinTowerSpec {
    fn default() -> Self {
        Self {
            footprint: 10.0,
            gap: 12.0,
            height: 30.0,
            bridge_width: 4.0,
            bridge_bottom: 18.0,
            bridge_top: 22.0,
        }
    }
}

/// Towers are closed boxes (12 triangles each); the bridge is an open tube whose ends
/// sit flush on the tower walls (8 triangles), 32 in total.
pub fn twin_towers(spec: &TwinTowerSpec) -> SyntheticScene {
    let f = spec.footprint;
    let mut b = Builder::default();
    b.cuboid_faces(Vec3::zeros(), Vec3::new(f, f, spec.height), false);
    let x2 = f + spec.gap;
    b.cuboid_faces(Vec3::new(x2, 0.0, 0.0), Vec3::new(x2 + f, f, spec.height), false);
    let y0 = 0.5 * (f - spec.bridge_width);
    b.cuboid_faces(
        Vec3::new(f, y0, spec.bridge_bottom),
        Vec3::new(x2, y0 + spec.bridge_width, spec.bridge_top),
        true,
    );
    b.finish("twin-towers", 32)
}

/// Looks a generator up by name with default dimensions.
pub fn by_name(name: &str) -> Option<SyntheticScene> {
    match name {
        "box" => Some(box_scene(Vec3::zeros(), Vec3::new(10.0, 10.0, 10.0))),
        "courtyard" => Some(courtyard_building(&CourtyardSpec::default())),
        "twin-towers" => Some(twin_towers(&TwinTowerSpec::default())),
        _ => None,
    }
}
