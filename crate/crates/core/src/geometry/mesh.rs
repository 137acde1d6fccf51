use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Aabb, GeometryError, Vec3};

/// Triangles with an area at or below this are treated as degenerate and dropped at load time.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// An indexed triangle mesh with per-triangle unit normals.
///
/// Normals follow the winding order (counter-clockwise seen from outside).
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
    dropped: usize,
}

impl TriangleMesh {
    /// Builds a mesh, dropping zero-area triangles.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        let mut kept = Vec::with_capacity(triangles.len());
        let mut normals = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        let mut dropped = 0;
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(GeometryError::IndexOutOfRange {
                    triangle: t,
                    index: bad,
                    vertices: vertices.len(),
                });
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            let cross = (b - a).cross(&(c - a));
            let twice_area = cross.norm();
            if !(0.5 * twice_area > DEGENERATE_AREA) {
                dropped += 1;
                continue;
            }
            kept.push(*tri);
            normals.push(cross / twice_area);
            areas.push(0.5 * twice_area);
        }
        if kept.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        Ok(Self {
            vertices,
            triangles: kept,
            normals,
            areas,
            dropped,
        })
    }

    /// Loads an ASCII OBJ (`.obj`) or binary STL (`.stl`) file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GeometryError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| GeometryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        let (vertices, triangles) = match ext.as_deref() {
            Some("obj") => parse_obj(&String::from_utf8_lossy(&bytes))?,
            Some("stl") => parse_binary_stl(&bytes)?,
            _ => {
                return Err(GeometryError::UnsupportedFormat(
                    path.display().to_string(),
                ))
            }
        };
        Self::new(vertices, triangles)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Number of degenerate triangles removed when the mesh was built.
    pub fn dropped_degenerate(&self) -> usize {
        self.dropped
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn normal(&self, t: usize) -> Vec3 {
        self.normals[t]
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn surface_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Bounding box of the vertices referenced by kept triangles.
    pub fn aabb(&self) -> Aabb {
        let mut bb = Aabb::empty();
        for tri in &self.triangles {
            for &i in tri {
                bb.grow(&self.vertices[i]);
            }
        }
        bb
    }

    /// Serializes the mesh as ASCII OBJ.
    pub fn to_obj_string(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }

    pub fn write_obj(&self, path: impl AsRef<Path>) -> Result<(), GeometryError> {
        let path = path.as_ref();
        fs::write(path, self.to_obj_string()).map_err(|source| GeometryError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Serializes the mesh as binary STL (one facet per triangle).
    pub fn to_binary_stl(&self) -> Vec<u8> {
        let mut out = vec![0u8; 80];
        out.extend_from_slice(&(self.triangles.len() as u32).to_le_bytes());
        for (t, tri) in self.triangles.iter().enumerate() {
            let n = self.normals[t];
            for c in [n.x, n.y, n.z] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
            for &i in tri {
                let v = self.vertices[i];
                for c in [v.x, v.y, v.z] {
                    out.extend_from_slice(&(c as f32).to_le_bytes());
                }
            }
            out.extend_from_slice(&0u16.to_le_bytes());
        }
        out
    }
}

type RawMesh = (Vec<Vec3>, Vec<[usize; 3]>);

fn parse_obj(text: &str) -> Result<RawMesh, GeometryError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let mut fields = line.split_whitespace();
        let parse_err = |msg: String| GeometryError::Parse {
            line: lineno + 1,
            msg,
        };
        match fields.next() {
            Some("v") => {
                let coords: Vec<f64> = fields
                    .take(3)
                    .map(|f| f.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| parse_err(format!("bad vertex coordinate: {e}")))?;
                if coords.len() != 3 {
                    return Err(parse_err("vertex needs 3 coordinates".into()));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for f in fields {
                    let first = f.split('/').next().unwrap_or("");
                    let raw: i64 = first
                        .parse()
                        .map_err(|e| parse_err(format!("bad face index {f:?}: {e}")))?;
                    let resolved = if raw > 0 {
                        raw - 1
                    } else if raw < 0 {
                        vertices.len() as i64 + raw
                    } else {
                        return Err(parse_err("face index 0 is invalid".into()));
                    };
                    if resolved < 0 {
                        return Err(parse_err(format!("face index {raw} out of range")));
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(parse_err("face needs at least 3 vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok((vertices, triangles))
}

fn parse_binary_stl(bytes: &[u8]) -> Result<RawMesh, GeometryError> {
    let bad = |msg: &str| GeometryError::Parse {
        line: 0,
        msg: msg.to_string(),
    };
    if bytes.len() < 84 {
        return Err(bad("binary STL shorter than its header"));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() != 84 + 50 * count {
        return Err(bad("binary STL size does not match its facet count"));
    }
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(count);
    let mut welded: HashMap<[u32; 3], usize> = HashMap::new();
    let read_f32 = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    for f in 0..count {
        let base = 84 + 50 * f + 12;
        let mut tri = [0usize; 3];
        for (corner, slot) in tri.iter_mut().enumerate() {
            let off = base + 12 * corner;
            let xyz = [read_f32(off), read_f32(off + 4), read_f32(off + 8)];
            let key = xyz.map(f32::to_bits);
            *slot = *welded.entry(key).or_insert_with(|| {
                vertices.push(Vec3::new(xyz[0] as f64, xyz[1] as f64, xyz[2] as f64));
                vertices.len() - 1
            });
        }
        triangles.push(tri);
    }
    Ok((vertices, triangles))
}
