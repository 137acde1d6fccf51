//! Line-oriented text serialization of a roadmap.
//!
//! ```text
//! cprm 1
//! patches <m> <target_area>
//! p <cx> <cy> <cz> <nx> <ny> <nz> <area> <triangle>        (m lines, index = order)
//! nodes <n>
//! v <id> <x> <y> <z> <vx> <vy> <vz>
//! edges <e>
//! e <id> <a> <b> <length> <k> <x1> <y1> <z1> ... <xk> <yk> <zk> <coverage-rle>
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so a load reproduces every value
//! bit for bit. Coverage uses the run-length form of [`CoverageBits::to_rle`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Cprm, CprmError, PathPrimitive, ViaPoint};
use crate::geometry::{SurfacePatch, SurfacePatchSet, Vec3};
use crate::visibility::CoverageBits;

pub const CPRM_FORMAT_VERSION: u32 = 1;

pub fn cprm_to_string(g: &Cprm) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "cprm {CPRM_FORMAT_VERSION}");
    let ps = g.patches();
    let _ = writeln!(out, "patches {} {}", ps.len(), ps.target_area);
    for p in ps.iter() {
        let (c, n) = (p.centroid, p.normal);
        let _ = writeln!(
            out,
            "p {} {} {} {} {} {} {} {}",
            c.x, c.y, c.z, n.x, n.y, n.z, p.area, p.triangle
        );
    }
    let _ = writeln!(out, "nodes {}", g.nodes().len());
    for v in g.nodes() {
        let (p, d) = (v.position, v.view);
        let _ = writeln!(out, "v {} {} {} {} {} {} {}", v.id, p.x, p.y, p.z, d.x, d.y, d.z);
    }
    let _ = writeln!(out, "edges {}", g.edges().len());
    for e in g.edges() {
        let _ = write!(out, "e {} {} {} {} {}", e.id, e.a, e.b, e.length, e.polyline.len());
        for p in &e.polyline {
            let _ = write!(out, " {} {} {}", p.x, p.y, p.z);
        }
        let _ = writeln!(out, " {}", e.coverage.to_rle());
    }
    out
}

pub fn write_cprm(g: &Cprm, path: impl AsRef<Path>) -> Result<(), CprmError> {
    let path = path.as_ref();
    fs::write(path, cprm_to_string(g)).map_err(|source| CprmError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_cprm(path: impl AsRef<Path>) -> Result<Cprm, CprmError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CprmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    cprm_from_str(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, tag: &str) -> Result<Vec<&'a str>, CprmError> {
        let (i, text) = self.inner.next().ok_or(CprmError::Parse {
            line: self.line + 1,
            msg: format!("unexpected end of file, expected '{tag}'"),
        })?;
        self.line = i + 1;
        let mut fields = text.split_whitespace();
        if fields.next() != Some(tag) {
            return Err(self.err(format!("expected '{tag}' record")));
        }
        Ok(fields.collect())
    }

    fn err(&self, msg: String) -> CprmError {
        CprmError::Parse {
            line: self.line,
            msg,
        }
    }

    fn f64(&self, s: &str) -> Result<f64, CprmError> {
        s.parse().map_err(|_| self.err(format!("bad number {s:?}")))
    }

    fn usize(&self, s: &str) -> Result<usize, CprmError> {
        s.parse().map_err(|_| self.err(format!("bad integer {s:?}")))
    }

    fn vec3(&self, f: &[&str]) -> Result<Vec3, CprmError> {
        Ok(Vec3::new(self.f64(f[0])?, self.f64(f[1])?, self.f64(f[2])?))
    }

    fn expect_len(&self, f: &[&str], n: usize) -> Result<(), CprmError> {
        if f.len() != n {
            return Err(self.err(format!("expected {n} fields, found {}", f.len())));
        }
        Ok(())
    }
}

pub fn cprm_from_str(text: &str) -> Result<Cprm, CprmError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let header = lines.next("cprm")?;
    if header != [CPRM_FORMAT_VERSION.to_string().as_str()] {
        return Err(lines.err(format!("unsupported version {header:?}")));
    }
    let f = lines.next("patches")?;
    lines.expect_len(&f, 2)?;
    let m = lines.usize(f[0])?;
    let target_area = lines.f64(f[1])?;
    let mut patches = Vec::with_capacity(m);
    for _ in 0..m {
        let f = lines.next("p")?;
        lines.expect_len(&f, 8)?;
        patches.push(SurfacePatch {
            centroid: lines.vec3(&f[0..3])?,
            normal: lines.vec3(&f[3..6])?,
            area: lines.f64(f[6])?,
            triangle: lines.usize(f[7])?,
        });
    }
    let f = lines.next("nodes")?;
    lines.expect_len(&f, 1)?;
    let n = lines.usize(f[0])?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let f = lines.next("v")?;
        lines.expect_len(&f, 7)?;
        nodes.push(ViaPoint {
            id: lines.usize(f[0])?,
            position: lines.vec3(&f[1..4])?,
            view: lines.vec3(&f[4..7])?,
        });
    }
    let f = lines.next("edges")?;
    lines.expect_len(&f, 1)?;
    let e = lines.usize(f[0])?;
    let mut edges = Vec::with_capacity(e);
    for _ in 0..e {
        let f = lines.next("e")?;
        if f.len() < 6 {
            return Err(lines.err("truncated edge record".into()));
        }
        let k = lines.usize(f[4])?;
        lines.expect_len(&f, 6 + 3 * k)?;
        let polyline = (0..k)
            .map(|i| lines.vec3(&f[5 + 3 * i..8 + 3 * i]))
            .collect::<Result<Vec<_>, _>>()?;
        let coverage = CoverageBits::from_rle(f[5 + 3 * k], m)
            .ok_or_else(|| lines.err("bad coverage run-length encoding".into()))?;
        edges.push(PathPrimitive {
            id: lines.usize(f[0])?,
            a: lines.usize(f[1])?,
            b: lines.usize(f[2])?,
            length: lines.f64(f[3])?,
            polyline,
            coverage,
        });
    }
    Cprm::new(
        nodes,
        edges,
        SurfacePatchSet {
            patches,
            target_area,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let patches = SurfacePatchSet {
            patches: vec![
                SurfacePatch {
                    centroid: Vec3::new(0.1, 1.0 / 3.0, -2.5e-7),
                    normal: Vec3::new(0.0, -0.0, 1.0),
                    area: 0.7,
                    triangle: 3,
                },
                SurfacePatch {
                    centroid: Vec3::new(std::f64::consts::PI, 2.0, 1e300),
                    normal: Vec3::new(1.0, 0.0, 0.0),
                    area: 1e-9,
                    triangle: 0,
                },
            ],
            target_area: 0.3,
        };
        let nodes = vec![
            ViaPoint {
                id: 0,
                position: Vec3::new(0.1 + 0.2, 5.0, 6.0),
                view: Vec3::new(0.6, 0.8, 0.0),
            },
            ViaPoint {
                id: 1,
                position: Vec3::new(-1.0, 2.0 / 7.0, 3.0),
                view: Vec3::new(0.0, 0.0, -1.0),
            },
        ];
        let edges = vec![PathPrimitive {
            id: 0,
            a: 0,
            b: 1,
            polyline: vec![nodes[0].position, Vec3::new(1.1, 2.2, 3.3), nodes[1].position],
            length: 12.345678901234567,
            coverage: CoverageBits::from_indices(2, [1]),
        }];
        let g = Cprm::new(nodes, edges, patches).unwrap();
        let text = cprm_to_string(&g);
        let back = cprm_from_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(cprm_to_string(&back), text);
        assert_eq!(back.nodes()[1].position.y.to_bits(), (2.0f64 / 7.0).to_bits());
    }

    #[test]
    fn rejects_corruption() {
        assert!(cprm_from_str("cprm 2\n").is_err());
        assert!(cprm_from_str("cprm 1\npatches 1 1\n").is_err());
        let text = "cprm 1\npatches 0 1\nnodes 1\nv 0 0 0 0 1 0 0\nedges 1\ne 0 0 5 1 2 0 0 0 1 1 1 0:\n";
        assert!(cprm_from_str(text).is_err());
    }
}
