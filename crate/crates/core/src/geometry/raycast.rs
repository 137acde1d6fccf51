//! Nearest-hit ray casting against a triangle mesh through a bounding volume hierarchy.

use super::{Aabb, TriangleMesh, Vec3};

/// Hits closer than this are ignored so rays leaving a surface do not hit it again.
pub const SELF_HIT_EPSILON: f64 = 1e-6;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub triangle: usize,
}

/// Moller-Trumbore ray/triangle intersection, double sided. Returns the ray parameter.
#[inline]
pub fn intersect_triangle(origin: &Vec3, dir: &Vec3, tri: &[Vec3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&q) * inv)
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, len: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Median-split BVH over the triangles of a mesh.
///
/// Ties between equally distant triangles resolve to the lower triangle index, so the
/// result is identical to a linear scan over all triangles.
#[derive(Debug, Clone)]
pub struct RayCaster {
    triangles: Vec<[Vec3; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl RayCaster {
    pub fn new(mesh: &TriangleMesh) -> Self {
        let triangles: Vec<[Vec3; 3]> = (0..mesh.triangle_count()).map(|t| mesh.triangle(t)).collect();
        let centroids: Vec<Vec3> = triangles.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut order: Vec<usize> = (0..triangles.len()).collect();
        let mut nodes = Vec::new();
        build(&triangles, &centroids, &mut order, 0, triangles.len(), &mut nodes);
        Self {
            triangles,
            order,
            nodes,
        }
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Nearest hit with distance in `(SELF_HIT_EPSILON, max_dist]`. `dir` must be unit length.
    pub fn ray_hit(&self, origin: &Vec3, dir: &Vec3, max_dist: f64) -> Option<RayHit> {
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<RayHit> = None;
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let limit = best.map_or(max_dist, |b| b.distance);
            if !slab_hit(node.bounds(), origin, &inv, limit) {
                continue;
            }
            match *node {
                Node::Leaf { start, len, .. } => {
                    for &t in &self.order[start..start + len] {
                        if let Some(d) = intersect_triangle(origin, dir, &self.triangles[t]) {
                            if d > SELF_HIT_EPSILON && d <= max_dist {
                                let better = match best {
                                    None => true,
                                    Some(b) => d < b.distance || (d == b.distance && t < b.triangle),
                                };
                                if better {
                                    best = Some(RayHit {
                                        distance: d,
                                        triangle: t,
                                    });
                                }
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }
}

fn slab_hit(bb: &Aabb, origin: &Vec3, inv: &Vec3, limit: f64) -> bool {
    let mut t0 = 0.0f64;
    let mut t1 = limit;
    for a in 0..3 {
        let pad = 1e-9 * (1.0 + bb.max[a].abs().max(bb.min[a].abs()));
        let lo = bb.min[a] - pad;
        let hi = bb.max[a] + pad;
        if inv[a].is_infinite() {
            if origin[a] < lo || origin[a] > hi {
                return false;
            }
            continue;
        }
        let mut ta = (lo - origin[a]) * inv[a];
        let mut tb = (hi - origin[a]) * inv[a];
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 > t1 {
            return false;
        }
    }
    true
}

fn build(
    triangles: &[[Vec3; 3]],
    centroids: &[Vec3],
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut bounds = Aabb::empty();
    for &t in &order[start..end] {
        for p in &triangles[t] {
            bounds.grow(p);
        }
    }
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            bounds,
            start,
            len: end - start,
        });
        return id;
    }
    let mut cb = Aabb::empty();
    for &t in &order[start..end] {
        cb.grow(&centroids[t]);
    }
    let ext = cb.extent();
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    let mid = start + (end - start) / 2;
    order[start..end].sort_by(|&a, &b| {
        centroids[a][axis]
            .total_cmp(&centroids[b][axis])
            .then(a.cmp(&b))
    });
    nodes.push(Node::Leaf {
        bounds,
        start,
        len: 0,
    });
    let left = build(triangles, centroids, order, start, mid, nodes);
    let right = build(triangles, centroids, order, mid, end, nodes);
    nodes[id] = Node::Inner {
        bounds,
        left,
        right,
    };
    id
}
