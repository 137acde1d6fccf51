use std::collections::VecDeque;
use std::fmt::Write as _;

use super::{GeometryError, TriangleMesh, Vec3};

/// Default refusal threshold for grid allocation.
pub const DEFAULT_CELL_BUDGET: u128 = 50_000_000;

/// Binary occupancy grid. Cell `(i, j, k)` spans `origin + [i, i+1) * resolution` on x
/// (likewise y, z); the linear index is `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    origin: Vec3,
    resolution: f64,
    dims: [usize; 3],
    cells: Vec<bool>,
}

impl VoxelGrid {
    pub fn empty(origin: Vec3, resolution: f64, dims: [usize; 3]) -> Self {
        assert!(resolution > 0.0 && dims.iter().all(|&d| d > 0));
        Self {
            origin,
            resolution,
            dims,
            cells: vec![false; dims[0] * dims[1] * dims[2]],
        }
    }

    /// Same layout as `self`, every cell clear.
    pub fn cleared(&self) -> Self {
        Self::empty(self.origin, self.resolution, self.dims)
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn max_corner(&self) -> Vec3 {
        self.origin
            + Vec3::new(
                self.dims[0] as f64,
                self.dims[1] as f64,
                self.dims[2] as f64,
            ) * self.resolution
    }

    pub fn same_layout(&self, other: &VoxelGrid) -> bool {
        self.origin == other.origin
            && self.resolution == other.resolution
            && self.dims == other.dims
    }

    #[inline]
    pub fn index(&self, [i, j, k]: [usize; 3]) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn get(&self, c: [usize; 3]) -> bool {
        self.cells[self.index(c)]
    }

    #[inline]
    pub fn get_index(&self, idx: usize) -> bool {
        self.cells[idx]
    }

    pub fn set(&mut self, c: [usize; 3], value: bool) {
        let idx = self.index(c);
        self.cells[idx] = value;
    }

    pub fn cell_center(&self, [i, j, k]: [usize; 3]) -> Vec3 {
        self.origin
            + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * self.resolution
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        let tol = 1e-9 * self.resolution;
        let hi = self.max_corner();
        (0..3).all(|a| p[a] >= self.origin[a] - tol && p[a] <= hi[a] + tol)
    }

    /// Cell containing `p`; points on the upper boundary map to the last cell.
    pub fn world_to_cell(&self, p: &Vec3) -> Option<[usize; 3]> {
        if !self.contains_point(p) {
            return None;
        }
        let mut c = [0usize; 3];
        for a in 0..3 {
            let u = ((p[a] - self.origin[a]) / self.resolution).floor();
            c[a] = (u.max(0.0) as usize).min(self.dims[a] - 1);
        }
        Some(c)
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn occupied_indices(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn union(&self, other: &VoxelGrid) -> Result<VoxelGrid, GeometryError> {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &VoxelGrid) -> Result<VoxelGrid, GeometryError> {
        self.zip(other, |a, b| a && b)
    }

    /// True when every occupied cell of `self` is occupied in `other`.
    pub fn is_subset_of(&self, other: &VoxelGrid) -> Result<bool, GeometryError> {
        if !self.same_layout(other) {
            return Err(GeometryError::GridMismatch);
        }
        Ok(self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b))
    }

    fn zip(
        &self,
        other: &VoxelGrid,
        op: impl Fn(bool, bool) -> bool,
    ) -> Result<VoxelGrid, GeometryError> {
        if !self.same_layout(other) {
            return Err(GeometryError::GridMismatch);
        }
        Ok(VoxelGrid {
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(&a, &b)| op(a, b))
                .collect(),
            ..self.cleared()
        })
    }

    /// Plain-text dump: header lines followed by run-length encoded occupancy in
    /// linear index order, starting with the value of the first run.
    pub fn to_text(&self) -> String {
        let mut out = String::from("voxelgrid 1\n");
        let o = self.origin;
        let _ = writeln!(out, "origin {} {} {}", o.x, o.y, o.z);
        let _ = writeln!(out, "resolution {}", self.resolution);
        let [nx, ny, nz] = self.dims;
        let _ = writeln!(out, "dims {nx} {ny} {nz}");
        out.push_str("occupancy ");
        out.push(if self.cells[0] { '1' } else { '0' });
        let mut run = 0usize;
        let mut current = self.cells[0];
        for &c in &self.cells {
            if c == current {
                run += 1;
            } else {
                let _ = write!(out, " {run}");
                current = c;
                run = 1;
            }
        }
        let _ = writeln!(out, " {run}");
        out
    }

    pub fn from_text(text: &str) -> Result<VoxelGrid, GeometryError> {
        let bad = |m: &str| GeometryError::BadGridFile(m.to_string());
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("voxelgrid 1") {
            return Err(bad("missing 'voxelgrid 1' header"));
        }
        let mut field = |name: &str| -> Result<Vec<String>, GeometryError> {
            let line = lines.next().ok_or_else(|| bad("truncated header"))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(name) {
                return Err(bad(&format!("expected '{name}' line")));
            }
            Ok(parts.map(str::to_string).collect())
        };
        let num = |s: &String| s.parse::<f64>().map_err(|_| bad("bad number"));
        let o = field("origin")?;
        let r = field("resolution")?;
        let d = field("dims")?;
        let occ = field("occupancy")?;
        if o.len() != 3 || r.len() != 1 || d.len() != 3 || occ.is_empty() {
            return Err(bad("wrong field count"));
        }
        let origin = Vec3::new(num(&o[0])?, num(&o[1])?, num(&o[2])?);
        let resolution = num(&r[0])?;
        let dims: Vec<usize> = d
            .iter()
            .map(|s| s.parse::<usize>().map_err(|_| bad("bad dimension")))
            .collect::<Result<_, _>>()?;
        if !(resolution > 0.0) || dims.iter().any(|&x| x == 0) {
            return Err(bad("non-positive resolution or dimension"));
        }
        let mut value = match occ[0].as_str() {
            "0" => false,
            "1" => true,
            _ => return Err(bad("run value must be 0 or 1")),
        };
        let total = dims[0] * dims[1] * dims[2];
        let mut cells = Vec::with_capacity(total);
        for run in &occ[1..] {
            let n: usize = run.parse().map_err(|_| bad("bad run length"))?;
            cells.extend(std::iter::repeat(value).take(n));
            value = !value;
        }
        if cells.len() != total {
            return Err(bad("run lengths do not sum to the cell count"));
        }
        Ok(VoxelGrid {
            origin,
            resolution,
            dims: [dims[0], dims[1], dims[2]],
            cells,
        })
    }
}

/// Conservative separating-axis test between a triangle and an axis-aligned box.
/// Touching counts as overlap.
pub fn triangle_box_overlap(center: &Vec3, half: f64, tri: &[Vec3; 3]) -> bool {
    let eps = 1e-9 * half.max(1e-12);
    let v = tri.map(|p| p - center);
    let edges = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
    let separated = |axis: &Vec3| -> bool {
        if axis.norm_squared() < 1e-24 {
            return false;
        }
        let p = v.map(|x| x.dot(axis));
        let lo = p[0].min(p[1]).min(p[2]);
        let hi = p[0].max(p[1]).max(p[2]);
        let r = half * (axis.x.abs() + axis.y.abs() + axis.z.abs());
        let tol = eps * (axis.x.abs() + axis.y.abs() + axis.z.abs());
        lo > r + tol || hi < -r - tol
    };
    let unit = [Vec3::x(), Vec3::y(), Vec3::z()];
    if unit.iter().any(|a| separated(a)) {
        return false;
    }
    if separated(&edges[0].cross(&edges[1])) {
        return false;
    }
    for u in &unit {
        for e in &edges {
            if separated(&u.cross(e)) {
                return false;
            }
        }
    }
    true
}

/// Surface occupancy: a cell is occupied iff it overlaps some triangle. The grid spans
/// the mesh bounding box grown by `padding` on every side.
pub fn voxelize(
    mesh: &TriangleMesh,
    resolution: f64,
    padding: f64,
) -> Result<VoxelGrid, GeometryError> {
    voxelize_with_budget(mesh, resolution, padding, DEFAULT_CELL_BUDGET)
}

pub fn voxelize_with_budget(
    mesh: &TriangleMesh,
    resolution: f64,
    padding: f64,
    budget: u128,
) -> Result<VoxelGrid, GeometryError> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(GeometryError::InvalidArgument(format!(
            "voxel resolution must be positive, got {resolution}"
        )));
    }
    if !(padding >= 0.0) {
        return Err(GeometryError::InvalidArgument(format!(
            "padding must be non-negative, got {padding}"
        )));
    }
    let bb = mesh.aabb();
    let origin = bb.min - Vec3::repeat(padding);
    let ext = bb.extent() + Vec3::repeat(2.0 * padding);
    let mut dims = [0usize; 3];
    let mut cells: u128 = 1;
    for a in 0..3 {
        let n = (ext[a] / resolution).ceil().max(1.0);
        if !n.is_finite() || n > 1e12 {
            return Err(GeometryError::GridTooLarge {
                cells: u128::MAX,
                budget,
            });
        }
        dims[a] = n as usize;
        cells *= dims[a] as u128;
    }
    if cells > budget {
        return Err(GeometryError::GridTooLarge { cells, budget });
    }
    let mut grid = VoxelGrid::empty(origin, resolution, dims);
    let half = 0.5 * resolution;
    for t in 0..mesh.triangle_count() {
        let tri = mesh.triangle(t);
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..3 {
            let mn = tri.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min);
            let mx = tri.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max);
            let l = ((mn - origin[a]) / resolution - 1e-6).floor().max(0.0) as usize;
            let h = ((mx - origin[a]) / resolution + 1e-6).floor().max(0.0) as usize;
            lo[a] = l.min(dims[a] - 1);
            hi[a] = h.min(dims[a] - 1);
        }
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    let c = [i, j, k];
                    let idx = grid.index(c);
                    if !grid.cells[idx] && triangle_box_overlap(&grid.cell_center(c), half, &tri)
                    {
                        grid.cells[idx] = true;
                    }
                }
            }
        }
    }
    Ok(grid)
}

/// Marks every empty cell that is not 6-connected to the grid boundary through empty
/// cells, turning a closed surface shell into a solid.
pub fn fill_interior(grid: &VoxelGrid) -> VoxelGrid {
    let [nx, ny, nz] = grid.dims;
    let mut outside = vec![false; grid.cells.len()];
    let mut queue = VecDeque::new();
    for idx in 0..grid.cells.len() {
        let [i, j, k] = grid.coords(idx);
        let boundary = i == 0 || j == 0 || k == 0 || i + 1 == nx || j + 1 == ny || k + 1 == nz;
        if boundary && !grid.cells[idx] {
            outside[idx] = true;
            queue.push_back(idx);
        }
    }
    while let Some(idx) = queue.pop_front() {
        let c = grid.coords(idx);
        for (axis, delta) in [(0, -1i64), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)] {
            let n = c[axis] as i64 + delta;
            if n < 0 || n >= grid.dims[axis] as i64 {
                continue;
            }
            let mut nc = c;
            nc[axis] = n as usize;
            let nidx = grid.index(nc);
            if !grid.cells[nidx] && !outside[nidx] {
                outside[nidx] = true;
                queue.push_back(nidx);
            }
        }
    }
    VoxelGrid {
        cells: outside.iter().map(|&o| !o).collect(),
        ..grid.cleared()
    }
}

const FAR: f64 = 1e30;

/// Squared Euclidean distance transform of a sampled function along one line
/// (lower envelope of parabolas).
fn distance_transform_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        loop {
            let p = v[k];
            let pf = p as f64;
            let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf);
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let d = qf - v[k] as f64;
        *slot = d * d + f[v[k]];
    }
}

/// Squared distance (in cell units) from every cell center to the nearest occupied cell center.
fn squared_distance_field(grid: &VoxelGrid) -> Vec<f64> {
    let dims = grid.dims;
    let mut field: Vec<f64> = grid
        .cells
        .iter()
        .map(|&c| if c { 0.0 } else { FAR })
        .collect();
    let longest = dims.iter().copied().max().unwrap();
    let mut line = vec![0.0; longest];
    let mut out = vec![0.0; longest];
    let mut v = vec![0usize; longest];
    let mut z = vec![0.0; longest + 1];
    for axis in 0..3 {
        let n = dims[axis];
        let stride = match axis {
            0 => 1,
            1 => dims[0],
            _ => dims[0] * dims[1],
        };
        let (oa, ob) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for b in 0..dims[ob] {
            for a in 0..dims[oa] {
                let mut c = [0usize; 3];
                c[oa] = a;
                c[ob] = b;
                let start = grid.index(c);
                for q in 0..n {
                    line[q] = field[start + q * stride];
                }
                distance_transform_1d(&line[..n], &mut out[..n], &mut v, &mut z);
                for q in 0..n {
                    field[start + q * stride] = out[q].min(FAR);
                }
            }
        }
    }
    field
}

/// Binary dilation by a Euclidean ball: a cell is occupied in the output iff some
/// occupied input cell center lies within `radius` of its center.
pub fn dilate(grid: &VoxelGrid, radius: f64) -> VoxelGrid {
    assert!(radius >= 0.0, "dilation radius must be non-negative");
    if radius == 0.0 || grid.is_empty() {
        return grid.clone();
    }
    let r = radius / grid.resolution;
    let limit = r * r + 1e-9;
    let field = squared_distance_field(grid);
    VoxelGrid {
        cells: field.iter().map(|&d| d <= limit).collect(),
        ..grid.cleared()
    }
}

/// Cells occupied in `a` and clear in `b`.
pub fn voxel_subtract(a: &VoxelGrid, b: &VoxelGrid) -> Result<VoxelGrid, GeometryError> {
    a.zip(b, |x, y| x && !y)
}

/// Walks the cells pierced by segment `p0`-`p1` (3D DDA) and reports whether none is occupied.
/// When the segment crosses an edge or corner exactly, both neighbouring cells are visited.
pub fn segment_collision_free(
    grid: &VoxelGrid,
    p0: &Vec3,
    p1: &Vec3,
) -> Result<bool, GeometryError> {
    for p in [p0, p1] {
        if !grid.contains_point(p) {
            return Err(GeometryError::OutOfBounds {
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
    }
    let start = grid.world_to_cell(p0).unwrap();
    let end = grid.world_to_cell(p1).unwrap();
    let u0 = (p0 - grid.origin) / grid.resolution;
    let u1 = (p1 - grid.origin) / grid.resolution;
    let d = u1 - u0;
    let mut cell = [start[0] as i64, start[1] as i64, start[2] as i64];
    let mut step = [0i64; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    for a in 0..3 {
        if d[a] > 0.0 {
            step[a] = 1;
            t_max[a] = ((cell[a] + 1) as f64 - u0[a]) / d[a];
            t_delta[a] = 1.0 / d[a];
        } else if d[a] < 0.0 {
            step[a] = -1;
            t_max[a] = (cell[a] as f64 - u0[a]) / d[a];
            t_delta[a] = -1.0 / d[a];
        }
    }
    let end = [end[0] as i64, end[1] as i64, end[2] as i64];
    let dims = grid.dims.map(|x| x as i64);
    loop {
        let c = [cell[0] as usize, cell[1] as usize, cell[2] as usize];
        if grid.get(c) {
            return Ok(false);
        }
        if cell == end {
            return Ok(true);
        }
        let mut axis = 0;
        for a in 1..3 {
            if t_max[a] < t_max[axis] {
                axis = a;
            }
        }
        if t_max[axis] > 1.0 {
            return Ok(true);
        }
        cell[axis] += step[axis];
        if cell[axis] < 0 || cell[axis] >= dims[axis] {
            return Ok(true);
        }
        t_max[axis] += t_delta[axis];
    }
}
