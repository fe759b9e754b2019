//! Local refinement of a mesh around a perforation layout.

use super::bisect::Bisector;
use super::layout::{ElementShape, PerforationLayout};
use super::mesh::Mesh;
use super::primitives::{
    dist, orient, point_segment_distance, point_triangle_distance, segment_triangle_distance, Point,
};
use super::square::DEFAULT_MAX_VERTICES;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    /// Edges touching an element are at most `delta / resolve_factor`.
    pub resolve_factor: f64,
    /// Growth of the target size with distance from the nearest element.
    pub grading: f64,
    pub max_vertices: usize,
    /// Move the closest vertices onto segment endpoints and disk rims.
    pub snap: bool,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            resolve_factor: 4.0,
            grading: 0.3,
            max_vertices: DEFAULT_MAX_VERTICES,
            snap: true,
        }
    }
}

fn shape_triangle_distance(shape: &ElementShape, tri: &[Point; 3]) -> f64 {
    match *shape {
        ElementShape::Segment { a, b } => segment_triangle_distance(a, b, tri),
        ElementShape::Disk { center, radius } => (point_triangle_distance(center, tri) - radius).max(0.0),
    }
}

/// Uniform bucket grid over element bounding boxes.
struct ElementGrid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl ElementGrid {
    fn new(shapes: &[ElementShape], cell: f64) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for s in shapes {
            let (a, b) = s.bounds();
            for k in 0..2 {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(b[k]);
            }
        }
        let nx = (((hi[0] - lo[0]) / cell).floor() as usize + 1).min(4096);
        let ny = (((hi[1] - lo[1]) / cell).floor() as usize + 1).min(4096);
        let mut g = Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        };
        for (i, s) in shapes.iter().enumerate() {
            let (a, b) = s.bounds();
            let (i0, j0) = g.index(a);
            let (i1, j1) = g.index(b);
            for j in j0..=j1 {
                for ii in i0..=i1 {
                    g.buckets[j * nx + ii].push(i);
                }
            }
        }
        g
    }

    fn index(&self, p: Point) -> (usize, usize) {
        let f = |v: f64, o: f64, n: usize| (((v - o) / self.cell).floor().max(0.0) as usize).min(n - 1);
        (f(p[0], self.origin[0], self.nx), f(p[1], self.origin[1], self.ny))
    }

    fn candidates(&self, lo: Point, hi: Point, out: &mut Vec<usize>) {
        out.clear();
        let (i0, j0) = self.index(lo);
        let (i1, j1) = self.index(hi);
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend_from_slice(&self.buckets[j * self.nx + i]);
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

/// Refines `mesh` so that edges near every element are at most
/// `delta / r`, growing linearly away from the elements, then snaps vertices
/// onto element boundaries.
pub fn conforming_refine_to_layout(mesh: &Mesh, layout: &PerforationLayout, opts: &RefineOptions) -> Result<Mesh> {
    if !(opts.resolve_factor >= 2.0) {
        return Err(Error::invalid(format!(
            "resolve factor must be at least 2, got {}",
            opts.resolve_factor
        )));
    }
    if !(opts.grading > 0.0) {
        return Err(Error::invalid("grading must be positive"));
    }
    if layout.is_empty() {
        return Ok(mesh.clone());
    }
    let shapes: Vec<ElementShape> = layout.elements.iter().map(|e| e.shape).collect();
    let sizes: Vec<f64> = layout.elements.iter().map(|e| e.extent / opts.resolve_factor).collect();
    let h_max = mesh.max_edge_length();
    let h_min = sizes.iter().cloned().fold(f64::INFINITY, f64::min);
    let reach = ((h_max - h_min) / opts.grading).max(h_min);
    let grid = ElementGrid::new(&shapes, reach);

    let mut bis = Bisector::from_mesh(mesh, opts.max_vertices);
    let mut cand = Vec::new();
    bis.refine_until(|tri| {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in tri {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k] - reach);
                hi[k] = hi[k].max(p[k] + reach);
            }
        }
        // the closure is called sequentially; reuse the scratch buffer
        let mut local = std::mem::take(&mut cand);
        grid.candidates(lo, hi, &mut local);
        let mut target = f64::INFINITY;
        for &i in &local {
            let d = shape_triangle_distance(&shapes[i], tri);
            target = target.min(sizes[i] + opts.grading * d);
        }
        cand = local;
        target
    })?;
    let mut refined = bis.into_mesh()?;
    if opts.snap {
        snap_to_layout(&mut refined, layout);
        refined.validate()?;
    }
    Ok(refined)
}

/// Moves `v` to `target` if every incident triangle keeps at least a quarter
/// of its area.
fn try_move(mesh: &mut Mesh, adj: &[Vec<usize>], v: usize, target: Point) -> bool {
    let old = mesh.vertices()[v];
    let tris = mesh.triangles();
    for &t in &adj[v] {
        let mut pts = [[0.0; 2]; 3];
        let mut moved = pts;
        for k in 0..3 {
            pts[k] = mesh.vertices()[tris[t][k]];
            moved[k] = if tris[t][k] == v { target } else { pts[k] };
        }
        let a0 = orient(pts[0], pts[1], pts[2]);
        let a1 = orient(moved[0], moved[1], moved[2]);
        if !(a1 > 0.25 * a0) {
            return false;
        }
    }
    let _ = old;
    mesh.vertices_mut()[v] = target;
    true
}

fn snap_to_layout(mesh: &mut Mesh, layout: &PerforationLayout) {
    let adj = mesh.vertex_triangles();
    let boundary = mesh.boundary_vertices();
    let mut pinned = vec![false; mesh.n_vertices()];
    for e in &layout.elements {
        match e.shape {
            ElementShape::Segment { a, b } => {
                let len = dist(a, b);
                for end in [a, b] {
                    // closest boundary vertex lying on the segment's line
                    let mut best: Option<(usize, f64)> = None;
                    for &v in &boundary {
                        let p = mesh.vertices()[v];
                        if orient(a, b, p).abs() > 1e-12 * len * len.max(dist(a, p)) {
                            continue;
                        }
                        let d = dist(p, end);
                        if best.is_none_or(|(_, bd)| d < bd) {
                            best = Some((v, d));
                        }
                    }
                    if let Some((v, d)) = best {
                        if d > 0.0 && !pinned[v] && d < 0.5 * mesh.local_size()[v].max(len) {
                            if try_move(mesh, &adj, v, end) {
                                pinned[v] = true;
                            }
                        } else if d == 0.0 {
                            pinned[v] = true;
                        }
                    }
                }
            }
            ElementShape::Disk { center, radius } => {
                let reach = 2.0 * radius;
                let near: Vec<usize> = (0..mesh.n_vertices())
                    .filter(|&v| (dist(mesh.vertices()[v], center) - radius).abs() < reach)
                    .collect();
                let mut moved: Vec<Point> = Vec::new();
                for v in near {
                    if pinned[v] || boundary.binary_search(&v).is_ok() {
                        continue;
                    }
                    let p = mesh.vertices()[v];
                    let r = dist(p, center);
                    let h = mesh.local_size()[v];
                    if r == 0.0 || (r - radius).abs() > 0.3 * h {
                        continue;
                    }
                    let target = [
                        center[0] + radius * (p[0] - center[0]) / r,
                        center[1] + radius * (p[1] - center[1]) / r,
                    ];
                    // keep rim vertices apart
                    if moved.iter().any(|&q| dist(q, target) < 0.3 * h) {
                        continue;
                    }
                    if try_move(mesh, &adj, v, target) {
                        pinned[v] = true;
                        moved.push(target);
                    }
                }
            }
        }
    }
}

/// Vertices inside a perforation element, per element in layout order.
pub fn element_vertices(mesh: &Mesh, layout: &PerforationLayout) -> Vec<Vec<usize>> {
    let boundary = mesh.boundary_vertices();
    layout
        .elements
        .iter()
        .map(|e| match e.shape {
            ElementShape::Segment { a, b } => {
                let tol = 1e-10 * dist(a, b);
                boundary
                    .iter()
                    .copied()
                    .filter(|&v| point_segment_distance(mesh.vertices()[v], a, b) <= tol)
                    .collect()
            }
            ElementShape::Disk { center, radius } => (0..mesh.n_vertices())
                .filter(|&v| dist(mesh.vertices()[v], center) <= radius * (1.0 + 1e-9))
                .collect(),
        })
        .collect()
}
