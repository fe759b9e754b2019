use std::collections::HashMap;

use super::primitives::{dist, orient, Point};
use crate::error::{Error, Result};

/// Label attached to every boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryTag(pub u32);

impl BoundaryTag {
    /// `x2 = 0` side of the square domain.
    pub const BOTTOM: Self = Self(0);
    /// `x1 = l` side.
    pub const RIGHT: Self = Self(1);
    /// `x2 = l` side.
    pub const TOP: Self = Self(2);
    /// `x1 = 0` side.
    pub const LEFT: Self = Self(3);
    /// Outer circle of a cell-problem mesh.
    pub const OUTER: Self = Self(10);
    /// Flat face of a half-ball cell mesh.
    pub const FLAT: Self = Self(11);

    pub fn square_side(self) -> Option<&'static str> {
        match self {
            Self::BOTTOM => Some("bottom"),
            Self::RIGHT => Some("right"),
            Self::TOP => Some("top"),
            Self::LEFT => Some("left"),
            _ => None,
        }
    }

    pub fn from_side_name(name: &str) -> Option<Self> {
        match name {
            "bottom" => Some(Self::BOTTOM),
            "right" => Some(Self::RIGHT),
            "top" => Some(Self::TOP),
            "left" => Some(Self::LEFT),
            _ => None,
        }
    }
}

/// Boundary edge, oriented so that the domain lies on its left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

/// Conforming triangulation of a planar polygon.
///
/// Triangles are stored counter-clockwise. The first two vertices of each
/// triangle span its refinement edge, which is what the bisection refiner
/// splits next.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    local_size: Vec<f64>,
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Assembles a mesh whose refinement edges are already encoded in the
    /// triangle order. Used by the builders in this crate.
    pub(crate) fn from_raw(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        local_size: Vec<f64>,
    ) -> Result<Self> {
        let mesh = Self {
            vertices,
            triangles,
            boundary_edges,
            local_size,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Builds a mesh from arbitrary triangles. Orientation is normalized to
    /// counter-clockwise, the longest edge of each triangle becomes its
    /// refinement edge, and boundary edges are tagged by `tagger(a, b)`.
    pub fn from_triangles(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        tagger: impl Fn(Point, Point) -> BoundaryTag,
    ) -> Result<Self> {
        let mut tris = Vec::with_capacity(triangles.len());
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::invalid(format!("triangle {i} references a missing vertex")));
            }
            let mut t = *t;
            let o = orient(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if o == 0.0 {
                return Err(Error::invalid(format!("triangle {i} is degenerate")));
            }
            if o < 0.0 {
                t.swap(1, 2);
            }
            // rotate so that (t0, t1) is the longest edge
            let lens = [
                dist(vertices[t[0]], vertices[t[1]]),
                dist(vertices[t[1]], vertices[t[2]]),
                dist(vertices[t[2]], vertices[t[0]]),
            ];
            let k = (0..3).max_by(|&a, &b| lens[a].total_cmp(&lens[b])).unwrap_or(0);
            tris.push([t[k], t[(k + 1) % 3], t[(k + 2) % 3]]);
        }

        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &tris {
            for i in 0..3 {
                *count.entry(edge_key(t[i], t[(i + 1) % 3])).or_default() += 1;
            }
        }
        let mut boundary_edges = Vec::new();
        for t in &tris {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                if count[&edge_key(a, b)] == 1 {
                    boundary_edges.push(BoundaryEdge {
                        vertices: [a, b],
                        tag: tagger(vertices[a], vertices[b]),
                    });
                }
            }
        }

        let mut local_size = vec![0.0_f64; vertices.len()];
        let mut incident = vec![0usize; vertices.len()];
        for t in &tris {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                let l = dist(vertices[a], vertices[b]);
                local_size[a] += l;
                local_size[b] += l;
                incident[a] += 1;
                incident[b] += 1;
            }
        }
        for (s, n) in local_size.iter_mut().zip(&incident) {
            if *n > 0 {
                *s /= *n as f64;
            }
        }
        Self::from_raw(vertices, tris, boundary_edges, local_size)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn local_size(&self) -> &[f64] {
        &self.local_size
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * orient(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_points(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Gradients of the three P1 hat functions on triangle `t`, and its area.
    pub fn shape_gradients(&self, t: usize) -> ([[f64; 2]; 3], f64) {
        let [a, b, c] = self.triangle_points(t);
        let det = orient(a, b, c);
        let g = [
            [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
            [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
            [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
        ];
        (g, 0.5 * det)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// All distinct edges, each listed once in first-seen order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for t in &self.triangles {
            for i in 0..3 {
                let k = edge_key(t[i], t[(i + 1) % 3]);
                if seen.insert(k, ()).is_none() {
                    out.push([k.0, k.1]);
                }
            }
        }
        out
    }

    pub fn edge_length(&self, e: [usize; 2]) -> f64 {
        dist(self.vertices[e[0]], self.vertices[e[1]])
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .into_iter()
            .map(|e| self.edge_length(e))
            .fold(0.0, f64::max)
    }

    pub fn boundary_edges_with_tag(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary_edges.iter().filter(move |e| e.tag == tag)
    }

    /// Sorted, de-duplicated vertex indices lying on edges with any of `tags`.
    pub fn vertices_with_tags(&self, tags: &[BoundaryTag]) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| tags.contains(&e.tag))
            .flat_map(|e| e.vertices)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_edges.iter().flat_map(|e| e.vertices).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Boundary vertices where the boundary turns (polygon corners).
    pub fn corners(&self) -> Vec<Point> {
        let mut next: HashMap<usize, usize> = HashMap::new();
        let mut prev: HashMap<usize, usize> = HashMap::new();
        for e in &self.boundary_edges {
            next.insert(e.vertices[0], e.vertices[1]);
            prev.insert(e.vertices[1], e.vertices[0]);
        }
        let mut out = Vec::new();
        for v in self.boundary_vertices() {
            if let (Some(&n), Some(&p)) = (next.get(&v), prev.get(&v)) {
                let (a, b, c) = (self.vertices[p], self.vertices[v], self.vertices[n]);
                let turn = orient(a, b, c).abs();
                let scale = dist(a, b) * dist(b, c);
                if turn > 1e-9 * scale {
                    out.push(b);
                }
            }
        }
        out
    }

    /// Distance from `p` to the nearest boundary edge.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| {
                super::primitives::point_segment_distance(p, self.vertices[e.vertices[0]], self.vertices[e.vertices[1]])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Point-in-domain test by ray casting against the boundary loops.
    /// Points on the boundary count as inside.
    pub fn contains(&self, p: Point) -> bool {
        if self.distance_to_boundary(p) <= 1e-12 {
            return true;
        }
        let mut inside = false;
        for e in &self.boundary_edges {
            let a = self.vertices[e.vertices[0]];
            let b = self.vertices[e.vertices[1]];
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if x > p[0] {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Vertex to incident-triangle adjacency.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                adj[v].push(t);
            }
        }
        adj
    }

    pub(crate) fn vertices_mut(&mut self) -> &mut [Point] {
        &mut self.vertices
    }

    /// Checks every structural invariant: positive areas, manifold edges,
    /// boundary edges equal to the one-triangle edges, closed boundary loops.
    pub fn validate(&self) -> Result<()> {
        if self.local_size.len() != self.vertices.len() {
            return Err(Error::invalid("local_size length differs from vertex count"));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= self.vertices.len()) {
                return Err(Error::invalid(format!("triangle {t} references a missing vertex")));
            }
            if !(self.triangle_area(t) > 0.0) {
                return Err(Error::invalid(format!("triangle {t} has non-positive area")));
            }
        }
        // oriented edge counts
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for i in 0..3 {
                *directed.entry((tri[i], tri[(i + 1) % 3])).or_default() += 1;
            }
        }
        let mut boundary_expected: Vec<(usize, usize)> = Vec::new();
        for (&(a, b), &n) in &directed {
            if n > 1 {
                return Err(Error::invalid(format!(
                    "edge ({a},{b}) repeated with the same orientation"
                )));
            }
            if !directed.contains_key(&(b, a)) {
                boundary_expected.push((a, b));
            }
        }
        let mut boundary_given: Vec<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|e| (e.vertices[0], e.vertices[1]))
            .collect();
        boundary_expected.sort_unstable();
        boundary_given.sort_unstable();
        if boundary_expected != boundary_given {
            return Err(Error::invalid(
                "boundary edges do not match the edges owned by exactly one triangle",
            ));
        }
        let mut out_deg: HashMap<usize, usize> = HashMap::new();
        let mut in_deg: HashMap<usize, usize> = HashMap::new();
        for &(a, b) in &boundary_given {
            *out_deg.entry(a).or_default() += 1;
            *in_deg.entry(b).or_default() += 1;
        }
        for (v, n) in &out_deg {
            if *n != 1 || in_deg.get(v) != Some(&1) {
                return Err(Error::invalid(format!(
                    "boundary is not a set of closed loops at vertex {v}"
                )));
            }
        }
        if in_deg.len() != out_deg.len() {
            return Err(Error::invalid("boundary loops are not closed"));
        }
        Ok(())
    }
}
