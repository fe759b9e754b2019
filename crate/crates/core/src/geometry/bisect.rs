//! Conforming newest-vertex bisection.
//!
//! Each triangle `[v0, v1, v2]` is split across its refinement edge
//! `(v0, v1)`; the new midpoint becomes the newest vertex of both children.
//! A neighbour whose refinement edge differs is refined first, so the mesh
//! never carries hanging nodes.

use std::collections::HashMap;

use super::mesh::{edge_key, BoundaryEdge, BoundaryTag, Mesh};
use super::primitives::{dist, midpoint, Point};
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

pub(crate) struct Bisector {
    vertices: Vec<Point>,
    local_size: Vec<f64>,
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    edge_tris: HashMap<(usize, usize), [usize; 2]>,
    midpoints: HashMap<(usize, usize), usize>,
    boundary: HashMap<(usize, usize), BoundaryTag>,
    max_vertices: usize,
}

impl Bisector {
    pub fn from_mesh(mesh: &Mesh, max_vertices: usize) -> Self {
        let mut b = Self {
            vertices: mesh.vertices().to_vec(),
            local_size: mesh.local_size().to_vec(),
            tris: Vec::with_capacity(mesh.n_triangles() * 2),
            alive: Vec::new(),
            edge_tris: HashMap::new(),
            midpoints: HashMap::new(),
            boundary: mesh
                .boundary_edges()
                .iter()
                .map(|e| (edge_key(e.vertices[0], e.vertices[1]), e.tag))
                .collect(),
            max_vertices,
        };
        for t in mesh.triangles() {
            b.push_tri(*t);
        }
        b
    }

    fn push_tri(&mut self, t: [usize; 3]) -> usize {
        let id = self.tris.len();
        self.tris.push(t);
        self.alive.push(true);
        for i in 0..3 {
            let k = edge_key(t[i], t[(i + 1) % 3]);
            let slot = self.edge_tris.entry(k).or_insert([NONE, NONE]);
            if slot[0] == NONE {
                slot[0] = id;
            } else {
                slot[1] = id;
            }
        }
        id
    }

    fn kill_tri(&mut self, id: usize) {
        self.alive[id] = false;
        let t = self.tris[id];
        for i in 0..3 {
            let k = edge_key(t[i], t[(i + 1) % 3]);
            if let Some(slot) = self.edge_tris.get_mut(&k) {
                if slot[0] == id {
                    slot[0] = slot[1];
                    slot[1] = NONE;
                } else if slot[1] == id {
                    slot[1] = NONE;
                }
                if slot[0] == NONE {
                    self.edge_tris.remove(&k);
                }
            }
        }
    }

    pub fn points(&self, id: usize) -> [Point; 3] {
        let t = self.tris[id];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn longest_edge(&self, id: usize) -> f64 {
        let p = self.points(id);
        dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0]))
    }

    pub fn alive_ids(&self) -> Vec<usize> {
        (0..self.tris.len()).filter(|&i| self.alive[i]).collect()
    }

    fn neighbour(&self, id: usize, a: usize, b: usize) -> Option<usize> {
        let slot = self.edge_tris.get(&edge_key(a, b))?;
        if slot[0] == id {
            (slot[1] != NONE).then_some(slot[1])
        } else {
            Some(slot[0])
        }
    }

    fn midpoint_vertex(&mut self, a: usize, b: usize, size: f64) -> Result<usize> {
        let k = edge_key(a, b);
        if let Some(&m) = self.midpoints.get(&k) {
            return Ok(m);
        }
        if self.vertices.len() >= self.max_vertices {
            return Err(Error::Resource(format!(
                "mesh refinement exceeded the vertex cap of {}",
                self.max_vertices
            )));
        }
        let m = self.vertices.len();
        self.vertices.push(midpoint(self.vertices[a], self.vertices[b]));
        self.local_size.push(size);
        self.midpoints.insert(k, m);
        if let Some(tag) = self.boundary.remove(&k) {
            self.boundary.insert(edge_key(a, m), tag);
            self.boundary.insert(edge_key(m, b), tag);
        }
        Ok(m)
    }

    fn split(&mut self, id: usize, m: usize, created: &mut Vec<usize>) {
        let [v0, v1, v2] = self.tris[id];
        self.kill_tri(id);
        created.push(self.push_tri([v2, v0, m]));
        created.push(self.push_tri([v1, v2, m]));
    }

    /// Bisects `id`, first refining neighbours as needed for conformity.
    pub fn refine(&mut self, id: usize, size: f64, created: &mut Vec<usize>) -> Result<()> {
        let mut guard = 0usize;
        while self.alive[id] {
            guard += 1;
            if guard > 10_000 {
                return Err(Error::invalid(
                    "bisection did not terminate; incompatible refinement edges",
                ));
            }
            let [a, b, _] = self.tris[id];
            match self.neighbour(id, a, b) {
                None => {
                    let m = self.midpoint_vertex(a, b, size)?;
                    self.split(id, m, created);
                }
                Some(n) => {
                    let [c, d, _] = self.tris[n];
                    if edge_key(c, d) == edge_key(a, b) {
                        let m = self.midpoint_vertex(a, b, size)?;
                        self.split(id, m, created);
                        self.split(n, m, created);
                    } else {
                        self.refine(n, size, created)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Repeatedly bisects every triangle whose longest edge exceeds
    /// `target(triangle)`.
    pub fn refine_until(&mut self, mut target: impl FnMut(&[Point; 3]) -> f64) -> Result<()> {
        let mut work = self.alive_ids();
        while !work.is_empty() {
            let mut created = Vec::new();
            for id in work {
                if !self.alive[id] {
                    continue;
                }
                let pts = self.points(id);
                let h = target(&pts);
                if self.longest_edge(id) > h * (1.0 + 1e-12) {
                    self.refine(id, h, &mut created)?;
                }
            }
            work = created;
        }
        Ok(())
    }

    pub fn into_mesh(self) -> Result<Mesh> {
        let mut remap = vec![NONE; self.tris.len()];
        let mut tris = Vec::new();
        for (i, t) in self.tris.iter().enumerate() {
            if self.alive[i] {
                remap[i] = tris.len();
                tris.push(*t);
            }
        }
        let mut boundary_edges = Vec::new();
        for t in &tris {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                if let Some(&tag) = self.boundary.get(&edge_key(a, b)) {
                    boundary_edges.push(BoundaryEdge { vertices: [a, b], tag });
                }
            }
        }
        Mesh::from_raw(self.vertices, tris, boundary_edges, self.local_size)
    }
}
