use super::mesh::Mesh;
use super::primitives::{barycentric, point_triangle_distance, Point};

/// Bucket grid for point location in a mesh.
pub struct Locator<'a> {
    mesh: &'a Mesh,
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> Locator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let (lo, hi) = mesh.bounding_box();
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        let n = ((mesh.n_triangles() as f64).sqrt().ceil() as usize).clamp(1, 2048);
        let cell = extent / n as f64;
        let nx = (((hi[0] - lo[0]) / cell) as usize + 1).min(2048);
        let ny = (((hi[1] - lo[1]) / cell) as usize + 1).min(2048);
        let mut loc = Self {
            mesh,
            origin: lo,
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        };
        for t in 0..mesh.n_triangles() {
            let pts = mesh.triangle_points(t);
            let mut a = [f64::INFINITY; 2];
            let mut b = [f64::NEG_INFINITY; 2];
            for p in &pts {
                for k in 0..2 {
                    a[k] = a[k].min(p[k]);
                    b[k] = b[k].max(p[k]);
                }
            }
            let (i0, j0) = loc.index(a);
            let (i1, j1) = loc.index(b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * nx + i].push(t as u32);
                }
            }
        }
        loc
    }

    fn index(&self, p: Point) -> (usize, usize) {
        let f = |v: f64, o: f64, n: usize| (((v - o) / self.cell).floor().max(0.0) as usize).min(n - 1);
        (f(p[0], self.origin[0], self.nx), f(p[1], self.origin[1], self.ny))
    }

    /// Triangle containing `p` and the barycentric coordinates of `p` in it.
    /// Points slightly outside the mesh snap to the nearest triangle found in
    /// the surrounding buckets.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.index(p);
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..3usize {
            let i0 = i.saturating_sub(ring);
            let j0 = j.saturating_sub(ring);
            let i1 = (i + ring).min(self.nx - 1);
            let j1 = (j + ring).min(self.ny - 1);
            for jj in j0..=j1 {
                for ii in i0..=i1 {
                    if ring > 0 && ii > i0 && ii < i1 && jj > j0 && jj < j1 {
                        continue;
                    }
                    for &t in &self.buckets[jj * self.nx + ii] {
                        let t = t as usize;
                        let tri = self.mesh.triangle_points(t);
                        let l = barycentric(p, &tri);
                        if l.iter().all(|&x| x >= -1e-12) {
                            return Some((t, l));
                        }
                        let d = point_triangle_distance(p, &tri);
                        if best.is_none_or(|(_, bd)| d < bd) {
                            best = Some((t, d));
                        }
                    }
                }
            }
            if best.is_some() && ring >= 1 {
                break;
            }
        }
        best.map(|(t, _)| {
            let tri = self.mesh.triangle_points(t);
            let mut l = barycentric(p, &tri);
            // clamp to the triangle and renormalize
            for x in l.iter_mut() {
                *x = x.max(0.0);
            }
            let s: f64 = l.iter().sum();
            (t, [l[0] / s, l[1] / s, l[2] / s])
        })
    }
}
