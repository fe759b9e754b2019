use super::bisect::Bisector;
use super::mesh::{BoundaryEdge, BoundaryTag, Mesh};
use super::primitives::{point_triangle_distance, segment_triangle_distance, Point};
use crate::error::{Error, Result};

/// Default cap on the number of vertices any refinement may create.
pub const DEFAULT_MAX_VERTICES: usize = 2_000_000;

/// Region in which a refinement zone applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Rect {
        min: Point,
        max: Point,
    },
    Disk {
        center: Point,
        radius: f64,
    },
    /// All points within `radius` of the segment `[a, b]`.
    Segment {
        a: Point,
        b: Point,
        radius: f64,
    },
}

impl Region {
    fn touches(&self, tri: &[Point; 3]) -> bool {
        match *self {
            Region::Rect { min, max } => {
                let lo = [
                    tri[0][0].min(tri[1][0]).min(tri[2][0]),
                    tri[0][1].min(tri[1][1]).min(tri[2][1]),
                ];
                let hi = [
                    tri[0][0].max(tri[1][0]).max(tri[2][0]),
                    tri[0][1].max(tri[1][1]).max(tri[2][1]),
                ];
                lo[0] <= max[0] && hi[0] >= min[0] && lo[1] <= max[1] && hi[1] >= min[1]
            }
            Region::Disk { center, radius } => point_triangle_distance(center, tri) <= radius,
            Region::Segment { a, b, radius } => segment_triangle_distance(a, b, tri) <= radius,
        }
    }
}

/// Local mesh size request: edges of triangles touching `region` are kept at
/// or below `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementZone {
    pub region: Region,
    pub h: f64,
}

/// Triangulates the square `(0, side)^2`.
///
/// A structured grid with one diagonal per cell is bisected until all edges
/// are at most `h` and edges touching each zone are at most the zone's `h`.
pub fn build_square_mesh(side: f64, h: f64, zones: &[RefinementZone]) -> Result<Mesh> {
    build_square_mesh_capped(side, h, zones, DEFAULT_MAX_VERTICES)
}

pub fn build_square_mesh_capped(side: f64, h: f64, zones: &[RefinementZone], max_vertices: usize) -> Result<Mesh> {
    if !(side > 0.0) || !(h > 0.0) || !(h < side) {
        return Err(Error::invalid(format!(
            "square mesh needs side > 0 and 0 < h < side, got side={side}, h={h}"
        )));
    }
    if let Some(z) = zones.iter().find(|z| !(z.h > 0.0)) {
        return Err(Error::invalid(format!(
            "refinement zone size must be positive, got {}",
            z.h
        )));
    }
    // cells of width side/n; the bisection pass below takes care of the
    // diagonals that still exceed h
    let n = (side / h).ceil() as usize;
    let cell = side / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let x = if i == n { side } else { i as f64 * cell };
            let y = if j == n { side } else { j as f64 * cell };
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = idx(i, j);
            let b = idx(i + 1, j);
            let c = idx(i + 1, j + 1);
            let d = idx(i, j + 1);
            // both halves share the diagonal a-c as refinement edge
            triangles.push([a, c, d]);
            triangles.push([c, a, b]);
        }
    }
    let mut boundary = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary.push(BoundaryEdge {
            vertices: [idx(i, 0), idx(i + 1, 0)],
            tag: BoundaryTag::BOTTOM,
        });
        boundary.push(BoundaryEdge {
            vertices: [idx(n, i), idx(n, i + 1)],
            tag: BoundaryTag::RIGHT,
        });
        boundary.push(BoundaryEdge {
            vertices: [idx(n - i, n), idx(n - i - 1, n)],
            tag: BoundaryTag::TOP,
        });
        boundary.push(BoundaryEdge {
            vertices: [idx(0, n - i), idx(0, n - i - 1)],
            tag: BoundaryTag::LEFT,
        });
    }
    let local = vec![h; vertices.len()];
    let base = Mesh::from_raw(vertices, triangles, boundary, local)?;

    let mut bis = Bisector::from_mesh(&base, max_vertices);
    bis.refine_until(|tri| {
        zones
            .iter()
            .filter(|z| z.region.touches(tri))
            .fold(h, |acc, z| acc.min(z.h))
    })?;
    bis.into_mesh()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(
            build_square_mesh(1.0, 0.0, &[]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            build_square_mesh(-1.0, 0.1, &[]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            build_square_mesh(1.0, 2.0, &[]),
            Err(Error::InvalidArgument(_))
        ));
        let zone = RefinementZone {
            region: Region::Disk {
                center: [0.5, 0.5],
                radius: 0.1,
            },
            h: -0.01,
        };
        assert!(build_square_mesh(1.0, 0.1, &[zone]).is_err());
    }

    #[test]
    fn coarse_square_area_and_count() {
        let m = build_square_mesh(1.0, 0.5, &[]).unwrap();
        assert!(m.n_triangles() >= 8);
        assert!((m.total_area() - 1.0).abs() < 1e-12);
        assert!(m.max_edge_length() <= 0.5 + 1e-12);
        m.validate().unwrap();
    }

    #[test]
    fn triangle_count_close_to_structured_grid() {
        // structured-grid oracle: 2 (1/h)^2 triangles
        let m = build_square_mesh(1.0, 0.05, &[]).unwrap();
        let oracle = 2.0 * (1.0_f64 / 0.05).powi(2);
        let ratio = m.n_triangles() as f64 / oracle;
        assert!((0.25..=4.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zone_refines_right_edge() {
        let zone = RefinementZone {
            region: Region::Rect {
                min: [0.99, 0.0],
                max: [1.0, 1.0],
            },
            h: 0.01,
        };
        let m = build_square_mesh(1.0, 0.1, &[zone]).unwrap();
        m.validate().unwrap();
        for e in m.boundary_edges_with_tag(BoundaryTag::RIGHT) {
            assert!(m.edge_length(e.vertices) <= 0.01 + 1e-12);
        }
        assert_eq!(m.corners().len(), 4);
    }
}
