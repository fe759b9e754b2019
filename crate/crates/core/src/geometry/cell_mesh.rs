//! Meshes for the blow-up cell problems: balls and half-balls of radius `R`
//! around a reference perforation.
//!
//! Disk perforations get geometrically graded polar rings; a segment gets an
//! elliptic-coordinate grid whose conformal map concentrates cells at the
//! segment tips. Both families share all inner rings across radii, so a
//! ladder `R, 2R, 4R` differs only in the added outer layers.

use std::f64::consts::PI;

use super::mesh::{BoundaryTag, Mesh};
use super::primitives::Point;
use crate::error::{Error, Result};

/// Ring radii `r, r q, r q^2, ...` truncated exactly at `outer`.
fn geometric_radii(inner: f64, outer: f64, ratio: f64) -> Vec<f64> {
    let mut radii = vec![inner];
    let mut r = inner;
    loop {
        r *= ratio;
        if r >= outer * (1.0 - 1e-9) {
            break;
        }
        radii.push(r);
    }
    // merge a sliver ring into the outer boundary
    if radii.len() > 1 && outer / radii[radii.len() - 1] < ratio.sqrt() {
        radii.pop();
    }
    radii.push(outer);
    radii
}

/// Polar mesh of the ball `B(0, outer)` (or its upper half when `half`),
/// with a ring exactly at `inner`, graded geometrically outwards and inwards.
///
/// `angular` is the number of sectors per half turn; `rotation` turns the
/// full-ball mesh by that many sector widths (ignored for half balls).
pub fn polar_ball_mesh(inner: f64, outer: f64, angular: usize, half: bool, rotation: f64) -> Result<Mesh> {
    if !(inner > 0.0) || !(outer > 2.0 * inner) || angular < 4 {
        return Err(Error::invalid(format!(
            "polar mesh needs 0 < 2 inner < outer and at least 4 sectors (inner={inner}, outer={outer}, sectors={angular})"
        )));
    }
    let dtheta = PI / angular as f64;
    let ratio = 1.0 + dtheta;
    let mut radii: Vec<f64> = geometric_radii(inner, outer, ratio);
    // inner rings down to a tenth of the perforation radius, then a fan
    let mut inside = Vec::new();
    let mut r = inner;
    while r > 0.1 * inner {
        r /= ratio;
        inside.push(r);
    }
    inside.reverse();
    inside.append(&mut radii);
    let radii = inside;

    let sectors = if half { angular } else { 2 * angular };
    let per_ring = if half { sectors + 1 } else { sectors };
    let offset = if half { 0.0 } else { rotation * dtheta };
    let mut vertices: Vec<Point> = vec![[0.0, 0.0]];
    for &r in &radii {
        for j in 0..per_ring {
            let th = offset + j as f64 * dtheta;
            if half && j == angular {
                vertices.push([-r, 0.0]);
            } else {
                vertices.push([r * th.cos(), r * th.sin()]);
            }
        }
    }
    let node = |ring: usize, j: usize| 1 + ring * per_ring + (j % per_ring);
    let mut tris = Vec::new();
    for j in 0..sectors {
        tris.push([0, node(0, j), node(0, j + 1)]);
    }
    for k in 0..radii.len() - 1 {
        for j in 0..sectors {
            let a = node(k, j);
            let b = node(k + 1, j);
            let c = node(k + 1, j + 1);
            let d = node(k, j + 1);
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    let tag_outer = outer * (1.0 - 1e-9);
    Mesh::from_triangles(vertices, tris, move |a, b| {
        let ra = a[0].hypot(a[1]);
        let rb = b[0].hypot(b[1]);
        if ra >= tag_outer && rb >= tag_outer {
            BoundaryTag::OUTER
        } else {
            BoundaryTag::FLAT
        }
    })
}

/// Smooth ramp from 0 at `t <= 0` to 1 at `t >= 1`.
fn blend(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Mesh of the half ball `B(0, outer) ∩ {x2 >= 0}` (or the full ball) built
/// on elliptic coordinates around the segment `[-length/2, length/2] x {0}`.
///
/// `angular` is the number of cells per half turn in the elliptic angle.
/// Outer layers are blended from confocal ellipses to the circle of radius
/// `outer`.
pub fn elliptic_segment_mesh(length: f64, outer: f64, angular: usize, half: bool) -> Result<Mesh> {
    if !(length > 0.0) || !(outer > length) || angular < 4 {
        return Err(Error::invalid(format!(
            "segment cell mesh needs 0 < length < outer and at least 4 cells (length={length}, outer={outer})"
        )));
    }
    let a = 0.5 * length;
    let xi_max = (outer / a).acosh();
    let step = PI / angular as f64;
    let n_xi = (xi_max / step).ceil() as usize;
    let dxi = xi_max / n_xi as f64;
    let blend_start = (xi_max - 1.5).max(0.5 * xi_max);

    let n_eta = if half { angular } else { 2 * angular };
    let per_row = if half { n_eta + 1 } else { n_eta };
    let mut vertices: Vec<Point> = Vec::new();
    let mut index = vec![0usize; (n_xi + 1) * per_row];
    for i in 0..=n_xi {
        let xi = i as f64 * dxi;
        let w = if xi_max > blend_start {
            blend((xi - blend_start) / (xi_max - blend_start))
        } else {
            1.0
        };
        let sx = xi.cosh();
        let sy = xi.sinh() + w * (xi.cosh() - xi.sinh());
        for j in 0..per_row {
            let eta = j as f64 * step;
            // on the segment the two faces of the full mesh coincide
            if !half && i == 0 && j > angular {
                index[j] = index[2 * angular - j];
                continue;
            }
            index[i * per_row + j] = vertices.len();
            let on_axis = j == 0 || j == angular || j == 2 * angular;
            let y = if i == 0 || on_axis { 0.0 } else { a * sy * eta.sin() };
            let x = if j == angular { -a * sx } else { a * sx * eta.cos() };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| index[i * per_row + (j % per_row)];
    let mut tris = Vec::new();
    for i in 0..n_xi {
        for j in 0..n_eta {
            let p = id(i, j);
            let q = id(i + 1, j);
            let r = id(i + 1, j + 1);
            let s = id(i, j + 1);
            // lower half mirrors the upper diagonal; on the segment row the
            // diagonal must avoid the axis points
            let mirrored = j >= angular;
            let flip = i == 0 && (j + 1 == angular || j == angular);
            if mirrored == flip {
                tris.push([p, q, r]);
                tris.push([p, r, s]);
            } else {
                tris.push([p, q, s]);
                tris.push([q, r, s]);
            }
        }
    }
    let tag_outer = outer * (1.0 - 1e-9);
    Mesh::from_triangles(vertices, tris, move |p, q| {
        if p[0].hypot(p[1]) >= tag_outer && q[0].hypot(q[1]) >= tag_outer {
            BoundaryTag::OUTER
        } else {
            BoundaryTag::FLAT
        }
    })
}

/// Full ball obtained by mirroring a half-ball mesh across `x2 = 0`; vertices
/// on the flat face are shared, so the result is exactly reflection
/// symmetric.
pub fn reflect_half_mesh(half: &Mesh) -> Result<Mesh> {
    let n = half.n_vertices();
    let mut vertices = half.vertices().to_vec();
    let mut image = vec![0usize; n];
    for (v, p) in half.vertices().iter().enumerate() {
        if p[1] < 0.0 {
            return Err(Error::invalid("half mesh must lie in x2 >= 0"));
        }
        image[v] = if p[1] == 0.0 {
            v
        } else {
            vertices.push([p[0], -p[1]]);
            vertices.len() - 1
        };
    }
    let mut tris = half.triangles().to_vec();
    tris.extend(half.triangles().iter().map(|t| [image[t[0]], image[t[2]], image[t[1]]]));
    let outer = half
        .boundary_edges()
        .iter()
        .filter(|e| e.tag == BoundaryTag::OUTER)
        .flat_map(|e| e.vertices.map(|v| half.vertices()[v][0].hypot(half.vertices()[v][1])))
        .fold(f64::INFINITY, f64::min);
    let tag_outer = outer * (1.0 - 1e-9);
    Mesh::from_triangles(vertices, tris, move |a, b| {
        if a[0].hypot(a[1]) >= tag_outer && b[0].hypot(b[1]) >= tag_outer {
            BoundaryTag::OUTER
        } else {
            BoundaryTag::FLAT
        }
    })
}
