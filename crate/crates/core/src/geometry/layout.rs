//! Perforation layouts `K_{eps,delta}`: lattice enumeration of sites along a
//! boundary edge, an interior curve, or the bulk.

use std::fmt::Write as _;

use super::mesh::{BoundaryTag, Mesh};
use super::primitives::{add, dist, point_segment_distance, scale, sub, Point};
use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};

const SCALING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    BoundarySegment,
    InteriorDisk,
    InteriorPointDisk,
    BoundaryArc,
}

impl ElementKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::BoundarySegment => "boundary_segment",
            Self::InteriorDisk => "interior_disk",
            Self::InteriorPointDisk => "interior_point_disk",
            Self::BoundaryArc => "boundary_arc",
        }
    }
}

/// Physical extent of a perforation element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementShape {
    Segment { a: Point, b: Point },
    Disk { center: Point, radius: f64 },
}

impl ElementShape {
    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            Self::Segment { a, b } => point_segment_distance(p, a, b),
            Self::Disk { center, radius } => (dist(p, center) - radius).max(0.0),
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounds(&self) -> (Point, Point) {
        match *self {
            Self::Segment { a, b } => ([a[0].min(b[0]), a[1].min(b[1])], [a[0].max(b[0]), a[1].max(b[1])]),
            Self::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerforationElement {
    pub kind: ElementKind,
    pub site: Point,
    /// Length of a segment or diameter of a disk.
    pub extent: f64,
    pub shape: ElementShape,
    pub constraint: ConstraintSet,
    pub density_weight: f64,
}

/// How the element size follows the lattice period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingRule {
    /// `delta = eps^exponent`.
    Power { exponent: f64 },
    /// `delta = exp(-kappa / eps^exponent)`.
    Exponential { kappa: f64, exponent: f64 },
    /// `delta` given directly.
    Explicit,
}

impl ScalingRule {
    pub fn delta(&self, epsilon: f64) -> Option<f64> {
        match *self {
            Self::Power { exponent } => Some(epsilon.powf(exponent)),
            Self::Exponential { kappa, exponent } => Some((-kappa / epsilon.powf(exponent)).exp()),
            Self::Explicit => None,
        }
    }

    /// Critical exponent `(d - 1)/(d - p)` for perforations on a curve or
    /// boundary of a planar domain.
    pub fn surface(p: f64) -> Self {
        Self::Power {
            exponent: 1.0 / (2.0 - p),
        }
    }

    /// Critical exponent `d/(d - p)` for bulk perforations of a planar domain.
    pub fn bulk(p: f64) -> Self {
        Self::Power {
            exponent: 2.0 / (2.0 - p),
        }
    }
}

/// Lattice period, element size and the rule linking them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub epsilon: f64,
    pub delta: f64,
    pub rule: ScalingRule,
}

impl Scaling {
    /// Checks that `delta` follows `rule` to relative `1e-12`.
    pub fn new(epsilon: f64, delta: f64, rule: ScalingRule) -> Result<Self> {
        if !(epsilon > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidScaling(format!(
                "epsilon and delta must be positive (epsilon={epsilon}, delta={delta})"
            )));
        }
        if let Some(expected) = rule.delta(epsilon) {
            if (delta - expected).abs() > SCALING_TOL * expected {
                return Err(Error::InvalidScaling(format!(
                    "delta={delta} does not match {rule:?} at epsilon={epsilon} (expected {expected})"
                )));
            }
        }
        Ok(Self { epsilon, delta, rule })
    }

    pub fn from_rule(epsilon: f64, rule: ScalingRule) -> Result<Self> {
        let delta = rule
            .delta(epsilon)
            .ok_or_else(|| Error::InvalidScaling("an explicit rule needs a delta".into()))?;
        Self::new(epsilon, delta, rule)
    }

    pub fn explicit(epsilon: f64, delta: f64) -> Result<Self> {
        Self::new(epsilon, delta, ScalingRule::Explicit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerforationLayout {
    pub elements: Vec<PerforationElement>,
    pub epsilon: f64,
    pub delta: f64,
    pub scaling_rule: ScalingRule,
}

impl PerforationLayout {
    pub fn empty(scaling: Scaling) -> Self {
        Self {
            elements: Vec::new(),
            epsilon: scaling.epsilon,
            delta: scaling.delta,
            scaling_rule: scaling.rule,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Appends the elements of `other`, which must share the scaling.
    pub fn merge(&mut self, other: PerforationLayout) -> Result<()> {
        if other.epsilon != self.epsilon || other.delta != self.delta {
            return Err(Error::Layout("merged layouts must share epsilon and delta".into()));
        }
        self.elements.extend(other.elements);
        self.check_disjoint()
    }

    /// Pairwise disjointness of the closed elements.
    pub fn check_disjoint(&self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.elements.len()).collect();
        let lo = |i: usize| self.elements[i].shape.bounds().0[0];
        order.sort_by(|&a, &b| lo(a).total_cmp(&lo(b)));
        for (k, &i) in order.iter().enumerate() {
            let (_, hi_i) = self.elements[i].shape.bounds();
            for &j in &order[k + 1..] {
                let (lo_j, hi_j) = self.elements[j].shape.bounds();
                if lo_j[0] > hi_i[0] {
                    break;
                }
                let (lo_i, _) = self.elements[i].shape.bounds();
                if lo_j[1] > hi_i[1] || hi_j[1] < lo_i[1] {
                    continue;
                }
                if shapes_intersect(&self.elements[i].shape, &self.elements[j].shape) {
                    return Err(Error::Layout(format!(
                        "perforation elements at ({:.6}, {:.6}) and ({:.6}, {:.6}) overlap",
                        self.elements[i].site[0],
                        self.elements[i].site[1],
                        self.elements[j].site[0],
                        self.elements[j].site[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Distance from `p` to the nearest element.
    pub fn distance(&self, p: Point) -> f64 {
        self.elements
            .iter()
            .map(|e| e.shape.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns `kind,x1,x2,delta,weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,x1,x2,delta,weight\n");
        for e in &self.elements {
            let _ = writeln!(
                s,
                "{},{:.17e},{:.17e},{:.17e},{:.17e}",
                e.kind.name(),
                e.site[0],
                e.site[1],
                e.extent,
                e.density_weight
            );
        }
        s
    }
}

fn shapes_intersect(a: &ElementShape, b: &ElementShape) -> bool {
    use ElementShape::*;
    match (*a, *b) {
        (Disk { center: c1, radius: r1 }, Disk { center: c2, radius: r2 }) => dist(c1, c2) <= r1 + r2,
        (Disk { center, radius }, Segment { a, b }) | (Segment { a, b }, Disk { center, radius }) => {
            point_segment_distance(center, a, b) <= radius
        }
        (Segment { a: a1, b: b1 }, Segment { a: a2, b: b2 }) => {
            let d = point_segment_distance(a1, a2, b2)
                .min(point_segment_distance(b1, a2, b2))
                .min(point_segment_distance(a2, a1, b1))
                .min(point_segment_distance(b2, a1, b1));
            d == 0.0 || super::primitives::segments_intersect(a1, b1, a2, b2)
        }
    }
}

/// Straight boundary side carrying `tag`, as (start, end) with start the
/// lexicographically smaller endpoint.
fn tagged_side(mesh: &Mesh, tag: BoundaryTag) -> Result<(Point, Point)> {
    let pts: Vec<Point> = mesh
        .boundary_edges_with_tag(tag)
        .flat_map(|e| e.vertices)
        .map(|v| mesh.vertices()[v])
        .collect();
    if pts.is_empty() {
        return Err(Error::invalid(format!("no boundary edges carry tag {}", tag.0)));
    }
    let key = |p: &Point| (p[0], p[1]);
    let lo = *pts.iter().min_by(|a, b| key(a).partial_cmp(&key(b)).unwrap()).unwrap();
    let hi = *pts.iter().max_by(|a, b| key(a).partial_cmp(&key(b)).unwrap()).unwrap();
    let len = dist(lo, hi);
    for p in &pts {
        if point_segment_distance(*p, lo, hi) > 1e-12 * len.max(1.0) {
            return Err(Error::invalid(format!(
                "boundary side with tag {} is not straight",
                tag.0
            )));
        }
    }
    Ok((lo, hi))
}

/// Segments of length `delta` centred at `start + eps i t` along the straight
/// boundary side `tag`, where `t` is the unit tangent.
///
/// Only segments lying strictly inside the side are kept, and sites closer
/// than `eps` to a domain corner are dropped.
pub fn boundary_perforation(
    mesh: &Mesh,
    tag: BoundaryTag,
    scaling: &Scaling,
    family: &dyn Fn(Point) -> ConstraintSet,
) -> Result<PerforationLayout> {
    let (eps, delta) = (scaling.epsilon, scaling.delta);
    if delta >= eps {
        return Err(Error::InvalidScaling(format!(
            "boundary perforations need delta < epsilon (delta={delta}, epsilon={eps})"
        )));
    }
    let (start, end) = tagged_side(mesh, tag)?;
    let len = dist(start, end);
    if len < eps {
        return Err(Error::invalid(format!(
            "side length {len} is shorter than epsilon {eps}"
        )));
    }
    let t = scale(sub(end, start), 1.0 / len);
    let corners = mesh.corners();
    let mut layout = PerforationLayout::empty(*scaling);
    let tol = 1e-12 * len;
    let mut i = 1usize;
    loop {
        let s = eps * i as f64;
        if s + 0.5 * delta >= len - tol {
            break;
        }
        i += 1;
        if s - 0.5 * delta <= tol {
            continue;
        }
        let site = add(start, scale(t, s));
        if corners.iter().any(|&c| dist(c, site) < eps - 1e-12) {
            continue;
        }
        let a = add(start, scale(t, s - 0.5 * delta));
        let b = add(start, scale(t, s + 0.5 * delta));
        layout.elements.push(PerforationElement {
            kind: ElementKind::BoundarySegment,
            site,
            extent: delta,
            shape: ElementShape::Segment { a, b },
            constraint: family(site),
            density_weight: 1.0,
        });
    }
    layout.check_disjoint()?;
    Ok(layout)
}

/// Parameterized curve `psi` restricted to the open interval `(t0, t1)`.
pub struct Curve<'a> {
    pub psi: &'a dyn Fn(f64) -> Point,
    pub t0: f64,
    pub t1: f64,
}

fn disk_element(
    mesh: &Mesh,
    kind: ElementKind,
    site: Point,
    delta: f64,
    family: &dyn Fn(Point) -> ConstraintSet,
    weight: f64,
) -> Result<PerforationElement> {
    if !mesh.contains(site) || mesh.distance_to_boundary(site) <= 0.5 * delta {
        return Err(Error::Layout(format!(
            "disk of diameter {delta} at ({:.6}, {:.6}) is not inside the domain",
            site[0], site[1]
        )));
    }
    Ok(PerforationElement {
        kind,
        site,
        extent: delta,
        shape: ElementShape::Disk {
            center: site,
            radius: 0.5 * delta,
        },
        constraint: family(site),
        density_weight: weight,
    })
}

/// Disks of diameter `delta` centred at `psi(eps i)` for `eps i` in the open
/// parameter interval, weighted by the inverse arclength stretch `1/|psi'|`.
pub fn interior_perforation_on_curve(
    mesh: &Mesh,
    curve: &Curve<'_>,
    scaling: &Scaling,
    family: &dyn Fn(Point) -> ConstraintSet,
) -> Result<PerforationLayout> {
    let (eps, delta) = (scaling.epsilon, scaling.delta);
    if delta >= eps {
        return Err(Error::InvalidScaling(format!(
            "curve perforations need delta < epsilon (delta={delta}, epsilon={eps})"
        )));
    }
    let h = 1e-5 * eps;
    let tol = 1e-12 * (curve.t1 - curve.t0).abs().max(1.0);
    let first = (curve.t0 / eps).floor() as i64;
    let last = (curve.t1 / eps).ceil() as i64;
    let mut layout = PerforationLayout::empty(*scaling);
    for i in first..=last {
        let t = eps * i as f64;
        if t <= curve.t0 + tol || t >= curve.t1 - tol {
            continue;
        }
        let site = (curve.psi)(t);
        let plus = (curve.psi)(t + h);
        let minus = (curve.psi)(t - h);
        let speed = dist(plus, minus) / (2.0 * h);
        if !(speed > 1e-10) {
            return Err(Error::Layout(format!("curve is degenerate at t={t}")));
        }
        layout.elements.push(disk_element(
            mesh,
            ElementKind::InteriorDisk,
            site,
            delta,
            family,
            1.0 / speed,
        )?);
    }
    layout.check_disjoint()?;
    Ok(layout)
}

/// Disks of diameter `delta` at `psi(eps i)` for lattice points `eps i` in
/// `index_box` (defaults to the mesh bounding box) whose disks fit in the
/// domain, weighted by `1/|det grad psi|`.
pub fn bulk_perforation(
    mesh: &Mesh,
    psi: &dyn Fn(Point) -> Point,
    index_box: Option<(Point, Point)>,
    scaling: &Scaling,
    family: &dyn Fn(Point) -> ConstraintSet,
) -> Result<PerforationLayout> {
    let (eps, delta) = (scaling.epsilon, scaling.delta);
    if delta >= eps {
        return Err(Error::InvalidScaling(format!(
            "bulk perforations need delta < epsilon (delta={delta}, epsilon={eps})"
        )));
    }
    let (lo, hi) = index_box.unwrap_or_else(|| mesh.bounding_box());
    let h = 1e-5 * eps;
    let mut layout = PerforationLayout::empty(*scaling);
    let range = |a: f64, b: f64| ((a / eps).floor() as i64, (b / eps).ceil() as i64);
    let (i0, i1) = range(lo[0], hi[0]);
    let (j0, j1) = range(lo[1], hi[1]);
    for j in j0..=j1 {
        for i in i0..=i1 {
            let y = [eps * i as f64, eps * j as f64];
            let site = psi(y);
            if !mesh.contains(site) || mesh.distance_to_boundary(site) <= 0.5 * delta {
                continue;
            }
            let d1 = scale(sub(psi([y[0] + h, y[1]]), psi([y[0] - h, y[1]])), 0.5 / h);
            let d2 = scale(sub(psi([y[0], y[1] + h]), psi([y[0], y[1] - h])), 0.5 / h);
            let det = d1[0] * d2[1] - d1[1] * d2[0];
            if det.abs() < 1e-10 {
                return Err(Error::Layout(format!(
                    "lattice map is degenerate at ({:.6}, {:.6})",
                    y[0], y[1]
                )));
            }
            layout.elements.push(disk_element(
                mesh,
                ElementKind::InteriorPointDisk,
                site,
                delta,
                family,
                1.0 / det.abs(),
            )?);
        }
    }
    layout.check_disjoint()?;
    Ok(layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::square::build_square_mesh;

    fn line(_x: Point) -> ConstraintSet {
        ConstraintSet::VerticalLine { x1c: 1.2 }
    }

    fn unit_square() -> Mesh {
        build_square_mesh(1.0, 0.25, &[]).unwrap()
    }

    #[test]
    fn boundary_segments_on_right_edge() {
        let m = unit_square();
        let one = boundary_perforation(&m, BoundaryTag::RIGHT, &Scaling::explicit(0.5, 0.25).unwrap(), &line).unwrap();
        assert_eq!(one.len(), 1);
        assert!(dist(one.elements[0].site, [1.0, 0.5]) < 1e-15);

        let s = Scaling::from_rule(0.25, ScalingRule::surface(1.5)).unwrap();
        assert!((s.delta - 1.0 / 16.0).abs() < 1e-15);
        let three = boundary_perforation(&m, BoundaryTag::RIGHT, &s, &line).unwrap();
        let x2: Vec<f64> = three.elements.iter().map(|e| e.site[1]).collect();
        assert_eq!(x2, vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn fine_boundary_ladder_is_disjoint() {
        let m = unit_square();
        let s = Scaling::from_rule(1.0 / 16.0, ScalingRule::surface(1.5)).unwrap();
        let l = boundary_perforation(&m, BoundaryTag::RIGHT, &s, &line).unwrap();
        // enumeration oracle: eps i for i = 1..15
        let expected: Vec<f64> = (1..16).map(|i| i as f64 / 16.0).collect();
        let got: Vec<f64> = l.elements.iter().map(|e| e.site[1]).collect();
        assert_eq!(got, expected);
        l.check_disjoint().unwrap();
    }

    #[test]
    fn rejects_bad_scalings() {
        let m = unit_square();
        assert!(matches!(
            boundary_perforation(&m, BoundaryTag::RIGHT, &Scaling::explicit(0.25, 0.25).unwrap(), &line),
            Err(Error::InvalidScaling(_))
        ));
        // bulk exponent for p = 3/2 is 4, surface exponent 2
        assert!(Scaling::new(0.5, 0.25, ScalingRule::bulk(1.5)).is_err());
        assert!(Scaling::new(0.5, 0.0625, ScalingRule::bulk(1.5)).is_ok());
        assert!(Scaling::new(0.5, 0.25, ScalingRule::surface(1.5)).is_ok());
    }

    #[test]
    fn curve_sites_and_weights() {
        let m = unit_square();
        let psi = |t: f64| [0.5, t];
        let curve = Curve {
            psi: &psi,
            t0: 0.1,
            t1: 0.9,
        };
        let ladder = [(5.0, 4), (10.0, 7), (15.0, 12), (20.0, 15)];
        for (n, count) in ladder {
            let s = Scaling::from_rule(1.0 / n, ScalingRule::surface(4.0 / 3.0)).unwrap();
            let l = interior_perforation_on_curve(&m, &curve, &s, &line).unwrap();
            assert_eq!(l.len(), count, "eps = 1/{n}");
            assert!(l.elements.iter().all(|e| (e.density_weight - 1.0).abs() < 1e-9));
        }
        let fast = |t: f64| [0.5, 2.0 * t];
        let c2 = Curve {
            psi: &fast,
            t0: 0.05,
            t1: 0.45,
        };
        let s = Scaling::explicit(0.1, 0.01).unwrap();
        let l = interior_perforation_on_curve(&m, &c2, &s, &line).unwrap();
        assert_eq!(l.len(), 4);
        assert!(l.elements.iter().all(|e| (e.density_weight - 0.5).abs() < 1e-9));
    }

    #[test]
    fn curve_disk_touching_boundary_is_an_error() {
        let m = unit_square();
        let psi = |t: f64| [0.001, t];
        let curve = Curve {
            psi: &psi,
            t0: 0.0,
            t1: 1.0,
        };
        let s = Scaling::explicit(0.25, 0.01).unwrap();
        assert!(matches!(
            interior_perforation_on_curve(&m, &curve, &s, &line),
            Err(Error::Layout(_))
        ));
    }

    #[test]
    fn bulk_sites_and_weights() {
        let m = unit_square();
        let s = Scaling::explicit(0.25, 0.01).unwrap();
        let id = |x: Point| x;
        let l = bulk_perforation(&m, &id, None, &s, &line).unwrap();
        assert_eq!(l.len(), 9);
        assert!(l.elements.iter().all(|e| (e.density_weight - 1.0).abs() < 1e-9));
        let double = |x: Point| [2.0 * x[0], 2.0 * x[1]];
        let d = bulk_perforation(&m, &double, None, &s, &line).unwrap();
        assert!(!d.is_empty());
        assert!(d.elements.iter().all(|e| (e.density_weight - 0.25).abs() < 1e-9));
        let flat = |x: Point| [x[0], 0.0 * x[1] + 0.5];
        assert!(bulk_perforation(&m, &flat, None, &s, &line).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let m = unit_square();
        let l = boundary_perforation(&m, BoundaryTag::RIGHT, &Scaling::explicit(0.25, 0.0625).unwrap(), &line).unwrap();
        let csv = l.to_csv();
        assert!(csv.starts_with("kind,x1,x2,delta,weight\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
