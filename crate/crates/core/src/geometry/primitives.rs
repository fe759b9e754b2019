//! Small planar geometry kernels shared by the mesh builders and the layouts.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Twice the signed area of (a, b, c); positive for counter-clockwise order.
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, add(a, scale(ab, t)))
}

/// Barycentric coordinates of `p` in the triangle (a, b, c).
pub fn barycentric(p: Point, tri: &[Point; 3]) -> [f64; 3] {
    let [a, b, c] = *tri;
    let det = orient(a, b, c);
    let l1 = orient(p, b, c) / det;
    let l2 = orient(a, p, c) / det;
    [l1, l2, 1.0 - l1 - l2]
}

pub fn point_in_triangle(p: Point, tri: &[Point; 3], tol: f64) -> bool {
    barycentric(p, tri).iter().all(|&l| l >= -tol)
}

pub fn point_triangle_distance(p: Point, tri: &[Point; 3]) -> f64 {
    if point_in_triangle(p, tri, 0.0) {
        return 0.0;
    }
    (0..3)
        .map(|i| point_segment_distance(p, tri[i], tri[(i + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
}

pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Point, q: Point, r: Point, o: f64| {
        o == 0.0 && r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    on(c, d, a, d1) || on(c, d, b, d2) || on(a, b, c, d3) || on(a, b, d, d4)
}

pub fn segment_triangle_distance(a: Point, b: Point, tri: &[Point; 3]) -> f64 {
    if point_in_triangle(a, tri, 0.0) || point_in_triangle(b, tri, 0.0) {
        return 0.0;
    }
    for i in 0..3 {
        if segments_intersect(a, b, tri[i], tri[(i + 1) % 3]) {
            return 0.0;
        }
    }
    let mut d = point_triangle_distance(a, tri).min(point_triangle_distance(b, tri));
    for v in tri {
        d = d.min(point_segment_distance(*v, a, b));
    }
    d
}

pub fn triangle_diameter(tri: &[Point; 3]) -> f64 {
    dist(tri[0], tri[1]).max(dist(tri[1], tri[2])).max(dist(tri[2], tri[0]))
}
