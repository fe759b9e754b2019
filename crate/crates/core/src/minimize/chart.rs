//! Per-vertex parameterizations of the admissible values.
//!
//! Every vertex value `z` is written as `z = lift(q)` for a few reduced
//! coordinates `q`. Dirichlet and point constraints have no coordinates,
//! lines and half-planes are affine, circles and cylinders use an angle, and
//! cones are handled by projecting `q = z` after each trial step.

use crate::constraints::{ConstraintSet, Vector};
use crate::error::{Error, Result};
use crate::geometry::Point;

use super::functional::{frame_constraint, DiscreteFunctional};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Chart {
    Free,
    Fixed(Vector),
    /// `z = base + sum_k q_k dirs_k`, with `q_0 >= 0` when `lower`.
    Affine {
        base: Vector,
        dirs: Vec<Vector>,
        lower: bool,
    },
    /// `(z1, z2) = center + radius (cos q0, sin q0)`, `z3 = q1`.
    Circle {
        center: Point,
        radius: f64,
    },
    /// `z1 = q0`, `(z2, z3) = (axis, 0) + radius (cos q1, sin q1)`.
    Cylinder {
        axis: f64,
        radius: f64,
    },
    /// `z = q`, projected onto the set after every step.
    Projected {
        constraint: ConstraintSet,
        x: Point,
    },
}

fn unit(i: usize) -> Vector {
    let mut e = [0.0; 3];
    e[i] = 1.0;
    e
}

impl Chart {
    pub fn from_constraint(c: ConstraintSet, x: Point, dim: usize) -> Result<Self> {
        Ok(match c {
            ConstraintSet::PointTarget { v } => {
                let mut z = [0.0; 3];
                z[..dim].copy_from_slice(&v[..dim]);
                Chart::Fixed(z)
            }
            ConstraintSet::VerticalLine { x1c } => {
                let base = [x1c - x[0], 0.0, 0.0];
                if dim == 1 {
                    Chart::Fixed(base)
                } else {
                    Chart::Affine {
                        base,
                        dirs: (1..dim).map(unit).collect(),
                        lower: false,
                    }
                }
            }
            ConstraintSet::HalfPlane { normal, offset } => {
                if dim < 2 {
                    return Err(Error::invalid("half-plane constraints need two components"));
                }
                let s = offset - normal[0] * x[0] - normal[1] * x[1];
                let mut dirs = vec![[normal[0], normal[1], 0.0], [-normal[1], normal[0], 0.0]];
                if dim == 3 {
                    dirs.push(unit(2));
                }
                Chart::Affine {
                    base: [s * normal[0], s * normal[1], 0.0],
                    dirs,
                    lower: true,
                }
            }
            ConstraintSet::Circle { center, radius } => Chart::Circle {
                center: [center[0] - x[0], center[1] - x[1]],
                radius,
            },
            ConstraintSet::Cylinder { x2a, radius } => Chart::Cylinder {
                axis: x2a - x[1],
                radius,
            },
            ConstraintSet::Cone { .. } => Chart::Projected { constraint: c, x },
        })
    }

    pub fn n_dofs(&self, dim: usize) -> usize {
        match self {
            Chart::Free | Chart::Projected { .. } => dim,
            Chart::Fixed(_) => 0,
            Chart::Affine { dirs, .. } => dirs.len(),
            Chart::Circle { .. } => dim - 1,
            Chart::Cylinder { .. } => 2,
        }
    }

    pub fn lift(&self, q: &[f64], z: &mut [f64]) {
        match self {
            Chart::Free | Chart::Projected { .. } => z.copy_from_slice(q),
            Chart::Fixed(v) => z.copy_from_slice(&v[..z.len()]),
            Chart::Affine { base, dirs, .. } => {
                for (i, zi) in z.iter_mut().enumerate() {
                    *zi = base[i] + dirs.iter().zip(q).map(|(d, qk)| d[i] * qk).sum::<f64>();
                }
            }
            Chart::Circle { center, radius } => {
                z[0] = center[0] + radius * q[0].cos();
                z[1] = center[1] + radius * q[0].sin();
                if z.len() == 3 {
                    z[2] = q[1];
                }
            }
            Chart::Cylinder { axis, radius } => {
                z[0] = q[0];
                z[1] = axis + radius * q[1].cos();
                z[2] = radius * q[1].sin();
            }
        }
    }

    /// Columns `dz/dq_k`.
    pub fn jacobian(&self, q: &[f64], dim: usize) -> [Vector; 3] {
        let mut cols = [[0.0; 3]; 3];
        match self {
            Chart::Free | Chart::Projected { .. } => {
                for (k, c) in cols.iter_mut().take(dim).enumerate() {
                    c[k] = 1.0;
                }
            }
            Chart::Fixed(_) => {}
            Chart::Affine { dirs, .. } => {
                for (c, d) in cols.iter_mut().zip(dirs) {
                    *c = *d;
                }
            }
            Chart::Circle { radius, .. } => {
                cols[0] = [-radius * q[0].sin(), radius * q[0].cos(), 0.0];
                if dim == 3 {
                    cols[1] = unit(2);
                }
            }
            Chart::Cylinder { radius, .. } => {
                cols[0] = unit(0);
                cols[1] = [0.0, -radius * q[1].sin(), radius * q[1].cos()];
            }
        }
        cols
    }

    /// Coordinates of the admissible value closest to `z`.
    pub fn pull(&self, z: &[f64], q: &mut [f64]) {
        match self {
            Chart::Free => q.copy_from_slice(z),
            Chart::Projected { constraint, x } => {
                let p = constraint.project(*x, z).z;
                q.copy_from_slice(&p[..z.len()]);
            }
            Chart::Fixed(_) => {}
            Chart::Affine { base, dirs, lower } => {
                // dirs are orthonormal
                for (k, d) in dirs.iter().enumerate() {
                    q[k] = (0..z.len()).map(|i| d[i] * (z[i] - base[i])).sum();
                }
                if *lower {
                    q[0] = q[0].max(0.0);
                }
            }
            Chart::Circle { center, .. } => {
                let (a, b) = (z[0] - center[0], z[1] - center[1]);
                q[0] = if a == 0.0 && b == 0.0 { 0.0 } else { b.atan2(a) };
                if z.len() == 3 {
                    q[1] = z[2];
                }
            }
            Chart::Cylinder { axis, .. } => {
                let (a, b) = (z[1] - axis, z[2]);
                q[0] = z[0];
                q[1] = if a == 0.0 && b == 0.0 { 0.0 } else { b.atan2(a) };
            }
        }
    }

    /// Index of the coordinate bounded below by zero, if any.
    pub fn lower_bound(&self) -> Option<usize> {
        match self {
            Chart::Affine { lower: true, .. } => Some(0),
            _ => None,
        }
    }

    pub fn needs_projection(&self) -> bool {
        matches!(self, Chart::Projected { .. })
    }

    pub fn project(&self, q: &mut [f64]) {
        match self {
            Chart::Affine { lower: true, .. } => q[0] = q[0].max(0.0),
            Chart::Projected { constraint, x } => {
                let p = constraint.project(*x, q).z;
                let n = q.len();
                q.copy_from_slice(&p[..n]);
            }
            _ => {}
        }
    }
}

/// Charts of all vertices and the layout of the reduced vector.
#[derive(Debug, Clone)]
pub(crate) struct ChartMap {
    pub dim: usize,
    pub charts: Vec<Chart>,
    /// Start of each vertex's coordinates in the reduced vector.
    pub offsets: Vec<usize>,
    pub n: usize,
    /// Reduced indices bounded below by zero.
    pub bounded: Vec<usize>,
    pub any_projected: bool,
}

impl ChartMap {
    pub fn new(f: &DiscreteFunctional) -> Result<Self> {
        let dim = f.dim();
        let nv = f.mesh().n_vertices();
        let mut charts = vec![Chart::Free; nv];
        for (&v, value) in f.dirichlet() {
            charts[v] = Chart::Fixed(*value);
        }
        for (&v, h) in f.hard_constraints() {
            let (c, x) = frame_constraint(f.frame(), h.constraint, h.site);
            charts[v] = Chart::from_constraint(c, x, dim)?;
        }
        let mut offsets = Vec::with_capacity(nv);
        let mut bounded = Vec::new();
        let mut n = 0;
        for c in &charts {
            offsets.push(n);
            if let Some(k) = c.lower_bound() {
                bounded.push(n + k);
            }
            n += c.n_dofs(dim);
        }
        let any_projected = charts.iter().any(Chart::needs_projection);
        Ok(Self {
            dim,
            charts,
            offsets,
            n,
            bounded,
            any_projected,
        })
    }

    fn span(&self, v: usize) -> std::ops::Range<usize> {
        let o = self.offsets[v];
        o..o + self.charts[v].n_dofs(self.dim)
    }

    pub fn lift(&self, q: &[f64], values: &mut [f64]) {
        let d = self.dim;
        for (v, c) in self.charts.iter().enumerate() {
            c.lift(&q[self.span(v)], &mut values[v * d..(v + 1) * d]);
        }
    }

    pub fn pull(&self, values: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut q = vec![0.0; self.n];
        for (v, c) in self.charts.iter().enumerate() {
            let r = self.span(v);
            c.pull(&values[v * d..(v + 1) * d], &mut q[r]);
        }
        q
    }

    /// `g_q = J^T g_z`.
    pub fn pull_gradient(&self, q: &[f64], gz: &[f64], gq: &mut [f64]) {
        let d = self.dim;
        for (v, c) in self.charts.iter().enumerate() {
            let r = self.span(v);
            if r.is_empty() {
                continue;
            }
            let cols = c.jacobian(&q[r.clone()], d);
            for (k, idx) in r.enumerate() {
                gq[idx] = (0..d).map(|i| cols[k][i] * gz[v * d + i]).sum();
            }
        }
    }

    pub fn project(&self, q: &mut [f64]) {
        for &i in &self.bounded {
            q[i] = q[i].max(0.0);
        }
        if self.any_projected {
            for (v, c) in self.charts.iter().enumerate() {
                if c.needs_projection() {
                    let r = self.span(v);
                    c.project(&mut q[r]);
                }
            }
        }
    }

    pub fn jacobian(&self, v: usize, q: &[f64]) -> [Vector; 3] {
        self.charts[v].jacobian(&q[self.span(v)], self.dim)
    }

    pub fn dofs(&self, v: usize) -> std::ops::Range<usize> {
        self.span(v)
    }
}
