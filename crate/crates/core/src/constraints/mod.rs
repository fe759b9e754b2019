//! Admissible sets `F_x` for the displacement at a perforation sited at `x`.
//!
//! Except for [`ConstraintSet::PointTarget`], every variant is a fixed set in
//! deformed coordinates `w = z + x`, so `F_x = G - x` for a closed set `G`.

mod penalty;
mod validate;

pub use penalty::{smooth_step, PenaltyDensity};
pub use validate::{validate_family, FamilyReport};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Displacement values carry at most three components.
pub type Vector = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintSet {
    /// `z = v`.
    PointTarget { v: Vector },
    /// `z1 + x1 = x1c`.
    VerticalLine { x1c: f64 },
    /// `|(z1 + x1, z2 + x2) - center| = radius`; further components are free.
    Circle { center: Point, radius: f64 },
    /// `(z2 + x2 - x2a)^2 + z3^2 = radius^2` for three-component fields.
    Cylinder { x2a: f64, radius: f64 },
    /// `<normal, z + x> >= offset` with a unit inward normal.
    HalfPlane { normal: Point, offset: f64 },
    /// `<w - apex, axis> >= aperture |w - apex|` for `w = z + x`.
    Cone { apex: Point, axis: Point, aperture: f64 },
}

/// Projection result; `degenerate` marks a tie broken by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub z: Vector,
    pub degenerate: bool,
}

fn to_vec(z: &[f64]) -> Vector {
    let mut out = [0.0; 3];
    out[..z.len()].copy_from_slice(z);
    out
}

impl ConstraintSet {
    pub fn half_plane(normal: Point, offset: f64) -> Result<Self> {
        let n = normal[0].hypot(normal[1]);
        if !(n > 0.0) {
            return Err(Error::invalid("half-plane normal must be nonzero"));
        }
        let c = Self::HalfPlane {
            normal: [normal[0] / n, normal[1] / n],
            offset: offset / n,
        };
        Ok(c)
    }

    /// Checks the parameter invariants and compatibility with `m` components.
    pub fn check(&self, m: usize) -> Result<()> {
        if !(1..=3).contains(&m) {
            return Err(Error::invalid(format!("target dimension must be 1, 2 or 3, got {m}")));
        }
        match *self {
            Self::PointTarget { v } => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("point target must be finite"));
                }
            }
            Self::VerticalLine { x1c } => {
                if !x1c.is_finite() {
                    return Err(Error::invalid("line abscissa must be finite"));
                }
            }
            Self::Circle { radius, .. } => {
                if !(radius > 0.0) {
                    return Err(Error::invalid("circle radius must be positive"));
                }
                if m < 2 {
                    return Err(Error::invalid("circle constraint needs at least 2 components"));
                }
            }
            Self::Cylinder { radius, .. } => {
                if !(radius > 0.0) {
                    return Err(Error::invalid("cylinder radius must be positive"));
                }
                if m != 3 {
                    return Err(Error::invalid("cylinder constraint needs 3 components"));
                }
            }
            Self::HalfPlane { normal, .. } => {
                if ((normal[0].hypot(normal[1])) - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid("half-plane normal must have unit length"));
                }
                if m < 2 {
                    return Err(Error::invalid("half-plane constraint needs at least 2 components"));
                }
            }
            Self::Cone { axis, aperture, .. } => {
                if ((axis[0].hypot(axis[1])) - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid("cone axis must have unit length"));
                }
                if !(0.0..1.0).contains(&aperture) {
                    return Err(Error::invalid("cone aperture must lie in [0, 1)"));
                }
                if m < 2 {
                    return Err(Error::invalid("cone constraint needs at least 2 components"));
                }
            }
        }
        Ok(())
    }

    /// True for the variants whose admissible set is convex.
    pub fn is_convex(&self) -> bool {
        matches!(
            self,
            Self::PointTarget { .. } | Self::VerticalLine { .. } | Self::HalfPlane { .. } | Self::Cone { .. }
        )
    }

    /// Euclidean distance from `z` to `F_x`.
    pub fn distance(&self, x: Point, z: &[f64]) -> f64 {
        let p = self.project(x, z).z;
        let mut s = 0.0;
        for (i, zi) in z.iter().enumerate() {
            s += (zi - p[i]).powi(2);
        }
        s.sqrt()
    }

    /// Closest admissible displacement to `z`.
    pub fn project(&self, x: Point, z: &[f64]) -> Projection {
        let m = z.len();
        let mut out = to_vec(z);
        let mut degenerate = false;
        match *self {
            Self::PointTarget { v } => {
                out[..m].copy_from_slice(&v[..m]);
            }
            Self::VerticalLine { x1c } => {
                out[0] = x1c - x[0];
            }
            Self::Circle { center, radius } => {
                let w = [z[0] + x[0] - center[0], z[1] + x[1] - center[1]];
                let r = w[0].hypot(w[1]);
                let dir = if r > 0.0 {
                    [w[0] / r, w[1] / r]
                } else {
                    degenerate = true;
                    [1.0, 0.0]
                };
                out[0] = center[0] + radius * dir[0] - x[0];
                out[1] = center[1] + radius * dir[1] - x[1];
            }
            Self::Cylinder { x2a, radius } => {
                let w = [z[1] + x[1] - x2a, z[2]];
                let r = w[0].hypot(w[1]);
                let dir = if r > 0.0 {
                    [w[0] / r, w[1] / r]
                } else {
                    degenerate = true;
                    [1.0, 0.0]
                };
                out[1] = x2a + radius * dir[0] - x[1];
                out[2] = radius * dir[1];
            }
            Self::HalfPlane { normal, offset } => {
                let s = normal[0] * (z[0] + x[0]) + normal[1] * (z[1] + x[1]);
                if s < offset {
                    out[0] += (offset - s) * normal[0];
                    out[1] += (offset - s) * normal[1];
                }
            }
            Self::Cone { apex, axis, aperture } => {
                let y = [z[0] + x[0] - apex[0], z[1] + x[1] - apex[1]];
                let s = y[0] * axis[0] + y[1] * axis[1];
                let t = [y[0] - s * axis[0], y[1] - s * axis[1]];
                let r = t[0].hypot(t[1]);
                let norm_y = y[0].hypot(y[1]);
                let proj = if s >= aperture * norm_y {
                    y
                } else {
                    // half-angle beta with cos(beta) = aperture
                    let (cb, sb) = (aperture, (1.0 - aperture * aperture).sqrt());
                    let tu = if r > 0.0 {
                        [t[0] / r, t[1] / r]
                    } else {
                        [-axis[1], axis[0]]
                    };
                    let d = [cb * axis[0] + sb * tu[0], cb * axis[1] + sb * tu[1]];
                    let along = (y[0] * d[0] + y[1] * d[1]).max(0.0);
                    [along * d[0], along * d[1]]
                };
                out[0] = proj[0] + apex[0] - x[0];
                out[1] = proj[1] + apex[1] - x[1];
            }
        }
        Projection { z: out, degenerate }
    }

    /// True when `F_x` does not depend on the site, so sites map onto each
    /// other through the identity.
    pub fn is_site_independent(&self) -> bool {
        matches!(self, Self::PointTarget { .. })
    }

    /// Short variant name used in config files and reports.
    pub fn name(&self) -> &'static str {
        match self {
            Self::PointTarget { .. } => "point",
            Self::VerticalLine { .. } => "vertical_line",
            Self::Circle { .. } => "circle",
            Self::Cylinder { .. } => "cylinder",
            Self::HalfPlane { .. } => "half_plane",
            Self::Cone { .. } => "cone",
        }
    }
}
