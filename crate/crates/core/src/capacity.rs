//! Cell problems on balls and half-balls that give the constants of the
//! relaxed constraint densities, and their extrapolation in the ball radius.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::constraints::{ConstraintSet, Vector};
use crate::error::{Error, Result};
use crate::geometry::{elliptic_segment_mesh, polar_ball_mesh, reflect_half_mesh, BoundaryTag, Mesh};
use crate::materials::RecessionModel;
use crate::minimize::{solve, DiscreteFunctional, SolveOptions};

/// Regularization of the recession density inside cell solves.
const CELL_ETA: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellGeometry {
    FullBall,
    /// Upper half ball; the flat face outside `K` is free.
    HalfBall,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellShape {
    /// Unit segment `[-1/2, 1/2] x {0}`, on the flat face for half balls.
    Segment,
    /// Disk of the given radius at the origin (a half disk on the flat face
    /// for half balls).
    Disk { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellMesh {
    /// Mesh built from `geometry` and `shape` at `angular` sectors per half
    /// turn.
    Native,
    /// Full ball mirrored from the half-ball mesh, exactly symmetric.
    Reflected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellProblem {
    pub geometry: CellGeometry,
    pub outer_radius: f64,
    pub shape: CellShape,
    /// `F`, read at the site `x = 0`.
    pub constraint: ConstraintSet,
    /// Far-field value of `v`.
    pub datum: Vector,
    pub dim: usize,
    pub recession: RecessionModel,
    /// Sectors per half turn.
    pub angular: usize,
    pub mesh: CellMesh,
}

impl CellProblem {
    /// Scalar `F = {0}` problem with datum 1.
    pub fn scalar(geometry: CellGeometry, shape: CellShape, p: f64, outer_radius: f64) -> Self {
        Self {
            geometry,
            outer_radius,
            shape,
            constraint: ConstraintSet::PointTarget { v: [0.0; 3] },
            datum: [1.0, 0.0, 0.0],
            dim: 1,
            recession: RecessionModel { p },
            angular: 64,
            mesh: CellMesh::Native,
        }
    }

    pub fn with_radius(&self, outer_radius: f64) -> Self {
        Self {
            outer_radius,
            ..self.clone()
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.outer_radius > 2.0) {
            return Err(Error::invalid(format!(
                "outer radius must exceed 2, got {}",
                self.outer_radius
            )));
        }
        if let CellShape::Disk { radius } = self.shape {
            if !(radius > 0.0 && radius <= 1.0) {
                return Err(Error::invalid(format!("disk radius must lie in (0, 1], got {radius}")));
            }
        }
        if !(self.recession.p > 1.0 && self.recession.p <= 2.0) {
            return Err(Error::invalid(format!(
                "exponent must lie in (1, 2], got {}",
                self.recession.p
            )));
        }
        if self.mesh == CellMesh::Reflected && self.geometry != CellGeometry::FullBall {
            return Err(Error::invalid("a reflected mesh describes a full ball"));
        }
        self.constraint.check(self.dim)?;
        if self.angular < 8 {
            return Err(Error::invalid("cell meshes need at least 8 sectors per half turn"));
        }
        Ok(())
    }

    fn build_mesh(&self) -> Result<Mesh> {
        let half = self.geometry == CellGeometry::HalfBall || self.mesh == CellMesh::Reflected;
        let m = match self.shape {
            CellShape::Segment => elliptic_segment_mesh(1.0, self.outer_radius, self.angular, half)?,
            CellShape::Disk { radius } => polar_ball_mesh(radius, self.outer_radius, self.angular, half, 0.5)?,
        };
        if self.mesh == CellMesh::Reflected {
            reflect_half_mesh(&m)
        } else {
            Ok(m)
        }
    }

    fn in_shape(&self, p: [f64; 2]) -> bool {
        match self.shape {
            CellShape::Segment => p[1] == 0.0 && p[0].abs() <= 0.5 + 1e-12,
            CellShape::Disk { radius } => p[0].hypot(p[1]) <= radius * (1.0 + 1e-9),
        }
    }
}

/// Discrete minimum of `int sigma_0(grad v)` with `v = datum` on the outer
/// circle and `v` in `F` on `K`.
pub fn solve_cell(problem: &CellProblem) -> Result<f64> {
    solve_cell_with(problem, &cell_options())
}

fn cell_options() -> SolveOptions {
    SolveOptions {
        tolerance: 1e-7,
        max_iters: 5000,
        ..Default::default()
    }
}

pub fn solve_cell_with(problem: &CellProblem, options: &SolveOptions) -> Result<f64> {
    problem.check()?;
    if problem.constraint.distance([0.0, 0.0], &problem.datum[..problem.dim]) == 0.0 {
        return Ok(0.0);
    }
    let mesh = Arc::new(problem.build_mesh()?);
    let model = problem.recession.as_energy(CELL_ETA)?;
    let mut f = DiscreteFunctional::new(mesh.clone(), model, problem.dim)?;
    f.dirichlet_on_tags(&[BoundaryTag::OUTER], |_| problem.datum)?;
    let mut constrained = 0;
    for (v, &x) in mesh.vertices().iter().enumerate() {
        if problem.in_shape(x) {
            f.add_hard_constraint(v, problem.constraint, [0.0, 0.0])?;
            constrained += 1;
        }
    }
    if constrained == 0 {
        return Err(Error::Layout("the cell mesh has no vertex on the perforation".into()));
    }
    let out = solve(&f, options, None)?;
    Ok(out.energy)
}

/// `phi_R` along a ladder of outer radii, extrapolated to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    pub values: Vec<(f64, f64)>,
    pub phi_inf: f64,
    /// Fitted decay exponent, `None` when the sequence is constant.
    pub beta: Option<f64>,
    pub error: f64,
}

impl CapacityEstimate {
    /// One row per radius: `R,phi_R,fitted_beta,phi_inf,err`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("R,phi_R,fitted_beta,phi_inf,err\n");
        let beta = self
            .beta
            .map_or_else(|| "unresolved".to_string(), |b| format!("{b:.6}"));
        for (r, v) in &self.values {
            let _ = writeln!(s, "{r},{v:.12e},{beta},{:.12e},{:.6e}", self.phi_inf, self.error);
        }
        s
    }
}

/// Fits `phi_R = phi_inf + a R^(-beta)`: `beta` from a log-space least-squares
/// fit of successive differences, then `phi_inf` and `a` by linear least
/// squares.
pub fn extrapolate(values: &[(f64, f64)]) -> Result<CapacityEstimate> {
    let mut v: Vec<(f64, f64)> = values.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v.dedup_by(|a, b| a.0 == b.0);
    if v.len() < 3 || v.len() != values.len() {
        return Err(Error::Data("extrapolation needs at least three distinct radii".into()));
    }
    if v.iter().any(|(r, f)| !(*r > 0.0) || !f.is_finite()) {
        return Err(Error::Data("radii must be positive and values finite".into()));
    }
    let scale = v.iter().map(|x| x.1.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let noise = 1e-10 * scale;
    for w in v.windows(2) {
        if w[1].1 > w[0].1 + noise {
            return Err(Error::Data(format!(
                "values increase from {} at R = {} to {} at R = {}",
                w[0].1, w[0].0, w[1].1, w[1].0
            )));
        }
    }
    Ok(fit_decay(v, noise))
}

/// Fit behind [`extrapolate`] without the monotonicity requirement.
/// Differences within `noise` count as a constant sequence; differences of
/// mixed sign leave the rate unresolved.
fn fit_decay(v: Vec<(f64, f64)>, noise: f64) -> CapacityEstimate {
    let last = v[v.len() - 1];
    let diffs: Vec<(f64, f64)> = v.windows(2).map(|w| (w[0].0, w[0].1 - w[1].1)).collect();
    let spread = diffs.iter().map(|d| d.1.abs()).fold(0.0, f64::max);
    let unresolved = |v: Vec<(f64, f64)>, error: f64| CapacityEstimate {
        values: v,
        phi_inf: last.1,
        beta: None,
        error,
    };
    if spread <= noise {
        return unresolved(v, spread);
    }
    let sign = diffs[0].1.signum();
    if diffs.iter().any(|d| d.1 == 0.0 || d.1.signum() != sign) {
        return unresolved(v, spread);
    }
    let pts: Vec<(f64, f64)> = diffs.iter().map(|(r, d)| (r.ln(), d.abs().ln())).collect();
    let beta = -linear_fit(&pts).0;
    if !(beta > 0.0) {
        return unresolved(v, spread);
    }
    let pts: Vec<(f64, f64)> = v.iter().map(|(r, f)| (r.powf(-beta), *f)).collect();
    let (_, phi_inf) = linear_fit(&pts);
    CapacityEstimate {
        error: (last.1 - phi_inf).abs(),
        values: v,
        phi_inf,
        beta: Some(beta),
    }
}

/// Least-squares line `y = slope x + intercept`.
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Solves `problem` at every radius (in parallel) and extrapolates.
pub fn capacity_ladder(problem: &CellProblem, radii: &[f64]) -> Result<CapacityEstimate> {
    let values: Vec<Result<(f64, f64)>> = radii
        .par_iter()
        .map(|&r| Ok((r, solve_cell(&problem.with_radius(r))?)))
        .collect();
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    extrapolate(&values)
}

pub const DEFAULT_RADII: [f64; 3] = [8.0, 16.0, 32.0];

/// Half-space capacity of the unit boundary segment with scalar datum 1 and
/// `F = {0}`: the constant `c` of the boundary penalties.
pub fn boundary_segment_capacity(p: f64, angular: usize) -> Result<CapacityEstimate> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::invalid(format!("exponent must lie in (1, 2), got {p}")));
    }
    let problem = CellProblem {
        angular,
        ..CellProblem::scalar(CellGeometry::HalfBall, CellShape::Segment, p, 8.0)
    };
    capacity_ladder(&problem, &DEFAULT_RADII)
}

/// Capacity of the disk of diameter 1 in the whole plane.
pub fn interior_disk_capacity(p: f64, angular: usize) -> Result<CapacityEstimate> {
    let problem = CellProblem {
        angular,
        ..CellProblem::scalar(CellGeometry::FullBall, CellShape::Disk { radius: 0.5 }, p, 8.0)
    };
    capacity_ladder(&problem, &DEFAULT_RADII)
}

/// Closed-form disk capacity `pi [2 (2 - p) / (p - 1)]^(p - 1)` for disks of
/// diameter 1.
pub fn ball_capacity_formula(p: f64) -> f64 {
    std::f64::consts::PI * (2.0 * (2.0 - p) / (p - 1.0)).powf(p - 1.0)
}

/// Ratio of the half-space to the whole-space capacity of the disk of
/// diameter 1, both extrapolated.
#[derive(Debug, Clone)]
pub struct HalfSpaceCheck {
    pub half: CapacityEstimate,
    pub full: CapacityEstimate,
    pub ratio: f64,
    /// Error bound on the ratio propagated from both extrapolations.
    pub error: f64,
}

pub fn half_space_factor_check(p: f64, angular: usize) -> Result<HalfSpaceCheck> {
    let shape = CellShape::Disk { radius: 0.5 };
    let half = CellProblem {
        angular,
        ..CellProblem::scalar(CellGeometry::HalfBall, shape, p, 8.0)
    };
    let full = CellProblem {
        angular,
        ..CellProblem::scalar(CellGeometry::FullBall, shape, p, 8.0)
    };
    let (h, f) = rayon::join(
        || capacity_ladder(&half, &DEFAULT_RADII),
        || capacity_ladder(&full, &DEFAULT_RADII),
    );
    let (h, f) = (h?, f?);
    let ratio = h.phi_inf / f.phi_inf;
    let error = ratio * (h.error / h.phi_inf.abs() + f.error / f.phi_inf.abs());
    Ok(HalfSpaceCheck {
        half: h,
        full: f,
        ratio,
        error,
    })
}

/// Critical case `p = d = 2`: `kappa^(-1) lim_T log T m_T`, where `m_T` is the
/// Dirichlet energy of the unit disk constrained to `F` inside `B_T`.
#[derive(Debug, Clone)]
pub struct CriticalEstimate {
    /// `(log T, log T m_T)` along the ladder, with the extrapolation in
    /// `log T`.
    pub scaled: CapacityEstimate,
    pub kappa: f64,
    pub phi: f64,
}

pub fn critical_case_density(
    kappa: f64,
    constraint: ConstraintSet,
    datum: Vector,
    dim: usize,
    ladder: &[f64],
    angular: usize,
) -> Result<CriticalEstimate> {
    if !(kappa > 0.0) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    if ladder.iter().any(|&t| t < 10.0) {
        return Err(Error::invalid("the critical ladder needs T >= 10"));
    }
    let base = CellProblem {
        geometry: CellGeometry::FullBall,
        outer_radius: ladder[0],
        shape: CellShape::Disk { radius: 1.0 },
        constraint,
        datum,
        dim,
        recession: RecessionModel { p: 2.0 },
        angular,
        mesh: CellMesh::Native,
    };
    let values: Vec<Result<(f64, f64)>> = ladder
        .par_iter()
        .map(|&t| {
            let m = solve_cell(&base.with_radius(t))?;
            Ok((t.ln(), t.ln() * m))
        })
        .collect();
    let mut values = values.into_iter().collect::<Result<Vec<_>>>()?;
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    values.dedup_by(|a, b| a.0 == b.0);
    if values.len() < 3 {
        return Err(Error::Data(
            "the critical ladder needs at least three distinct radii".into(),
        ));
    }
    // log T m_T is not monotone in general; only discretization-level
    // variation is treated as constant
    let scale = values.iter().map(|x| x.1.abs()).fold(0.0, f64::max);
    let scaled = fit_decay(values, 1e-6 * scale);
    Ok(CriticalEstimate {
        phi: scaled.phi_inf / kappa,
        kappa,
        scaled,
    })
}

/// Rotation sending the outer normal `n` to `(0, -1)`, used to put a boundary
/// cell into the lower half-space.
pub fn normal_rotation(n: [f64; 2]) -> [[f64; 2]; 2] {
    // R n = (0, -1): rows are (-n2, n1) and (-n1, -n2)
    [[-n[1], n[0]], [-n[0], -n[1]]]
}
