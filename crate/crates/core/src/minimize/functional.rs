use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::constraints::{ConstraintSet, PenaltyDensity, Vector};
use crate::error::{Error, Result};
use crate::geometry::primitives::dist;
use crate::geometry::{BoundaryTag, DisplacementField, Locator, Mesh, Point};
use crate::materials::{EnergyModel, Mat32};

/// Triangles per assembly chunk. Fixed so the reduction order does not depend
/// on the thread count.
const CHUNK: usize = 2048;

/// Default regularization of the penalty densities.
pub const PENALTY_ETA: f64 = 1e-8;

/// Unknown in which the functional is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    /// Displacement `u`; constraint sets are read as `F_x`.
    #[default]
    Displacement,
    /// Deformation `y = x + u`; constraint sets are read untranslated.
    Deformation,
}

/// Integration region of a penalty term.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyRegion {
    /// Whole domain, one point per triangle at its barycenter.
    Cells,
    /// Boundary edges carrying one of the tags, one point per edge midpoint.
    BoundaryEdges(Vec<BoundaryTag>),
    /// Straight segment through the mesh, split at every edge crossing and
    /// integrated with the midpoint rule on each piece.
    Segment { a: Point, b: Point },
}

/// Penalty integral `int phi(x, u(x)) rho(x)` over a region.
#[derive(Debug, Clone)]
pub struct PenaltyTerm {
    pub region: PenaltyRegion,
    pub density: PenaltyDensity,
}

/// Quadrature point of a penalty term.
#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadPoint {
    pub term: usize,
    pub verts: [usize; 3],
    pub bary: [f64; 3],
    pub x: Point,
    /// Measure times density weight.
    pub weight: f64,
    /// Constraint of the density at `x`.
    pub constraint: ConstraintSet,
}

/// Vertex tied to a constraint set read at `site`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardConstraint {
    pub vertex: usize,
    pub constraint: ConstraintSet,
    pub site: Point,
}

/// Piecewise-affine discretization of
/// `int sigma(grad u) + sum_k int phi_k(x, u) rho_k` with Dirichlet values
/// and pointwise constraints at vertices.
#[derive(Debug, Clone)]
pub struct DiscreteFunctional {
    mesh: Arc<Mesh>,
    model: EnergyModel,
    dim: usize,
    frame: Frame,
    penalty_eta: f64,
    dirichlet: BTreeMap<usize, Vector>,
    hard: BTreeMap<usize, HardConstraint>,
    terms: Vec<PenaltyTerm>,
    quad: Vec<QuadPoint>,
    shape: Vec<([[f64; 2]; 3], f64)>,
}

/// Constraint and evaluation site to use in `frame` for a set sited at `x`.
pub(crate) fn frame_constraint(frame: Frame, c: ConstraintSet, x: Point) -> (ConstraintSet, Point) {
    match frame {
        Frame::Displacement => (c, x),
        Frame::Deformation => match c {
            ConstraintSet::PointTarget { v } => (
                ConstraintSet::PointTarget {
                    v: [v[0] + x[0], v[1] + x[1], v[2]],
                },
                [0.0, 0.0],
            ),
            other => (other, [0.0, 0.0]),
        },
    }
}

impl DiscreteFunctional {
    pub fn new(mesh: Arc<Mesh>, model: EnergyModel, dim: usize) -> Result<Self> {
        model.check()?;
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid(format!("field dimension must be 1, 2 or 3, got {dim}")));
        }
        if model.uses_deformation_gradient() && dim != 2 {
            return Err(Error::invalid("the neo-Hookean density needs two-component fields"));
        }
        let shape = (0..mesh.n_triangles()).map(|t| mesh.shape_gradients(t)).collect();
        Ok(Self {
            mesh,
            model,
            dim,
            frame: Frame::Displacement,
            penalty_eta: PENALTY_ETA,
            dirichlet: BTreeMap::new(),
            hard: BTreeMap::new(),
            terms: Vec::new(),
            quad: Vec::new(),
            shape,
        })
    }

    /// Switches the unknown to the deformation. Must be called before any
    /// Dirichlet value, constraint or penalty is added.
    pub fn with_frame(mut self, frame: Frame) -> Result<Self> {
        if !self.dirichlet.is_empty() || !self.hard.is_empty() || !self.terms.is_empty() {
            return Err(Error::invalid("the frame must be chosen before adding data"));
        }
        if frame == Frame::Deformation && self.dim < 2 {
            return Err(Error::invalid("deformation frame needs at least two components"));
        }
        self.frame = frame;
        Ok(self)
    }

    pub fn with_penalty_eta(mut self, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::invalid(format!(
                "penalty regularization must be positive, got {eta}"
            )));
        }
        self.penalty_eta = eta;
        Ok(self)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn model(&self) -> &EnergyModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn penalty_eta(&self) -> f64 {
        self.penalty_eta
    }

    pub fn terms(&self) -> &[PenaltyTerm] {
        &self.terms
    }

    pub(crate) fn quad(&self) -> &[QuadPoint] {
        &self.quad
    }

    pub(crate) fn shape(&self) -> &[([[f64; 2]; 3], f64)] {
        &self.shape
    }

    /// Dirichlet values in the functional's own unknown.
    pub fn dirichlet(&self) -> &BTreeMap<usize, Vector> {
        &self.dirichlet
    }

    pub fn hard_constraints(&self) -> &BTreeMap<usize, HardConstraint> {
        &self.hard
    }

    /// Prescribes the displacement `value` at `vertex`.
    pub fn set_dirichlet(&mut self, vertex: usize, value: Vector) -> Result<()> {
        if vertex >= self.mesh.n_vertices() {
            return Err(Error::invalid(format!("vertex {vertex} is out of range")));
        }
        if self.hard.contains_key(&vertex) {
            return Err(Error::invalid(format!(
                "vertex {vertex} already carries a hard constraint"
            )));
        }
        let mut v = [0.0; 3];
        v[..self.dim].copy_from_slice(&value[..self.dim]);
        if self.frame == Frame::Deformation {
            let x = self.mesh.vertices()[vertex];
            v[0] += x[0];
            v[1] += x[1];
        }
        self.dirichlet.insert(vertex, v);
        Ok(())
    }

    /// Prescribes `value(x)` on every vertex of the tagged boundary edges and
    /// returns the number of vertices touched.
    pub fn dirichlet_on_tags(&mut self, tags: &[BoundaryTag], value: impl Fn(Point) -> Vector) -> Result<usize> {
        let verts = self.mesh.vertices_with_tags(tags);
        for &v in &verts {
            let x = self.mesh.vertices()[v];
            self.set_dirichlet(v, value(x))?;
        }
        Ok(verts.len())
    }

    pub fn add_hard_constraint(&mut self, vertex: usize, constraint: ConstraintSet, site: Point) -> Result<()> {
        if vertex >= self.mesh.n_vertices() {
            return Err(Error::invalid(format!("vertex {vertex} is out of range")));
        }
        if self.dirichlet.contains_key(&vertex) {
            return Err(Error::invalid(format!(
                "vertex {vertex} already carries a Dirichlet value"
            )));
        }
        constraint.check(self.dim)?;
        self.hard.insert(
            vertex,
            HardConstraint {
                vertex,
                constraint,
                site,
            },
        );
        Ok(())
    }

    /// Adds the penalty `int_region phi(x, u) rho(x)`.
    pub fn add_penalty(
        &mut self,
        region: PenaltyRegion,
        density: PenaltyDensity,
        rho: impl Fn(Point) -> f64,
    ) -> Result<()> {
        let c = density.constraint;
        self.add_penalty_family(region, density, move |_| c, rho)
    }

    /// As [`add_penalty`](Self::add_penalty), with the constraint of the
    /// density replaced by `family(x)` at each quadrature point.
    pub fn add_penalty_family(
        &mut self,
        region: PenaltyRegion,
        density: PenaltyDensity,
        family: impl Fn(Point) -> ConstraintSet,
        rho: impl Fn(Point) -> f64,
    ) -> Result<()> {
        density.check()?;
        density.constraint.check(self.dim)?;
        let placeholder = density.constraint;
        let term = self.terms.len();
        let mesh = self.mesh.clone();
        let mut points = Vec::new();
        match &region {
            PenaltyRegion::Cells => {
                for t in 0..mesh.n_triangles() {
                    let tri = mesh.triangles()[t];
                    let third = 1.0 / 3.0;
                    points.push(QuadPoint {
                        term,
                        verts: tri,
                        bary: [third; 3],
                        x: mesh.centroid(t),
                        weight: mesh.triangle_area(t),
                        constraint: placeholder,
                    });
                }
            }
            PenaltyRegion::BoundaryEdges(tags) => {
                for e in mesh.boundary_edges().iter().filter(|e| tags.contains(&e.tag)) {
                    let [a, b] = e.vertices;
                    let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
                    points.push(QuadPoint {
                        term,
                        verts: [a, b, b],
                        bary: [0.5, 0.5, 0.0],
                        x: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                        weight: dist(pa, pb),
                        constraint: placeholder,
                    });
                }
                if points.is_empty() {
                    return Err(Error::invalid(format!("no boundary edges carry the tags {tags:?}")));
                }
            }
            PenaltyRegion::Segment { a, b } => {
                points = segment_quadrature(&mesh, *a, *b, term)?;
            }
        }
        for q in points.iter_mut() {
            let r = rho(q.x);
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::invalid(format!(
                    "density weight must be positive, got {r} at ({}, {})",
                    q.x[0], q.x[1]
                )));
            }
            q.weight *= r;
            q.constraint = family(q.x);
            q.constraint.check(self.dim)?;
        }
        self.quad.extend(points);
        self.terms.push(PenaltyTerm { region, density });
        Ok(())
    }

    /// Checks that the problem cannot slide along a translation: some
    /// Dirichlet value, hard constraint or penalty must be present.
    pub fn check(&self) -> Result<()> {
        if self.dirichlet.is_empty() && self.hard.is_empty() && self.terms.is_empty() {
            return Err(Error::IllPosed(
                "no Dirichlet values, constraints or penalties: the energy is translation invariant".into(),
            ));
        }
        Ok(())
    }

    fn elastic_offset(&self) -> f64 {
        let own = if self.model.uses_deformation_gradient() {
            1.0
        } else {
            0.0
        };
        let frame = if self.frame == Frame::Deformation { 1.0 } else { 0.0 };
        own - frame
    }

    fn check_values(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.mesh.n_vertices() * self.dim {
            return Err(Error::invalid(format!(
                "field has {} values, the functional expects {}",
                values.len(),
                self.mesh.n_vertices() * self.dim
            )));
        }
        Ok(())
    }

    /// Matrix passed to the density on triangle `t`.
    pub(crate) fn strain(&self, values: &[f64], t: usize, offset: f64) -> Mat32 {
        let tri = self.mesh.triangles()[t];
        let g = &self.shape[t].0;
        let mut xi = [[0.0; 2]; 3];
        for (k, &v) in tri.iter().enumerate() {
            for i in 0..self.dim {
                let u = values[v * self.dim + i];
                xi[i][0] += u * g[k][0];
                xi[i][1] += u * g[k][1];
            }
        }
        xi[0][0] += offset;
        xi[1][1] += offset;
        xi
    }

    /// Value of the field at a quadrature point.
    pub(crate) fn quad_value(&self, values: &[f64], q: &QuadPoint) -> Vector {
        let mut z = [0.0; 3];
        for k in 0..3 {
            if q.bary[k] == 0.0 {
                continue;
            }
            for i in 0..self.dim {
                z[i] += q.bary[k] * values[q.verts[k] * self.dim + i];
            }
        }
        z
    }

    /// Elastic energy and, if requested, its gradient accumulated into `grad`.
    fn elastic(&self, values: &[f64], grad: Option<&mut [f64]>) -> Result<f64> {
        let offset = self.elastic_offset();
        let n_tri = self.mesh.n_triangles();
        let want_grad = grad.is_some();
        let chunks: Vec<Result<(f64, Vec<[f64; 9]>)>> = (0..n_tri.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let range = c * CHUNK..((c + 1) * CHUNK).min(n_tri);
                let mut e = 0.0;
                let mut local = if want_grad {
                    Vec::with_capacity(range.len())
                } else {
                    Vec::new()
                };
                for t in range {
                    let xi = self.strain(values, t, offset);
                    let (g, area) = &self.shape[t];
                    if want_grad {
                        let (w, dw) = self.model.density_and_gradient(&xi)?;
                        e += area * w;
                        let mut out = [0.0; 9];
                        for k in 0..3 {
                            for i in 0..self.dim {
                                out[3 * k + i] = area * (dw[i][0] * g[k][0] + dw[i][1] * g[k][1]);
                            }
                        }
                        local.push(out);
                    } else {
                        e += area * self.model.density(&xi)?;
                    }
                }
                Ok((e, local))
            })
            .collect();
        let mut energy = 0.0;
        let mut t = 0;
        let mut grad = grad;
        for chunk in chunks {
            let (e, local) = chunk?;
            energy += e;
            if let Some(grad) = grad.as_deref_mut() {
                for out in local {
                    let tri = self.mesh.triangles()[t];
                    for k in 0..3 {
                        for i in 0..self.dim {
                            grad[tri[k] * self.dim + i] += out[3 * k + i];
                        }
                    }
                    t += 1;
                }
            }
        }
        Ok(energy)
    }

    /// Penalty energy and, if requested, its gradient accumulated into `grad`.
    fn penalty(&self, values: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let mut energy = 0.0;
        let mut gz = [0.0; 3];
        for q in &self.quad {
            let z = self.quad_value(values, q);
            let mut density = self.terms[q.term].density;
            let (c, x) = frame_constraint(self.frame, q.constraint, q.x);
            density.constraint = c;
            let e = density.eval_regularized(x, &z[..self.dim], self.penalty_eta, &mut gz[..self.dim]);
            energy += q.weight * e;
            if let Some(grad) = grad.as_deref_mut() {
                for k in 0..3 {
                    if q.bary[k] == 0.0 {
                        continue;
                    }
                    for i in 0..self.dim {
                        grad[q.verts[k] * self.dim + i] += q.weight * q.bary[k] * gz[i];
                    }
                }
            }
        }
        energy
    }

    /// Area-weighted projected tangents per triangle, for models whose
    /// curvature couples the field components; `None` otherwise.
    pub(crate) fn element_tangents(&self, values: &[f64]) -> Option<Vec<[[f64; 4]; 4]>> {
        if self.model.kind != crate::materials::ModelKind::NeoHookean || self.dim != 2 {
            return None;
        }
        let offset = self.elastic_offset();
        (0..self.mesh.n_triangles())
            .map(|t| {
                let mut h = self.model.projected_tangent(&self.strain(values, t, offset), 1e-4)?;
                h.iter_mut().flatten().for_each(|v| *v *= self.shape[t].1);
                Some(h)
            })
            .collect()
    }

    /// Isotropic curvature weights for the preconditioner: one per triangle
    /// (already multiplied by the area) and one per penalty quadrature point
    /// (already multiplied by the quadrature weight).
    pub(crate) fn curvature_weights(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let offset = self.elastic_offset();
        let n_tri = self.mesh.n_triangles();
        let strains: Vec<Mat32> = (0..n_tri).map(|t| self.strain(values, t, offset)).collect();
        let (mut s2, mut area) = (0.0, 0.0);
        for (t, xi) in strains.iter().enumerate() {
            s2 += self.shape[t].1 * crate::materials::frob2(xi);
            area += self.shape[t].1;
        }
        let floor = 1e-3 * (s2 / area.max(f64::MIN_POSITIVE)).sqrt();
        let tri: Vec<f64> = strains
            .iter()
            .enumerate()
            .map(|(t, xi)| self.shape[t].1 * self.model.tangent_weight(xi, floor))
            .collect();

        let dists: Vec<(f64, f64)> = self
            .quad
            .iter()
            .map(|q| {
                let z = self.quad_value(values, q);
                let d = &self.terms[q.term].density;
                let (c, x) = frame_constraint(self.frame, q.constraint, q.x);
                match (d.step_sharpness, c) {
                    (Some(k), ConstraintSet::HalfPlane { normal, offset }) => {
                        let tau = offset - normal[0] * (z[0] + x[0]) - normal[1] * (z[1] + x[1]);
                        (tau, crate::constraints::smooth_step(tau, k))
                    }
                    _ => (c.distance(x, &z[..self.dim]), 1.0),
                }
            })
            .collect();
        let rms = if dists.is_empty() {
            0.0
        } else {
            (dists.iter().map(|(d, _)| d * d).sum::<f64>() / dists.len() as f64).sqrt()
        };
        let pfloor = (1e-3 * rms).max(self.penalty_eta);
        let quad = self
            .quad
            .iter()
            .zip(&dists)
            .map(|(q, &(d, h))| {
                let dens = &self.terms[q.term].density;
                q.weight * h * dens.c * dens.p * (d * d + pfloor * pfloor).powf(0.5 * dens.p - 1.0)
            })
            .collect();
        (tri, quad)
    }

    /// Energy and full gradient (no rows zeroed) of the raw nodal values.
    pub(crate) fn energy_and_gradient(&self, values: &[f64], grad: &mut [f64]) -> Result<f64> {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let e = self.elastic(values, Some(grad))?;
        Ok(e + self.penalty(values, Some(grad)))
    }

    pub(crate) fn energy_values(&self, values: &[f64]) -> Result<f64> {
        Ok(self.elastic(values, None)? + self.penalty(values, None))
    }

    /// Energy of `u` and its gradient with Dirichlet rows zeroed.
    pub fn assemble(&self, u: &DisplacementField) -> Result<(f64, Vec<f64>)> {
        self.check_field(u)?;
        let mut grad = vec![0.0; u.values().len()];
        let e = self.energy_and_gradient(u.values(), &mut grad)?;
        for &v in self.dirichlet.keys() {
            for i in 0..self.dim {
                grad[v * self.dim + i] = 0.0;
            }
        }
        Ok((e, grad))
    }

    pub fn energy(&self, u: &DisplacementField) -> Result<f64> {
        self.check_field(u)?;
        self.energy_values(u.values())
    }

    /// Elastic and penalty parts of the energy.
    pub fn energy_parts(&self, u: &DisplacementField) -> Result<(f64, f64)> {
        self.check_field(u)?;
        Ok((self.elastic(u.values(), None)?, self.penalty(u.values(), None)))
    }

    /// Smallest Jacobian determinant of the deformation over all triangles.
    pub fn min_jacobian(&self, u: &DisplacementField) -> Result<f64> {
        self.check_field(u)?;
        if self.dim < 2 {
            return Err(Error::invalid("Jacobians need two-component fields"));
        }
        let offset = if self.frame == Frame::Deformation { 0.0 } else { 1.0 };
        Ok((0..self.mesh.n_triangles())
            .map(|t| {
                let f = self.strain(u.values(), t, offset);
                f[0][0] * f[1][1] - f[0][1] * f[1][0]
            })
            .fold(f64::INFINITY, f64::min))
    }

    fn check_field(&self, u: &DisplacementField) -> Result<()> {
        if u.dim() != self.dim {
            return Err(Error::invalid(format!(
                "field has {} components, the functional expects {}",
                u.dim(),
                self.dim
            )));
        }
        if !Arc::ptr_eq(u.mesh(), &self.mesh) && u.mesh().vertices() != self.mesh.vertices() {
            return Err(Error::invalid("field does not live on the functional's mesh"));
        }
        self.check_values(u.values())
    }

    /// Converts a solution in this functional's frame to a displacement.
    pub fn to_displacement(&self, y: &DisplacementField) -> Result<DisplacementField> {
        self.check_field(y)?;
        match self.frame {
            Frame::Displacement => Ok(y.clone()),
            Frame::Deformation => {
                let mut out = y.clone();
                for (v, x) in self.mesh.vertices().iter().enumerate() {
                    out.values_mut()[v * self.dim] -= x[0];
                    out.values_mut()[v * self.dim + 1] -= x[1];
                }
                Ok(out)
            }
        }
    }

    /// Converts a displacement into this functional's unknown.
    pub fn from_displacement(&self, u: &DisplacementField) -> Result<DisplacementField> {
        self.check_field(u)?;
        match self.frame {
            Frame::Displacement => Ok(u.clone()),
            Frame::Deformation => {
                let mut out = u.clone();
                for (v, x) in self.mesh.vertices().iter().enumerate() {
                    out.values_mut()[v * self.dim] += x[0];
                    out.values_mut()[v * self.dim + 1] += x[1];
                }
                Ok(out)
            }
        }
    }
}

/// Pieces of `[a, b]` between consecutive mesh-edge crossings, each with a
/// midpoint quadrature point.
fn segment_quadrature(mesh: &Mesh, a: Point, b: Point, term: usize) -> Result<Vec<QuadPoint>> {
    let len = dist(a, b);
    if !(len > 0.0) {
        return Err(Error::invalid("penalty segment has zero length"));
    }
    if !mesh.contains(a) || !mesh.contains(b) {
        return Err(Error::invalid("penalty segment leaves the mesh"));
    }
    let d = [b[0] - a[0], b[1] - a[1]];
    let mut params = vec![0.0, 1.0];
    for [p, q] in mesh.edges() {
        let (p, q) = (mesh.vertices()[p], mesh.vertices()[q]);
        let e = [q[0] - p[0], q[1] - p[1]];
        let den = d[0] * e[1] - d[1] * e[0];
        let w = [p[0] - a[0], p[1] - a[1]];
        if den.abs() <= 1e-14 * len * dist(p, q) {
            // parallel: only collinear edges contribute their endpoints
            let off = (w[0] * d[1] - w[1] * d[0]).abs() / len;
            if off <= 1e-12 * len {
                for r in [p, q] {
                    let t = ((r[0] - a[0]) * d[0] + (r[1] - a[1]) * d[1]) / (len * len);
                    if t > 0.0 && t < 1.0 {
                        params.push(t);
                    }
                }
            }
            continue;
        }
        let t = (w[0] * e[1] - w[1] * e[0]) / den;
        let s = (w[0] * d[1] - w[1] * d[0]) / den;
        if t > 0.0 && t < 1.0 && (-1e-12..=1.0 + 1e-12).contains(&s) {
            params.push(t);
        }
    }
    params.sort_by(|x, y| x.total_cmp(y));
    params.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
    let loc = Locator::new(mesh);
    let mut out = Vec::with_capacity(params.len());
    for w in params.windows(2) {
        let h = w[1] - w[0];
        if h <= 0.0 {
            continue;
        }
        let t = 0.5 * (w[0] + w[1]);
        let x = [a[0] + t * d[0], a[1] + t * d[1]];
        let (tri, bary) = loc
            .locate(x)
            .ok_or_else(|| Error::invalid("penalty segment leaves the mesh"))?;
        out.push(QuadPoint {
            term,
            verts: mesh.triangles()[tri],
            bary,
            x,
            weight: h * len,
            // replaced by the caller
            constraint: ConstraintSet::PointTarget { v: [0.0; 3] },
        });
    }
    Ok(out)
}
