use std::sync::Arc;

use super::locate::Locator;
use super::mesh::Mesh;
use super::primitives::Point;
use crate::error::{Error, Result};

/// Piecewise-affine vector field with one `dim`-vector per mesh vertex.
#[derive(Debug, Clone)]
pub struct DisplacementField {
    mesh: Arc<Mesh>,
    dim: usize,
    values: Vec<f64>,
}

impl DisplacementField {
    pub fn zeros(mesh: Arc<Mesh>, dim: usize) -> Self {
        let n = mesh.n_vertices() * dim;
        Self {
            mesh,
            dim,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(mesh: Arc<Mesh>, dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid(format!("field dimension must be 1, 2 or 3, got {dim}")));
        }
        if values.len() != mesh.n_vertices() * dim {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                mesh.n_vertices() * dim,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field values must be finite"));
        }
        Ok(Self { mesh, dim, values })
    }

    /// Nodal interpolant of `f`.
    pub fn from_fn(mesh: Arc<Mesh>, dim: usize, f: impl Fn(Point) -> [f64; 3]) -> Self {
        let mut values = Vec::with_capacity(mesh.n_vertices() * dim);
        for &p in mesh.vertices() {
            values.extend_from_slice(&f(p)[..dim]);
        }
        Self { mesh, dim, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, v: usize) -> &[f64] {
        &self.values[v * self.dim..(v + 1) * self.dim]
    }

    /// Constant gradient on triangle `t` as a `dim x 2` matrix (padded to 3 rows).
    pub fn gradient(&self, t: usize) -> [[f64; 2]; 3] {
        let (g, _) = self.mesh.shape_gradients(t);
        let tri = self.mesh.triangles()[t];
        let mut out = [[0.0; 2]; 3];
        for (k, &v) in tri.iter().enumerate() {
            for (row, &u) in out.iter_mut().zip(&self.values[v * self.dim..(v + 1) * self.dim]) {
                row[0] += u * g[k][0];
                row[1] += u * g[k][1];
            }
        }
        out
    }

    /// Value at `p` using a locator built on this field's mesh.
    pub fn eval_with(&self, locator: &Locator<'_>, p: Point) -> Option<[f64; 3]> {
        let (t, l) = locator.locate(p)?;
        let tri = self.mesh.triangles()[t];
        let mut out = [0.0; 3];
        for (&v, &w) in tri.iter().zip(&l) {
            for (o, &u) in out.iter_mut().zip(&self.values[v * self.dim..(v + 1) * self.dim]) {
                *o += w * u;
            }
        }
        Some(out)
    }

    /// Interpolates this field at the vertices of `target`, with `dim`
    /// components (missing components are zero).
    pub fn interpolate_to(&self, target: Arc<Mesh>, dim: usize) -> Result<Self> {
        let loc = Locator::new(&self.mesh);
        let mut values = Vec::with_capacity(target.n_vertices() * dim);
        for &p in target.vertices() {
            let v = self
                .eval_with(&loc, p)
                .ok_or_else(|| Error::invalid(format!("point ({}, {}) lies outside the source mesh", p[0], p[1])))?;
            values.extend_from_slice(&v[..dim]);
        }
        Self::from_values(target, dim, values)
    }
}
