//! Stored-energy densities and their recession functions.
//!
//! Matrices are `m x 2` displacement (or deformation) gradients stored as
//! three rows; rows beyond the field dimension are zero.

use crate::error::{Error, Result};

pub type Mat32 = [[f64; 2]; 3];

pub const DEFAULT_ETA: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `(|xi|^2 + eta^2)^(p/2) - eta^p`.
    PNorm,
    /// Compressible neo-Hookean density of the deformation gradient.
    NeoHookean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub kind: ModelKind,
    pub p: f64,
    pub mu: f64,
    pub lambda: f64,
    pub eta: f64,
}

/// Positively `p`-homogeneous recession density `|xi|^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecessionModel {
    pub p: f64,
}

impl RecessionModel {
    pub fn density(&self, xi: &Mat32) -> f64 {
        frob2(xi).sqrt().powf(self.p)
    }

    /// Regularized copy usable by the minimizer.
    pub fn as_energy(&self, eta: f64) -> Result<EnergyModel> {
        EnergyModel::p_norm_with_eta(self.p, eta)
    }
}

#[inline]
pub fn frob2(xi: &Mat32) -> f64 {
    xi.iter().map(|r| r[0] * r[0] + r[1] * r[1]).sum()
}

impl EnergyModel {
    pub fn p_norm(p: f64) -> Result<Self> {
        Self::p_norm_with_eta(p, DEFAULT_ETA)
    }

    pub fn p_norm_with_eta(p: f64, eta: f64) -> Result<Self> {
        let m = Self {
            kind: ModelKind::PNorm,
            p,
            mu: 0.0,
            lambda: 0.0,
            eta,
        };
        m.check()?;
        Ok(m)
    }

    pub fn neo_hookean(mu: f64, lambda: f64) -> Result<Self> {
        let m = Self {
            kind: ModelKind::NeoHookean,
            p: 2.0,
            mu,
            lambda,
            eta: DEFAULT_ETA,
        };
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::invalid(format!(
                "regularization must be positive, got {}",
                self.eta
            )));
        }
        match self.kind {
            ModelKind::PNorm => {
                if !(self.p > 1.0 && self.p <= 2.0) {
                    return Err(Error::invalid(format!(
                        "growth exponent must lie in (1, 2], got {}",
                        self.p
                    )));
                }
            }
            ModelKind::NeoHookean => {
                if !(self.mu > 0.0) || !(self.lambda >= 0.0) {
                    return Err(Error::invalid(format!(
                        "neo-Hookean constants need mu > 0 and lambda >= 0 (mu={}, lambda={})",
                        self.mu, self.lambda
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether the density acts on the deformation gradient `I + grad u`
    /// rather than on `grad u`.
    pub fn uses_deformation_gradient(&self) -> bool {
        self.kind == ModelKind::NeoHookean
    }

    pub fn density(&self, xi: &Mat32) -> Result<f64> {
        match self.kind {
            ModelKind::PNorm => {
                let r2 = frob2(xi) + self.eta * self.eta;
                Ok(r2.powf(0.5 * self.p) - self.eta.powf(self.p))
            }
            ModelKind::NeoHookean => {
                let j = det2(xi)?;
                let lj = j.ln();
                Ok(0.5 * self.mu * (frob2(xi) - 2.0 - 2.0 * lj) + 0.5 * self.lambda * lj * lj)
            }
        }
    }

    pub fn density_gradient(&self, xi: &Mat32) -> Result<Mat32> {
        Ok(self.density_and_gradient(xi)?.1)
    }

    pub fn density_and_gradient(&self, xi: &Mat32) -> Result<(f64, Mat32)> {
        match self.kind {
            ModelKind::PNorm => {
                let r2 = frob2(xi) + self.eta * self.eta;
                let w = self.p * r2.powf(0.5 * self.p - 1.0);
                let mut g = *xi;
                for r in g.iter_mut() {
                    r[0] *= w;
                    r[1] *= w;
                }
                Ok((r2.powf(0.5 * self.p) - self.eta.powf(self.p), g))
            }
            ModelKind::NeoHookean => {
                let j = det2(xi)?;
                let lj = j.ln();
                let inv_t = [[xi[1][1] / j, -xi[1][0] / j], [-xi[0][1] / j, xi[0][0] / j]];
                let mut g = [[0.0; 2]; 3];
                let s = self.lambda * lj - self.mu;
                for i in 0..2 {
                    for k in 0..2 {
                        g[i][k] = self.mu * xi[i][k] + s * inv_t[i][k];
                    }
                }
                let e = 0.5 * self.mu * (frob2(xi) - 2.0 - 2.0 * lj) + 0.5 * self.lambda * lj * lj;
                Ok((e, g))
            }
        }
    }

    /// Isotropic curvature weight used to build preconditioners: the
    /// secant coefficient `p (|xi|^2 + floor^2)^((p-2)/2)` for the norm
    /// density and `mu + psi''(J) |F|^2 / 2` for neo-Hookean, with `psi` the
    /// volumetric part, whose curvature acts along `cof F`.
    pub fn tangent_weight(&self, xi: &Mat32, floor: f64) -> f64 {
        match self.kind {
            ModelKind::PNorm => {
                let f = floor.max(self.eta);
                self.p * (frob2(xi) + f * f).powf(0.5 * self.p - 1.0)
            }
            ModelKind::NeoHookean => {
                let j = xi[0][0] * xi[1][1] - xi[0][1] * xi[1][0];
                if !(j > 0.0) {
                    return self.mu + self.lambda;
                }
                let vol = (self.lambda * (1.0 - j.ln()) + self.mu) / (j * j);
                self.mu + 0.5 * vol.max(0.0) * frob2(xi)
            }
        }
    }

    /// Second derivative of the neo-Hookean density as a 4 x 4 matrix over
    /// `(F11, F12, F21, F22)`, with eigenvalues clamped below at `floor * mu`.
    /// `None` for the norm density or when `J <= 0`.
    pub fn projected_tangent(&self, xi: &Mat32, floor: f64) -> Option<[[f64; 4]; 4]> {
        if self.kind != ModelKind::NeoHookean {
            return None;
        }
        let j = xi[0][0] * xi[1][1] - xi[0][1] * xi[1][0];
        if !(j > 0.0) {
            return None;
        }
        let inv = [[xi[1][1] / j, -xi[0][1] / j], [-xi[1][0] / j, xi[0][0] / j]];
        let c = self.mu - self.lambda * j.ln();
        let h = faer::Mat::<f64>::from_fn(4, 4, |a, b| {
            let (i, l) = (a / 2, a % 2);
            let (m, k) = (b / 2, b % 2);
            let id = if a == b { self.mu } else { 0.0 };
            id + self.lambda * inv[l][i] * inv[k][m] + c * inv[k][i] * inv[l][m]
        });
        let eig = h.self_adjoint_eigen(faer::Side::Lower).ok()?;
        let (u, d) = (eig.U(), eig.S().column_vector());
        let lo = floor * self.mu;
        let mut out = [[0.0; 4]; 4];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|e| u[(a, e)] * d[e].abs().max(lo) * u[(b, e)]).sum();
            }
        }
        Some(out)
    }

    pub fn recession(&self) -> Result<RecessionModel> {
        match self.kind {
            ModelKind::PNorm => Ok(RecessionModel { p: self.p }),
            ModelKind::NeoHookean => Err(Error::NotImplemented(
                "the neo-Hookean density has no p-growth recession; use the critical-case density instead".into(),
            )),
        }
    }
}

fn det2(xi: &Mat32) -> Result<f64> {
    if xi[2][0] != 0.0 || xi[2][1] != 0.0 {
        return Err(Error::invalid("neo-Hookean density needs a 2 x 2 gradient"));
    }
    let j = xi[0][0] * xi[1][1] - xi[0][1] * xi[1][0];
    if !(j > 0.0) {
        return Err(Error::InadmissibleState(format!(
            "deformation gradient has J = {j:.3e}"
        )));
    }
    Ok(j)
}
