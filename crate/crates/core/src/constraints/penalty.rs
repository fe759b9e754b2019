use super::ConstraintSet;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// `(1 + tanh(k tau)) / 2`.
pub fn smooth_step(tau: f64, k: f64) -> f64 {
    0.5 * (1.0 + (k * tau).tanh())
}

/// Relaxed constraint density `phi(x, z) = c dist(z, F_x)^p`.
///
/// For a half-plane with `step_sharpness = Some(k)` the one-sided distance is
/// replaced by `H_k(tau) |tau|^p` where `tau = offset - <n, z + x>` is the
/// signed violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyDensity {
    pub c: f64,
    pub p: f64,
    pub constraint: ConstraintSet,
    /// Whether `c` already carries the half-space factor of boundary
    /// perforations. Informational only.
    pub boundary_flag: bool,
    pub step_sharpness: Option<f64>,
}

impl PenaltyDensity {
    pub fn new(c: f64, p: f64, constraint: ConstraintSet) -> Result<Self> {
        let d = Self {
            c,
            p,
            constraint,
            boundary_flag: false,
            step_sharpness: None,
        };
        d.check()?;
        Ok(d)
    }

    pub fn with_step(mut self, k: f64) -> Result<Self> {
        self.step_sharpness = Some(k);
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::invalid(format!(
                "penalty constant must be positive, got {}",
                self.c
            )));
        }
        if !(self.p > 1.0) {
            return Err(Error::invalid(format!(
                "penalty exponent must exceed 1, got {}",
                self.p
            )));
        }
        if let Some(k) = self.step_sharpness {
            if !(k > 0.0) {
                return Err(Error::invalid(format!("step sharpness must be positive, got {k}")));
            }
            if !matches!(self.constraint, ConstraintSet::HalfPlane { .. }) {
                return Err(Error::invalid("a smoothed step applies to half-plane constraints only"));
            }
        }
        Ok(())
    }

    fn violation(&self, x: Point, z: &[f64]) -> Option<(f64, Point)> {
        match (self.step_sharpness, self.constraint) {
            (Some(_), ConstraintSet::HalfPlane { normal, offset }) => {
                let s = normal[0] * (z[0] + x[0]) + normal[1] * (z[1] + x[1]);
                Some((offset - s, normal))
            }
            _ => None,
        }
    }

    /// Exact density value.
    pub fn eval(&self, x: Point, z: &[f64]) -> f64 {
        if let Some((tau, _)) = self.violation(x, z) {
            let k = self.step_sharpness.unwrap_or(0.0);
            return self.c * smooth_step(tau, k) * tau.abs().powf(self.p);
        }
        let d = self.constraint.distance(x, z);
        if d == 0.0 {
            0.0
        } else {
            self.c * d.powf(self.p)
        }
    }

    /// Regularized value `c ((d^2 + eta^2)^(p/2) - eta^p)` and its gradient in
    /// `z`, written into `grad` (length `z.len()`).
    pub fn eval_regularized(&self, x: Point, z: &[f64], eta: f64, grad: &mut [f64]) -> f64 {
        let p = self.p;
        let eta_p = eta.powf(p);
        if let Some((tau, normal)) = self.violation(x, z) {
            let k = self.step_sharpness.unwrap_or(0.0);
            let h = smooth_step(tau, k);
            let dh = 2.0 * k * h * (1.0 - h);
            let r2 = tau * tau + eta * eta;
            let g = r2.powf(0.5 * p) - eta_p;
            let dg = p * tau * r2.powf(0.5 * p - 1.0);
            let dtau = self.c * (dh * g + h * dg);
            grad.iter_mut().for_each(|v| *v = 0.0);
            grad[0] = -dtau * normal[0];
            grad[1] = -dtau * normal[1];
            return self.c * h * g;
        }
        let proj = self.constraint.project(x, z).z;
        let mut d2 = 0.0;
        for i in 0..z.len() {
            let r = z[i] - proj[i];
            grad[i] = r;
            d2 += r * r;
        }
        let r2 = d2 + eta * eta;
        let w = self.c * p * r2.powf(0.5 * p - 1.0);
        grad.iter_mut().for_each(|v| *v *= w);
        self.c * (r2.powf(0.5 * p) - eta_p)
    }
}
