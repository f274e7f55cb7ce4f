//! Material and discretization parameters.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Densities, viscosities, Lame-type structure coefficients and the time
/// step. All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams<T> {
    /// fluid density
    pub rho_f: T,
    /// structure density (reference configuration)
    pub rho_s: T,
    /// fluid viscosity
    pub mu_f: T,
    /// structure shear-type coefficient
    pub mu_s: T,
    /// structure volumetric coefficient
    pub lambda_s: T,
    /// time step
    pub k: T,
}

impl<T: Real> MaterialParams<T> {
    pub fn new(rho_f: T, rho_s: T, mu_f: T, mu_s: T, lambda_s: T, k: T) -> Result<Self> {
        let p = MaterialParams { rho_f, rho_s, mu_f, mu_s, lambda_s, k };
        p.validate()?;
        Ok(p)
    }

    /// All coefficients one; handy baseline for the parameter sweeps.
    pub fn unit() -> Self {
        let one = T::one();
        MaterialParams { rho_f: one, rho_s: one, mu_f: one, mu_s: one, lambda_s: one, k: one }
    }

    pub fn with_time_step(mut self, k: T) -> Self {
        self.k = k;
        self
    }

    pub fn with_density_ratio(mut self, ratio: T) -> Self {
        self.rho_s = self.rho_f * ratio;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rho_f", self.rho_f),
            ("rho_s", self.rho_s),
            ("mu_f", self.mu_f),
            ("mu_s", self.mu_s),
            ("lambda_s", self.lambda_s),
            ("k", self.k),
        ];
        for (name, v) in fields {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
