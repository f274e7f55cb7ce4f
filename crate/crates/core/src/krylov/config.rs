//! Plain-text solver configuration.
//!
//! Key=value lines, `#` comments. Recognized keys: `tolerance`, `max_iter`,
//! `preconditioner` (m1|m2|m3|sc), `variant` (plain|stabilized|augmented),
//! `mode` (triangular|diagonal). Command-line overrides reuse the same
//! parser through [`SolverConfig::set`].

use crate::error::{Error, Result};
use crate::krylov::precond::{ApplyMode, PrecondKind};
use crate::scalar::Real;
use crate::system::SystemVariant;

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig<T> {
    pub tolerance: T,
    pub max_iter: usize,
    pub preconditioner: PrecondKind,
    pub variant: SystemVariant,
    pub mode: ApplyMode,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            tolerance: T::of(1e-10),
            max_iter: 500,
            preconditioner: PrecondKind::M1,
            variant: SystemVariant::Stabilized,
            mode: ApplyMode::UpperTriangular,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "tolerance" | "tol" => {
                let v = T::parse_text(value).ok_or_else(|| Error::Parse(format!("bad tolerance '{value}'")))?;
                if !(v > T::zero()) || !(v < T::one()) {
                    return Err(Error::Parse(format!("tolerance must be in (0,1), got {value}")));
                }
                self.tolerance = v;
            }
            "max_iter" => {
                self.max_iter = value.parse().map_err(|_| Error::Parse(format!("bad max_iter '{value}'")))?;
            }
            "preconditioner" | "precond" => self.preconditioner = value.parse()?,
            "variant" => self.variant = value.parse()?,
            "mode" => self.mode = value.parse()?,
            other => return Err(Error::Parse(format!("unknown solver config key '{other}'"))),
        }
        Ok(())
    }

    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{line}'")))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }
}
