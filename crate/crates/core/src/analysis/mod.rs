//! Numerical verification of the well-posedness theory on dense-feasible
//! problems: norm identities, inf-sup constants, preconditioned spectra.

mod infsup;
mod quad_eval;
mod spectrum;

pub use infsup::{infsup_constant, infsup_for_blocks, InfSupReport, NormKind, DENSE_LIMIT};
pub use quad_eval::{norm_identity_check, quadrature_norms, QuadratureNorms};
pub use spectrum::{brezzi_intervals, preconditioned_spectrum, BrezziIntervals, SpectrumReport};
