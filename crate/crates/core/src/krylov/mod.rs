//! Sparse linear algebra substrate: CSR matrices, a sparse direct LU for the
//! sub-block solves, right-preconditioned GMRES, and the block
//! preconditioners.

pub mod config;
pub mod gmres;
pub mod lu;
pub mod precond;
pub mod sparse;

pub use config::SolverConfig;
pub use gmres::{gmres, SolveReport};
pub use lu::{sparse_lu_factorize, SparseLu};
pub use precond::{make_preconditioner, ApplyMode, PrecondKind, PreconditionerOp};
pub use sparse::{CooBuilder, CsrMatrix};

use crate::scalar::Real;

/// Anything that acts like a square matrix.
pub trait LinearOp<T: Real> {
    fn dim(&self) -> usize;
    /// y = L x
    fn apply(&self, x: &[T], y: &mut [T]);

    /// y = |L| |x| entrywise, used for roundoff floors of residual
    /// evaluations. The default underestimates for sign-mixed operators,
    /// which only makes residual acceptance more conservative.
    fn apply_abs(&self, x: &[T], y: &mut [T]) {
        let abs_x: Vec<T> = x.iter().map(|v| v.abs()).collect();
        self.apply(&abs_x, y);
        for v in y.iter_mut() {
            *v = v.abs();
        }
    }
}

impl<T: Real> LinearOp<T> for CsrMatrix<T> {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows(), self.ncols());
        self.nrows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.matvec(x, y);
    }

    fn apply_abs(&self, x: &[T], y: &mut [T]) {
        self.matvec_abs(x, y);
    }
}
