//! Symmetric elimination of Dirichlet velocity DOFs.
//!
//! Constrained rows and columns are removed; their contributions move to
//! the right-hand side (including the pressure-side lift `-B_c g_c`, which
//! is nonzero only for inhomogeneous data such as an inflow profile).
//! Elimination rather than penalization keeps the reduced velocity block
//! symmetric positive definite and the norm identities exact.

use crate::error::{Error, Result};
use crate::fem::assemble::AssembledBlocks;
use crate::fem::space::CoupledSpace;
use crate::krylov::sparse::CsrMatrix;
use crate::scalar::Real;

/// Index bookkeeping between the full and reduced velocity DOF sets.
#[derive(Debug, Clone)]
pub struct DirichletMap<T> {
    full_to_free: Vec<Option<usize>>,
    free_to_full: Vec<usize>,
    /// full-length vector: prescribed values on constrained DOFs, zero else
    boundary_values: Vec<T>,
}

impl<T: Real> DirichletMap<T> {
    /// Map with no constrained DOFs (synthetic systems and tests).
    pub fn identity(n: usize) -> Self {
        DirichletMap {
            full_to_free: (0..n).map(Some).collect(),
            free_to_full: (0..n).collect(),
            boundary_values: vec![T::zero(); n],
        }
    }

    pub fn n_full(&self) -> usize {
        self.full_to_free.len()
    }

    pub fn n_free(&self) -> usize {
        self.free_to_full.len()
    }

    pub fn free_index(&self, full: usize) -> Option<usize> {
        self.full_to_free[full]
    }

    pub fn full_index(&self, free: usize) -> usize {
        self.free_to_full[free]
    }

    pub fn boundary_values(&self) -> &[T] {
        &self.boundary_values
    }

    /// Pad a reduced vector with the prescribed boundary values.
    pub fn expand(&self, reduced: &[T]) -> Vec<T> {
        assert_eq!(reduced.len(), self.n_free());
        let mut full = self.boundary_values.clone();
        for (free, &fi) in self.free_to_full.iter().enumerate() {
            full[fi] = reduced[free];
        }
        full
    }

    /// Restrict a full vector to the free DOFs.
    pub fn restrict(&self, full: &[T]) -> Vec<T> {
        assert_eq!(full.len(), self.n_full());
        self.free_to_full.iter().map(|&fi| full[fi]).collect()
    }

    pub fn full_to_free_map(&self) -> &[Option<usize>] {
        &self.full_to_free
    }
}

/// Blocks and right-hand sides after elimination.
#[derive(Debug, Clone)]
pub struct ReducedBlocks<T> {
    pub a: CsrMatrix<T>,
    pub b: CsrMatrix<T>,
    pub div_div: CsrMatrix<T>,
    pub pressure_mass: Vec<T>,
    pub rhs_velocity: Vec<T>,
    /// `-B_c g_c`; zero whenever the boundary data is zero
    pub rhs_pressure: Vec<T>,
    pub map: DirichletMap<T>,
}

/// Eliminate the space's Dirichlet DOFs. `values` lists nonzero prescribed
/// values as `(dof, value)` pairs; a pair naming an unconstrained DOF is an
/// error. Unlisted constrained DOFs take the value zero.
pub fn apply_dirichlet<T: Real>(
    blocks: &AssembledBlocks<T>,
    rhs: &[T],
    space: &CoupledSpace<T>,
    values: &[(usize, T)],
) -> Result<ReducedBlocks<T>> {
    let n = space.n_velocity_dofs();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rhs.len() });
    }
    let mut boundary_values = vec![T::zero(); n];
    for &(dof, v) in values {
        if dof >= n || !space.is_dirichlet(dof) {
            return Err(Error::NonDirichletDof { dof });
        }
        boundary_values[dof] = v;
    }

    let mut full_to_free: Vec<Option<usize>> = vec![None; n];
    let mut free_to_full = Vec::with_capacity(n - space.dirichlet_dofs().len());
    let mut next = 0usize;
    let mut dirichlet_iter = space.dirichlet_dofs().iter().peekable();
    for dof in 0..n {
        if dirichlet_iter.peek() == Some(&&dof) {
            dirichlet_iter.next();
        } else {
            full_to_free[dof] = Some(next);
            free_to_full.push(dof);
            next += 1;
        }
    }
    let n_free = next;

    // lift: rhs_f -= A[:, c] g_c on free rows, rhs_p = -B g
    let mut a_g = vec![T::zero(); n];
    blocks.a.matvec(&boundary_values, &mut a_g);
    let mut rhs_velocity = Vec::with_capacity(n_free);
    for &fi in &free_to_full {
        rhs_velocity.push(rhs[fi] - a_g[fi]);
    }
    let mut rhs_pressure = vec![T::zero(); blocks.b.nrows()];
    blocks.b.matvec(&boundary_values, &mut rhs_pressure);
    for v in rhs_pressure.iter_mut() {
        *v = -*v;
    }

    let keep_all: Vec<Option<usize>> = (0..blocks.b.nrows()).map(Some).collect();
    let a = blocks.a.extract(&full_to_free, n_free, &full_to_free, n_free);
    let b = blocks.b.extract(&keep_all, blocks.b.nrows(), &full_to_free, n_free);
    let div_div = blocks.div_div.extract(&full_to_free, n_free, &full_to_free, n_free);

    Ok(ReducedBlocks {
        a,
        b,
        div_div,
        pressure_mass: blocks.pressure_mass.clone(),
        rhs_velocity,
        rhs_pressure,
        map: DirichletMap { full_to_free, free_to_full, boundary_values },
    })
}
