//! Saddle-point systems of the time-discretized coupled problem.
//!
//! One reduced block set yields three system variants that share `B`, the
//! pressure mass and the scaling parameter `r`:
//!   plain       [A,        B'; B, 0]
//!   stabilized  [A + r D,  B'; B, 0]   (div-div stabilization; may shift
//!                                       the discrete solution)
//!   augmented   [A + r D^Q, B'; B, 0]  (adds r B' Mp^{-1} B; same solution
//!                                       as plain since B v = 0 at the
//!                                       solution)

mod checkpoint;
mod time;

pub use checkpoint::{checkpoint_to_string, write_checkpoint};
pub use time::{
    dirichlet_values, gce_time_step, prepare_step, DirichletData, PreparedStep, StepConfig,
    TimeState,
};

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::{DirichletMap, MaterialParams, ReducedBlocks};
use crate::fem::DqOperator;
use crate::krylov::gmres::{gmres, SolveReport};
use crate::krylov::lu::sparse_lu_factorize;
use crate::krylov::precond::{make_preconditioner, ApplyMode, PrecondKind};
use crate::krylov::sparse::{CooBuilder, CsrMatrix};
use crate::krylov::LinearOp;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemVariant {
    Plain,
    Stabilized,
    Augmented,
}

impl SystemVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemVariant::Plain => "plain",
            SystemVariant::Stabilized => "stabilized",
            SystemVariant::Augmented => "augmented",
        }
    }
}

impl FromStr for SystemVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(SystemVariant::Plain),
            "stabilized" => Ok(SystemVariant::Stabilized),
            "augmented" => Ok(SystemVariant::Augmented),
            other => Err(Error::Parse(format!("unknown system variant '{other}'"))),
        }
    }
}

/// The norm-scaling parameter
/// `r = max(1, mu_f, rho_f/k, rho_s/k, k mu_s, k lambda_s)`.
pub fn scaling_parameter<T: Real>(params: &MaterialParams<T>) -> T {
    let candidates = [
        T::one(),
        params.mu_f,
        params.rho_f / params.k,
        params.rho_s / params.k,
        params.k * params.mu_s,
        params.k * params.lambda_s,
    ];
    candidates.into_iter().fold(T::one(), T::max)
}

/// One assembled, eliminated saddle system ready for a solver.
#[derive(Debug, Clone)]
pub struct BlockSystem<T> {
    pub variant: SystemVariant,
    pub r: T,
    /// velocity block per variant (A, A + rD, or A + rD^Q)
    pub velocity_block: CsrMatrix<T>,
    /// plain velocity form, kept for preconditioners
    pub a: CsrMatrix<T>,
    pub div_div: CsrMatrix<T>,
    pub b: CsrMatrix<T>,
    pub b_t: CsrMatrix<T>,
    pub pressure_mass: Vec<T>,
    pub rhs_velocity: Vec<T>,
    pub rhs_pressure: Vec<T>,
    pub map: DirichletMap<T>,
}

impl<T: Real> BlockSystem<T> {
    pub fn n_velocity(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_pressure(&self) -> usize {
        self.b.nrows()
    }

    pub fn dim(&self) -> usize {
        self.n_velocity() + self.n_pressure()
    }

    pub fn rhs_full(&self) -> Vec<T> {
        let mut rhs = self.rhs_velocity.clone();
        rhs.extend_from_slice(&self.rhs_pressure);
        rhs
    }

    /// Explicit sparse `D^Q = B' Mp^{-1} B`.
    pub fn dq_explicit(&self) -> CsrMatrix<T> {
        DqOperator::new(&self.b, &self.pressure_mass)
            .expect("consistent blocks")
            .explicit()
    }

    pub fn operator(&self) -> SaddleOperator<'_, T> {
        SaddleOperator { velocity_block: &self.velocity_block, b: &self.b, b_t: &self.b_t }
    }
}

/// Matrix-free coupled operator `[K_v, B'; B, 0]`.
pub struct SaddleOperator<'a, T> {
    pub velocity_block: &'a CsrMatrix<T>,
    pub b: &'a CsrMatrix<T>,
    pub b_t: &'a CsrMatrix<T>,
}

impl<'a, T: Real> LinearOp<T> for SaddleOperator<'a, T> {
    fn dim(&self) -> usize {
        self.velocity_block.nrows() + self.b.nrows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let nv = self.velocity_block.nrows();
        let (xv, xp) = x.split_at(nv);
        let (yv, yp) = y.split_at_mut(nv);
        self.velocity_block.matvec(xv, yv);
        self.b_t.matvec_add_scaled(xp, T::one(), yv);
        self.b.matvec(xv, yp);
    }

    fn apply_abs(&self, x: &[T], y: &mut [T]) {
        let nv = self.velocity_block.nrows();
        let (xv, xp) = x.split_at(nv);
        let (yv, yp) = y.split_at_mut(nv);
        self.velocity_block.matvec_abs(xv, yv);
        self.b_t.matvec_abs_add(xp, yv);
        self.b.matvec_abs(xv, yp);
    }
}

/// Materialize the chosen variant from reduced blocks.
pub fn build_system<T: Real>(
    reduced: &ReducedBlocks<T>,
    params: &MaterialParams<T>,
    variant: SystemVariant,
) -> Result<BlockSystem<T>> {
    params.validate()?;
    let n = reduced.a.nrows();
    if reduced.b.ncols() != n || reduced.div_div.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: reduced.b.ncols() });
    }
    if reduced.b.nrows() != reduced.pressure_mass.len() {
        return Err(Error::DimensionMismatch {
            expected: reduced.b.nrows(),
            got: reduced.pressure_mass.len(),
        });
    }
    let r = scaling_parameter(params);
    let velocity_block = match variant {
        SystemVariant::Plain => reduced.a.clone(),
        SystemVariant::Stabilized => reduced.a.add_scaled(&reduced.div_div, r)?,
        SystemVariant::Augmented => {
            let dq = DqOperator::new(&reduced.b, &reduced.pressure_mass)?.explicit();
            reduced.a.add_scaled(&dq, r)?
        }
    };
    Ok(BlockSystem {
        variant,
        r,
        velocity_block,
        a: reduced.a.clone(),
        div_div: reduced.div_div.clone(),
        b: reduced.b.clone(),
        b_t: reduced.b.transpose(),
        pressure_mass: reduced.pressure_mass.clone(),
        rhs_velocity: reduced.rhs_velocity.clone(),
        rhs_pressure: reduced.rhs_pressure.clone(),
        map: reduced.map.clone(),
    })
}

/// Euclidean norms of the two block residuals at `(v, p)`.
pub fn residual<T: Real>(system: &BlockSystem<T>, v: &[T], p: &[T]) -> (T, T) {
    let nv = system.n_velocity();
    let np = system.n_pressure();
    assert_eq!(v.len(), nv);
    assert_eq!(p.len(), np);
    let mut rv = vec![T::zero(); nv];
    system.velocity_block.matvec(v, &mut rv);
    system.b_t.matvec_add_scaled(p, T::one(), &mut rv);
    let mut acc_v = T::zero();
    for (ri, fi) in rv.iter().zip(&system.rhs_velocity) {
        let d = *fi - *ri;
        acc_v += d * d;
    }
    let mut rp = vec![T::zero(); np];
    system.b.matvec(v, &mut rp);
    let mut acc_p = T::zero();
    for (ri, fi) in rp.iter().zip(&system.rhs_pressure) {
        let d = *fi - *ri;
        acc_p += d * d;
    }
    (acc_v.sqrt(), acc_p.sqrt())
}

/// Direct sparse factorization of the monolithic saddle matrix.
pub fn direct_solve<T: Real>(system: &BlockSystem<T>) -> Result<(Vec<T>, Vec<T>)> {
    let nv = system.n_velocity();
    let np = system.n_pressure();
    let mut builder = CooBuilder::new(nv + np, nv + np);
    for r in 0..nv {
        let (cols, vals) = system.velocity_block.row(r);
        for (c, v) in cols.iter().zip(vals) {
            builder.push(r, *c, *v);
        }
    }
    for r in 0..np {
        let (cols, vals) = system.b.row(r);
        for (c, v) in cols.iter().zip(vals) {
            builder.push(nv + r, *c, *v);
            builder.push(*c, nv + r, *v);
        }
    }
    let k = builder.into_csr();
    let lu = sparse_lu_factorize(&k)?;
    let x = lu.solve(&system.rhs_full());
    let (v, p) = x.split_at(nv);
    Ok((v.to_vec(), p.to_vec()))
}

/// Preconditioned GMRES on the chosen system.
pub fn solve_system<T: Real>(
    system: &BlockSystem<T>,
    kind: PrecondKind,
    mode: ApplyMode,
    tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, Vec<T>, SolveReport<T>)> {
    let precond = make_preconditioner(system, kind)?.with_mode(mode);
    let op = system.operator();
    let rhs = system.rhs_full();
    let (x, mut report) = gmres(&op, Some(&precond), &rhs, tol, max_iter);
    report.preconditioner = Some(kind);
    report.variant = Some(system.variant);
    let (v, p) = x.split_at(system.n_velocity());
    Ok((v.to_vec(), p.to_vec(), report))
}
