//! The four block preconditioners.
//!
//! M1, M2 and M3 are Riesz-map preconditioners induced by the norms under
//! which the saddle problem is uniformly well-posed: the velocity block is
//! `A + rD` (M1) or `A + r D^Q` (M2, M3) and the pressure block is
//! `r^{-1} M_p`. M2 and M3 apply the identical operator; they differ only in
//! which stiffness matrix they are paired with (plain vs augmented). SC is a
//! pressure Schur-complement baseline with `diag(A)^{-1}` standing in for
//! `A^{-1}`. Application is block upper triangular by default (pressure
//! solve first, then the velocity solve with the `B'` coupling); a
//! block-diagonal mode is kept for the spectral diagnostics.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::scale_rows;
use crate::krylov::lu::{sparse_lu_factorize, SparseLu};
use crate::krylov::sparse::CsrMatrix;
use crate::krylov::LinearOp;
use crate::scalar::Real;
use crate::system::{BlockSystem, SystemVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    M1,
    M2,
    M3,
    Sc,
}

impl PrecondKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrecondKind::M1 => "m1",
            PrecondKind::M2 => "m2",
            PrecondKind::M3 => "m3",
            PrecondKind::Sc => "sc",
        }
    }

    /// The stiffness-matrix variant each kind is designed for.
    pub fn expected_variant(&self) -> SystemVariant {
        match self {
            PrecondKind::M1 => SystemVariant::Stabilized,
            PrecondKind::M2 => SystemVariant::Plain,
            PrecondKind::M3 => SystemVariant::Augmented,
            PrecondKind::Sc => SystemVariant::Plain,
        }
    }

    pub fn all() -> [PrecondKind; 4] {
        [PrecondKind::M1, PrecondKind::M2, PrecondKind::M3, PrecondKind::Sc]
    }
}

impl FromStr for PrecondKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(PrecondKind::M1),
            "m2" => Ok(PrecondKind::M2),
            "m3" => Ok(PrecondKind::M3),
            "sc" => Ok(PrecondKind::Sc),
            other => Err(Error::Parse(format!("unknown preconditioner '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyMode {
    UpperTriangular,
    BlockDiagonal,
}

impl FromStr for ApplyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangular" => Ok(ApplyMode::UpperTriangular),
            "diagonal" => Ok(ApplyMode::BlockDiagonal),
            other => Err(Error::Parse(format!("unknown application mode '{other}'"))),
        }
    }
}

enum PressureSolve<T> {
    /// z = (r^{-1} Mp)^{-1} x, i.e. entrywise r / mp
    ScaledMass(Vec<T>),
    /// factorized approximate Schur complement `-B diag(A)^{-1} B'`
    Schur(SparseLu<T>),
}

/// A factorized block preconditioner, reusable across right-hand sides and
/// shareable across solves.
pub struct PreconditionerOp<T> {
    kind: PrecondKind,
    mode: ApplyMode,
    velocity: SparseLu<T>,
    pressure: PressureSolve<T>,
    b_t: CsrMatrix<T>,
    n_velocity: usize,
    n_pressure: usize,
    /// the system's variant differs from the kind's designed pairing
    pub variant_mismatch: bool,
}

/// Factorize the designated velocity block and pressure block for `kind`.
/// A variant mismatch (say M1 on a plain system) is allowed but recorded.
pub fn make_preconditioner<T: Real>(system: &BlockSystem<T>, kind: PrecondKind) -> Result<PreconditionerOp<T>> {
    let r = system.r;
    let velocity_matrix = match kind {
        PrecondKind::M1 => system.a.add_scaled(&system.div_div, r)?,
        PrecondKind::M2 | PrecondKind::M3 => system.a.add_scaled(&system.dq_explicit(), r)?,
        PrecondKind::Sc => system.a.clone(),
    };
    let velocity = sparse_lu_factorize(&velocity_matrix)?;
    let pressure = match kind {
        PrecondKind::Sc => {
            let diag = system.a.diagonal();
            if diag.iter().any(|d| *d == T::zero()) {
                return Err(Error::InvalidParameter("zero diagonal entry in A".into()));
            }
            let inv_diag: Vec<T> = diag.iter().map(|d| T::one() / *d).collect();
            // -B diag(A)^{-1} B'
            let scaled_bt = scale_rows(&system.b_t, &inv_diag);
            let mut schur = system.b.matmul(&scaled_bt)?;
            schur = CsrMatrix::zeros(schur.nrows(), schur.ncols()).add_scaled(&schur, -T::one())?;
            PressureSolve::Schur(sparse_lu_factorize(&schur)?)
        }
        _ => {
            let mult: Vec<T> = system.pressure_mass.iter().map(|m| r / *m).collect();
            PressureSolve::ScaledMass(mult)
        }
    };
    Ok(PreconditionerOp {
        kind,
        mode: ApplyMode::UpperTriangular,
        velocity,
        pressure,
        b_t: system.b_t.clone(),
        n_velocity: system.n_velocity(),
        n_pressure: system.n_pressure(),
        variant_mismatch: system.variant != kind.expected_variant(),
    })
}

impl<T: Real> PreconditionerOp<T> {
    pub fn with_mode(mut self, mode: ApplyMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn kind(&self) -> PrecondKind {
        self.kind
    }

    pub fn mode(&self) -> ApplyMode {
        self.mode
    }

    fn pressure_solve(&self, r_p: &[T]) -> Vec<T> {
        match &self.pressure {
            PressureSolve::ScaledMass(mult) => r_p.iter().zip(mult).map(|(x, m)| *x * *m).collect(),
            PressureSolve::Schur(lu) => lu.solve(r_p),
        }
    }

    /// z_p = pressure-solve(r_p); z_v = velocity-solve(r_v - B' z_p)
    /// (triangular mode) or velocity-solve(r_v) (diagonal mode).
    ///
    /// The coupling term is solved separately, `z_v = V^{-1} r_v -
    /// V^{-1} B' z_p`: with the `r`-scaled pressure block, `B' z_p` can
    /// exceed `r_v` by orders of magnitude, and forming the difference
    /// before the solve would wipe out the low bits of `r_v` that the
    /// Krylov iteration still needs.
    pub fn apply_to(&self, residual: &[T]) -> Vec<T> {
        assert_eq!(residual.len(), self.n_velocity + self.n_pressure);
        let (r_v, r_p) = residual.split_at(self.n_velocity);
        let z_p = self.pressure_solve(r_p);
        let mut out = self.velocity.solve(r_v);
        if self.mode == ApplyMode::UpperTriangular {
            let mut btz = vec![T::zero(); self.n_velocity];
            self.b_t.matvec(&z_p, &mut btz);
            let coupling = self.velocity.solve(&btz);
            for (o, c) in out.iter_mut().zip(&coupling) {
                *o -= *c;
            }
        }
        out.extend_from_slice(&z_p);
        out
    }
}

impl<T: Real> LinearOp<T> for PreconditionerOp<T> {
    fn dim(&self) -> usize {
        self.n_velocity + self.n_pressure
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let z = self.apply_to(x);
        y.copy_from_slice(&z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::DirichletMap;
    use rand::{Rng, SeedableRng};

    /// Synthetic system: A = I(4), D = 0, B = [[1,0,1,0],[0,1,0,1]],
    /// Mp = I(2), r = 1.
    fn toy_system() -> BlockSystem<f64> {
        let a = CsrMatrix::identity(4);
        let div_div = CsrMatrix::zeros(4, 4);
        let b = CsrMatrix::from_triplets(2, 4, vec![(0, 0, 1.0), (0, 2, 1.0), (1, 1, 1.0), (1, 3, 1.0)]);
        let b_t = b.transpose();
        BlockSystem {
            variant: SystemVariant::Stabilized,
            r: 1.0,
            velocity_block: a.clone(),
            a,
            div_div,
            b,
            b_t,
            pressure_mass: vec![1.0, 1.0],
            rhs_velocity: vec![0.0; 4],
            rhs_pressure: vec![0.0; 2],
            map: DirichletMap::identity(4),
        }
    }

    #[test]
    fn identity_blocks_reduce_to_the_coupling_shift() {
        // with A + rD = I, Mp = I, r = 1: z = (f - B' g, g)
        let sys = toy_system();
        let m1 = make_preconditioner(&sys, PrecondKind::M1).unwrap();
        let f = [1.0, 2.0, 3.0, 4.0];
        let g = [10.0, 20.0];
        let z = m1.apply_to(&[f[0], f[1], f[2], f[3], g[0], g[1]]);
        let mut btg = vec![0.0; 4];
        sys.b_t.matvec(&g, &mut btg);
        for i in 0..4 {
            assert_eq!(z[i], f[i] - btg[i]);
        }
        assert_eq!(&z[4..], &g);
        assert!(!m1.variant_mismatch);
    }

    #[test]
    fn zero_residual_maps_to_zero_and_decoupled_pressure() {
        let sys = toy_system();
        let m1 = make_preconditioner(&sys, PrecondKind::M1).unwrap();
        let z = m1.apply_to(&[0.0; 6]);
        assert!(z.iter().all(|&v| v == 0.0));
        // (r_v, 0): pressure solve returns zero, so z_v = V^{-1} r_v
        let z = m1.apply_to(&[5.0, -1.0, 0.5, 2.0, 0.0, 0.0]);
        assert_eq!(&z[..4], &[5.0, -1.0, 0.5, 2.0]);
        assert_eq!(&z[4..], &[0.0, 0.0]);
    }

    #[test]
    fn m2_and_m3_apply_the_identical_operator() {
        let mesh = crate::mesh::build_two_region_mesh::<f64>(crate::mesh::GeometryTag::CavityHalves, 0).unwrap();
        let space = crate::fem::build_space(&mesh).unwrap();
        let params = crate::fem::MaterialParams::unit().with_time_step(0.1);
        let blocks = crate::fem::assemble_blocks(&space, &params);
        let rhs = vec![0.0; space.n_velocity_dofs()];
        let reduced = crate::fem::apply_dirichlet(&blocks, &rhs, &space, &[]).unwrap();
        let plain = crate::system::build_system(&reduced, &params, SystemVariant::Plain).unwrap();
        let aug = crate::system::build_system(&reduced, &params, SystemVariant::Augmented).unwrap();
        let m2 = make_preconditioner(&plain, PrecondKind::M2).unwrap();
        let m3 = make_preconditioner(&aug, PrecondKind::M3).unwrap();
        assert!(!m2.variant_mismatch && !m3.variant_mismatch);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let x: Vec<f64> = (0..plain.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let z2 = m2.apply_to(&x);
            let z3 = m3.apply_to(&x);
            let scale = z2.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for (a, b) in z2.iter().zip(&z3) {
                assert!((a - b).abs() <= 1e-13 * scale.max(1.0));
            }
        }
        // mismatch reporting: M2 paired with the augmented system
        let m2_on_aug = make_preconditioner(&aug, PrecondKind::M2).unwrap();
        assert!(m2_on_aug.variant_mismatch);
    }

    #[test]
    fn sc_schur_complement_matches_dense_oracle_on_one_element() {
        // one fluid triangle with an open edge so free DOFs remain
        use crate::mesh::{BoundaryEdge, BoundaryMarker, Mesh, Triangle};
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let triangles = vec![Triangle { vertices: [0, 1, 2], region: crate::mesh::Region::Fluid }];
        let edges = vec![
            BoundaryEdge { vertices: [0, 1], marker: BoundaryMarker::OuterDirichlet },
            BoundaryEdge { vertices: [1, 2], marker: BoundaryMarker::Outflow },
            BoundaryEdge { vertices: [2, 0], marker: BoundaryMarker::OuterDirichlet },
        ];
        let mesh = Mesh::new(nodes, triangles, edges).unwrap();
        let space = crate::fem::build_space(&mesh).unwrap();
        let params = crate::fem::MaterialParams::unit();
        let blocks = crate::fem::assemble_blocks(&space, &params);
        let rhs = vec![0.0; space.n_velocity_dofs()];
        let reduced = crate::fem::apply_dirichlet(&blocks, &rhs, &space, &[]).unwrap();
        let sys = crate::system::build_system(&reduced, &params, SystemVariant::Plain).unwrap();
        let sc = make_preconditioner(&sys, PrecondKind::Sc).unwrap();
        // dense: s = -sum_j b_j^2 / a_jj  (single pressure DOF)
        let diag = sys.a.diagonal();
        let (cols, vals) = sys.b.row(0);
        let mut s = 0.0_f64;
        for (c, v) in cols.iter().zip(vals) {
            s -= v * v / diag[*c];
        }
        let z = sc.pressure_solve(&[1.0]);
        assert!((z[0] - 1.0 / s).abs() <= 1e-13 * (1.0 / s).abs(), "{} vs {}", z[0], 1.0 / s);
    }

    #[test]
    fn application_is_linear() {
        let sys = toy_system();
        for kind in PrecondKind::all() {
            let p = make_preconditioner(&sys, kind).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (alpha, beta) = (1.3, -0.7);
            let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
            let z_combo = p.apply_to(&combo);
            let zx = p.apply_to(&x);
            let zy = p.apply_to(&y);
            let scale = z_combo.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            for i in 0..6 {
                assert!((z_combo[i] - (alpha * zx[i] + beta * zy[i])).abs() <= 1e-12 * scale);
            }
        }
    }
}
