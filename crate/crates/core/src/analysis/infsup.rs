//! Discrete inf-sup constants by dense generalized eigensolve.
//!
//! beta^2 is the smallest nonzero eigenvalue of
//!   (B N^{-1} B') q = lambda (r^{-1} M_p) q,
//! where N is the Gram matrix of the chosen velocity norm. With diagonal
//! pressure mass this reduces to a symmetric standard problem for
//! r^{1/2} M_p^{-1/2} (B N^{-1} B') M_p^{-1/2} r^{1/2}. Eigenvalues below
//! a relative threshold count as the (reported) null space and are
//! excluded from beta.

use nalgebra::{DMatrix, RealField};

use crate::error::{Error, Result};
use crate::fem::{assemble_h1_gram, CoupledSpace, ReducedBlocks};
use crate::krylov::sparse::CsrMatrix;
use crate::scalar::Real;

/// Velocity norm whose Gram matrix enters the eigenproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `a(u,u) + r ||div u_f||^2`
    V,
    /// `a(u,u) + r ||P_Q div u_f||^2`
    VQ,
    /// parameter-free `||u||_1^2` over both regions
    H1,
}

impl NormKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormKind::V => "V",
            NormKind::VQ => "V_Q",
            NormKind::H1 => "H1",
        }
    }
}

/// Problems above this many total DOFs are refused by the dense layer.
pub const DENSE_LIMIT: usize = 3000;

#[derive(Debug, Clone)]
pub struct InfSupReport<T> {
    pub beta: T,
    pub norm: NormKind,
    pub r: T,
    /// eigenvalues treated as the pressure null space
    pub null_dim: usize,
    /// smallest nonzero generalized eigenvalue (= beta^2)
    pub lambda_min: T,
    pub lambda_max: T,
}

impl<T: Real> InfSupReport<T> {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.norm.as_str(),
            self.r.fmt_full(),
            self.beta.fmt_full(),
            self.null_dim,
            self.lambda_min.fmt_full(),
            self.lambda_max.fmt_full()
        )
    }
}

pub(crate) fn to_dmatrix<T: Real + RealField>(m: &CsrMatrix<T>) -> DMatrix<T> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let (cols, vals) = m.row(r);
        for (c, v) in cols.iter().zip(vals) {
            d[(r, *c)] = *v;
        }
    }
    d
}

/// Inf-sup constant from explicit Gram/coupling/mass matrices.
pub fn infsup_constant<T: Real + RealField>(
    gram: &CsrMatrix<T>,
    b: &CsrMatrix<T>,
    pressure_mass: &[T],
    r: T,
    norm: NormKind,
) -> Result<InfSupReport<T>> {
    let n_v = gram.nrows();
    let n_p = b.nrows();
    if n_v + n_p > DENSE_LIMIT {
        return Err(Error::SizeTooLarge { size: n_v + n_p, limit: DENSE_LIMIT });
    }
    if b.ncols() != n_v || pressure_mass.len() != n_p {
        return Err(Error::DimensionMismatch { expected: n_v, got: b.ncols() });
    }
    let n_dense = to_dmatrix(gram);
    let chol = n_dense
        .cholesky()
        .ok_or_else(|| Error::InvalidParameter("velocity Gram matrix is not positive definite".into()))?;
    let bt = to_dmatrix(&b.transpose());
    let x = chol.solve(&bt); // N^{-1} B'
    let s = to_dmatrix(b) * x; // B N^{-1} B'
    // scale into the pressure norm: D S D with D = sqrt(r / mp)
    let scale: Vec<T> = pressure_mass.iter().map(|m| num_traits::Float::sqrt(r / *m)).collect();
    let mut w = s;
    for i in 0..n_p {
        for j in 0..n_p {
            w[(i, j)] = w[(i, j)] * scale[i] * scale[j];
        }
    }
    // symmetrize roundoff
    let w = (w.clone() + w.transpose()) * T::of(0.5);
    let eigen = w.symmetric_eigen();
    let mut lambdas: Vec<T> = eigen.eigenvalues.iter().copied().collect();
    lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let lambda_max = *lambdas.last().ok_or_else(|| Error::InvalidParameter("empty pressure space".into()))?;
    let threshold = T::of(1e-10) * num_traits::Float::abs(lambda_max);
    let null_dim = lambdas.iter().filter(|l| num_traits::Float::abs(**l) <= threshold).count();
    let lambda_min = lambdas
        .get(null_dim)
        .copied()
        .ok_or_else(|| Error::InvalidParameter("all generalized eigenvalues are zero".into()))?;
    Ok(InfSupReport {
        beta: num_traits::Float::sqrt(lambda_min),
        norm,
        r,
        null_dim,
        lambda_min,
        lambda_max,
    })
}

/// Convenience entry working from eliminated blocks; `space` supplies the
/// H1 Gram when that norm is requested.
pub fn infsup_for_blocks<T: Real + RealField>(
    reduced: &ReducedBlocks<T>,
    space: &CoupledSpace<T>,
    r: T,
    norm: NormKind,
) -> Result<InfSupReport<T>> {
    let gram = match norm {
        NormKind::V => reduced.a.add_scaled(&reduced.div_div, r)?,
        NormKind::VQ => {
            let dq = crate::fem::DqOperator::new(&reduced.b, &reduced.pressure_mass)?.explicit();
            reduced.a.add_scaled(&dq, r)?
        }
        NormKind::H1 => {
            let full = assemble_h1_gram(space);
            let map = reduced.map.full_to_free_map();
            full.extract(map, reduced.map.n_free(), map, reduced.map.n_free())
        }
    };
    infsup_constant(&gram, &reduced.b, &reduced.pressure_mass, r, norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{apply_dirichlet, assemble_blocks, build_space, MaterialParams};
    use crate::mesh::unit_square_fluid;
    use nalgebra::SymmetricEigen;

    fn fluid_square(n: usize, outflow: bool) -> (CoupledSpace<f64>, ReducedBlocks<f64>) {
        let mesh = unit_square_fluid::<f64>(n, outflow).unwrap();
        let space = build_space(&mesh).unwrap();
        let blocks = assemble_blocks(&space, &MaterialParams::unit());
        let rhs = vec![0.0; space.n_velocity_dofs()];
        let reduced = apply_dirichlet(&blocks, &rhs, &space, &[]).unwrap();
        (space, reduced)
    }

    #[test]
    fn enclosed_cavity_reports_the_constant_pressure_null_space() {
        let (space, reduced) = fluid_square(2, false);
        let rep = infsup_for_blocks(&reduced, &space, 1.0, NormKind::H1).unwrap();
        assert_eq!(rep.null_dim, 1, "enclosed flow has the constant pressure mode");
        assert!(rep.beta > 0.0);
    }

    #[test]
    fn open_boundary_removes_the_null_space() {
        let (space, reduced) = fluid_square(2, true);
        let rep = infsup_for_blocks(&reduced, &space, 1.0, NormKind::H1).unwrap();
        assert_eq!(rep.null_dim, 0);
        assert!(rep.beta > 0.0);
    }

    #[test]
    fn h1_beta_matches_an_independent_svd_oracle() {
        let (space, reduced) = fluid_square(2, true);
        let rep = infsup_for_blocks(&reduced, &space, 1.0, NormKind::H1).unwrap();

        // oracle: smallest singular value of Mp^{-1/2} B N^{-1/2}
        let gram = {
            let full = assemble_h1_gram(&space);
            let map = reduced.map.full_to_free_map();
            full.extract(map, reduced.map.n_free(), map, reduced.map.n_free())
        };
        let n_dense = to_dmatrix(&gram);
        let eig = SymmetricEigen::new(n_dense);
        // N^{-1/2} = V diag(1/sqrt(lambda)) V'
        let mut inv_sqrt = eig.eigenvectors.clone();
        for (j, l) in eig.eigenvalues.iter().enumerate() {
            let s = 1.0 / l.sqrt();
            for i in 0..inv_sqrt.nrows() {
                inv_sqrt[(i, j)] *= s;
            }
        }
        let n_inv_half = &inv_sqrt * eig.eigenvectors.transpose();
        let mut b_dense = to_dmatrix(&reduced.b);
        for (i, m) in reduced.pressure_mass.iter().enumerate() {
            let s = 1.0 / m.sqrt();
            for j in 0..b_dense.ncols() {
                b_dense[(i, j)] *= s;
            }
        }
        let composite = b_dense * n_inv_half;
        let svd = composite.svd(false, false);
        let sigma_min = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(
            (sigma_min - rep.beta).abs() <= 1e-10 * rep.beta.max(1.0),
            "svd {sigma_min} vs eig {}",
            rep.beta
        );
    }

    #[test]
    fn vq_beta_dominates_v_beta() {
        let (space, reduced) = fluid_square(2, true);
        let v = infsup_for_blocks(&reduced, &space, 5.0, NormKind::V).unwrap();
        let vq = infsup_for_blocks(&reduced, &space, 5.0, NormKind::VQ).unwrap();
        assert!(vq.beta >= v.beta - 1e-12, "V_Q Gram is dominated by the V Gram");
    }

    #[test]
    fn size_guard_refuses_large_problems() {
        let gram = CsrMatrix::<f64>::identity(4000);
        let b = CsrMatrix::<f64>::zeros(10, 4000);
        let mp = vec![1.0; 10];
        assert!(matches!(
            infsup_constant(&gram, &b, &mp, 1.0, NormKind::V),
            Err(Error::SizeTooLarge { .. })
        ));
    }
}
