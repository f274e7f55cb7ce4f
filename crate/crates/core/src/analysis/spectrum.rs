//! Dense spectra of preconditioned saddle operators.
//!
//! In block-diagonal mode with an SPD preconditioner the spectrum is
//! computed symmetrically (Cholesky congruence), so eigenvalues come out
//! exactly real; the triangular mode goes through a real Schur
//! decomposition and may report complex pairs. For the diagonal Riesz map
//! on the stabilized system the eigenvalues must fall into the two Brezzi
//! intervals determined by the unit coercivity and the inf-sup constant.

use nalgebra::{Complex, DMatrix, RealField};
use num_traits::Float;

use crate::analysis::infsup::{to_dmatrix, DENSE_LIMIT};
use crate::error::{Error, Result};
use crate::krylov::precond::{ApplyMode, PrecondKind};
use crate::scalar::Real;
use crate::system::BlockSystem;

#[derive(Debug, Clone)]
pub struct SpectrumReport<T> {
    pub eigenvalues: Vec<Complex<T>>,
    /// max |lambda| / min |lambda|
    pub condition: T,
    pub kind: PrecondKind,
    pub mode: ApplyMode,
}

impl<T: Real> SpectrumReport<T> {
    pub fn max_imag(&self) -> T {
        self.eigenvalues.iter().map(|l| Float::abs(l.im)).fold(T::zero(), T::max)
    }

    pub fn csv_row(&self) -> String {
        let min_re = self.eigenvalues.iter().map(|l| l.re).fold(T::infinity(), T::min);
        let max_re = self.eigenvalues.iter().map(|l| l.re).fold(T::neg_infinity(), T::max);
        format!(
            "{},{},{},{},{},{}",
            self.kind.as_str(),
            match self.mode {
                ApplyMode::UpperTriangular => "triangular",
                ApplyMode::BlockDiagonal => "diagonal",
            },
            self.condition.fmt_full(),
            min_re.fmt_full(),
            max_re.fmt_full(),
            self.max_imag().fmt_full()
        )
    }
}

/// The eigenvalue intervals of a saddle operator preconditioned by its
/// exact norm blocks: negative cluster
/// `[(1 - sqrt(1+4 bnorm^2))/2, (1 - sqrt(1+4 beta^2))/2]` and positive
/// cluster `[1, (1 + sqrt(1+4 bnorm^2))/2]`.
#[derive(Debug, Clone, Copy)]
pub struct BrezziIntervals<T> {
    pub negative: (T, T),
    pub positive: (T, T),
}

pub fn brezzi_intervals<T: Real>(beta: T, b_norm: T) -> BrezziIntervals<T> {
    let one = T::one();
    let four = T::of(4.0);
    let half = T::of(0.5);
    let lo_neg = (one - (one + four * b_norm * b_norm).sqrt()) * half;
    let hi_neg = (one - (one + four * beta * beta).sqrt()) * half;
    let hi_pos = (one + (one + four * b_norm * b_norm).sqrt()) * half;
    BrezziIntervals { negative: (lo_neg, hi_neg), positive: (one, hi_pos) }
}

impl<T: Real> BrezziIntervals<T> {
    /// Every eigenvalue real part sits in one of the two intervals
    /// (within `tol`) and imaginary parts stay below `tol`.
    pub fn contain<I: Iterator<Item = Complex<T>>>(&self, eigenvalues: I, tol: T) -> bool {
        for l in eigenvalues {
            if Float::abs(l.im) > tol {
                return false;
            }
            let re = l.re;
            let in_neg = re >= self.negative.0 - tol && re <= self.negative.1 + tol;
            let in_pos = re >= self.positive.0 - tol && re <= self.positive.1 + tol;
            if !(in_neg || in_pos) {
                return false;
            }
        }
        true
    }
}

fn dense_preconditioner<T: Real + RealField>(
    system: &BlockSystem<T>,
    kind: PrecondKind,
    mode: ApplyMode,
) -> Result<DMatrix<T>> {
    let nv = system.n_velocity();
    let np = system.n_pressure();
    let n = nv + np;
    let velocity = match kind {
        PrecondKind::M1 => system.a.add_scaled(&system.div_div, system.r)?,
        PrecondKind::M2 | PrecondKind::M3 => system.a.add_scaled(&system.dq_explicit(), system.r)?,
        PrecondKind::Sc => system.a.clone(),
    };
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (nv, nv)).copy_from(&to_dmatrix(&velocity));
    match kind {
        PrecondKind::Sc => {
            let diag = system.a.diagonal();
            let inv_diag: Vec<T> = diag.iter().map(|d| T::one() / *d).collect();
            let scaled_bt = crate::fem::scale_rows(&system.b_t, &inv_diag);
            let schur = system.b.matmul(&scaled_bt)?;
            let s = to_dmatrix(&schur);
            for i in 0..np {
                for j in 0..np {
                    m[(nv + i, nv + j)] = -s[(i, j)];
                }
            }
        }
        _ => {
            for i in 0..np {
                m[(nv + i, nv + i)] = system.pressure_mass[i] / system.r;
            }
        }
    }
    if mode == ApplyMode::UpperTriangular {
        let bt = to_dmatrix(&system.b_t);
        m.view_mut((0, nv), (nv, np)).copy_from(&bt);
    }
    Ok(m)
}

/// Real-Schur eigenvalues with a precision ladder: the triangular-mode
/// operators carry the eigenvalue one with a multiplicity in the hundreds,
/// on which the QR iteration may fail to meet the tightest threshold; a
/// slightly looser one converges immediately and is far below every
/// tolerance these spectra are checked against.
fn general_eigenvalues<T: Real + RealField>(z: DMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = z.nrows();
    for eps_pow in [-12, -10, -8, -6] {
        let eps = <T as Real>::of(10.0f64.powi(eps_pow));
        if let Some(schur) = nalgebra::Schur::try_new(z.clone(), eps, 200 * n) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::InvalidParameter("QR iteration did not converge for the spectrum".into()))
}

fn dense_saddle<T: Real + RealField>(system: &BlockSystem<T>) -> DMatrix<T> {
    let nv = system.n_velocity();
    let np = system.n_pressure();
    let mut k = DMatrix::zeros(nv + np, nv + np);
    k.view_mut((0, 0), (nv, nv)).copy_from(&to_dmatrix(&system.velocity_block));
    k.view_mut((0, nv), (nv, np)).copy_from(&to_dmatrix(&system.b_t));
    k.view_mut((nv, 0), (np, nv)).copy_from(&to_dmatrix(&system.b));
    k
}

/// Eigenvalues and condition estimate of the preconditioned operator
/// `M^{-1} K`, formed densely.
pub fn preconditioned_spectrum<T: Real + RealField>(
    system: &BlockSystem<T>,
    kind: PrecondKind,
    mode: ApplyMode,
) -> Result<SpectrumReport<T>> {
    let n = system.dim();
    if n > DENSE_LIMIT {
        return Err(Error::SizeTooLarge { size: n, limit: DENSE_LIMIT });
    }
    let k = dense_saddle(system);
    let m = dense_preconditioner(system, kind, mode)?;

    let eigenvalues: Vec<Complex<T>> = if mode == ApplyMode::BlockDiagonal && kind != PrecondKind::Sc {
        // SPD preconditioner: congruence keeps the problem symmetric and
        // the spectrum exactly real
        let chol = m
            .cholesky()
            .ok_or_else(|| Error::InvalidParameter("diagonal preconditioner is not SPD".into()))?;
        let l_inv_k = chol.l().solve_lower_triangular(&k).expect("nonsingular factor");
        let sym = chol
            .l()
            .solve_lower_triangular(&l_inv_k.transpose())
            .expect("nonsingular factor");
        let sym = (sym.clone() + sym.transpose()) * T::of(0.5);
        sym.symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|l| Complex::new(*l, T::zero()))
            .collect()
    } else {
        let lu = m.lu();
        let z = lu.solve(&k).ok_or_else(|| Error::SingularMatrix { pivot: 0 })?;
        general_eigenvalues(z)?
    };

    let mut min_abs = T::infinity();
    let mut max_abs = T::zero();
    for l in &eigenvalues {
        let a = Float::sqrt(l.re * l.re + l.im * l.im);
        min_abs = Float::min(min_abs, a);
        max_abs = Float::max(max_abs, a);
    }
    let condition = max_abs / Float::max(min_abs, T::min_positive_value());
    Ok(SpectrumReport { eigenvalues, condition, kind, mode })
}
