//! Independent quadrature evaluation of the velocity norms.
//!
//! This path re-implements the basis functions (monomial form) and uses a
//! different quadrature rule (12-point, degree 6) than the assembly code, so
//! agreement between `u' (A + rD) u` and the quadrature value of the norm is
//! genuine cross-validation rather than the same loop run twice.

use rand::{Rng, SeedableRng};

use crate::error::Result;
use crate::fem::{CoupledSpace, DirichletMap, DqOperator, MaterialParams, ReducedBlocks};
use crate::krylov::sparse::CsrMatrix;
use crate::mesh::Region;
use crate::scalar::Real;

/// 12-point symmetric triangle rule, exact to degree 6; weights sum to one.
fn degree6_rule<T: Real>() -> Vec<([T; 2], T)> {
    let g1 = 0.063089014491502_f64;
    let g2 = 0.249286745170910_f64;
    let g3a = 0.310352451033785_f64;
    let g3b = 0.053145049844816_f64;
    let w1 = 0.050844906370207_f64;
    let w2 = 0.116786275726379_f64;
    let w3 = 0.082851075618374_f64;
    let mut pts = Vec::with_capacity(12);
    for (a, w) in [(g1, w1), (g2, w2)] {
        // barycentric (1-2a, a, a) and permutations
        pts.push(([a, a], w));
        pts.push(([1.0 - 2.0 * a, a], w));
        pts.push(([a, 1.0 - 2.0 * a], w));
    }
    let g3c = 1.0 - g3a - g3b;
    for (x, y) in [(g3a, g3b), (g3b, g3a), (g3a, g3c), (g3c, g3a), (g3b, g3c), (g3c, g3b)] {
        pts.push(([x, y], w3));
    }
    pts.into_iter().map(|(p, w)| ([T::of(p[0]), T::of(p[1])], T::of(w))).collect()
}

/// P2 shape values in expanded monomial form.
fn shape_values<T: Real>(x: T, y: T) -> [T; 6] {
    let c1 = T::one();
    let c2 = T::of(2.0);
    let c3 = T::of(3.0);
    let c4 = T::of(4.0);
    [
        c1 - c3 * x - c3 * y + c2 * x * x + c4 * x * y + c2 * y * y,
        c2 * x * x - x,
        c2 * y * y - y,
        c4 * x * y,
        c4 * y * (c1 - x - y),
        c4 * x * (c1 - x - y),
    ]
}

fn shape_gradients<T: Real>(x: T, y: T) -> [[T; 2]; 6] {
    let c1 = T::one();
    let c3 = T::of(3.0);
    let c4 = T::of(4.0);
    let c8 = T::of(8.0);
    let s = -c3 + c4 * x + c4 * y;
    [
        [s, s],
        [c4 * x - c1, T::zero()],
        [T::zero(), c4 * y - c1],
        [c4 * y, c4 * x],
        [-c4 * y, c4 - c4 * x - c8 * y],
        [c4 - c8 * x - c4 * y, -c4 * x],
    ]
}

/// Norm pieces of one coefficient vector, evaluated by quadrature:
/// `a(u,u)`, the fluid `||div u||^2`, and the projected `||P_Q div u||^2`.
pub struct QuadratureNorms<T> {
    pub a_form: T,
    pub div_sq: T,
    pub projected_div_sq: T,
}

/// Evaluate on the full coefficient vector (Dirichlet DOFs included).
pub fn quadrature_norms<T: Real>(
    space: &CoupledSpace<T>,
    params: &MaterialParams<T>,
    full_u: &[T],
) -> QuadratureNorms<T> {
    assert_eq!(full_u.len(), space.n_velocity_dofs());
    let rule = degree6_rule::<T>();
    let mesh = space.mesh();
    let half = T::of(0.5);
    let mut a_form = T::zero();
    let mut div_sq = T::zero();
    let mut projected = T::zero();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let coords = mesh.triangle_coords(t);
        // affine map and its inverse transpose, by hand
        let j = [
            [coords[1][0] - coords[0][0], coords[2][0] - coords[0][0]],
            [coords[1][1] - coords[0][1], coords[2][1] - coords[0][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let area = det * half;
        let inv_t = [
            [j[1][1] / det, -j[1][0] / det],
            [-j[0][1] / det, j[0][0] / det],
        ];
        let nodes = space.element_nodes(t);
        let mut coeff = [[T::zero(); 2]; 6];
        for a in 0..6 {
            for c in 0..2 {
                coeff[a][c] = full_u[space.velocity_dof(nodes[a], c)];
            }
        }
        let (mass_w, eps_w, sdiv_w) = match tri.region {
            Region::Fluid => (params.rho_f / params.k, params.mu_f, T::zero()),
            Region::Structure => (params.rho_s / params.k, params.k * params.mu_s, params.k * params.lambda_s),
        };
        let mut elem_a = T::zero();
        let mut elem_div_sq = T::zero();
        let mut elem_div_int = T::zero();
        for (p, w) in &rule {
            let vals = shape_values(p[0], p[1]);
            let grads_ref = shape_gradients(p[0], p[1]);
            let mut u = [T::zero(); 2];
            let mut grad = [[T::zero(); 2]; 2];
            for a in 0..6 {
                let g = [
                    inv_t[0][0] * grads_ref[a][0] + inv_t[0][1] * grads_ref[a][1],
                    inv_t[1][0] * grads_ref[a][0] + inv_t[1][1] * grads_ref[a][1],
                ];
                for i in 0..2 {
                    u[i] += coeff[a][i] * vals[a];
                    grad[i][0] += coeff[a][i] * g[0];
                    grad[i][1] += coeff[a][i] * g[1];
                }
            }
            let eps_sq = grad[0][0] * grad[0][0]
                + grad[1][1] * grad[1][1]
                + half * (grad[0][1] + grad[1][0]) * (grad[0][1] + grad[1][0]);
            let div = grad[0][0] + grad[1][1];
            let scale = area * *w;
            elem_a += scale * (mass_w * (u[0] * u[0] + u[1] * u[1]) + eps_w * eps_sq + sdiv_w * div * div);
            if tri.region == Region::Fluid {
                elem_div_sq += scale * div * div;
                elem_div_int += scale * div;
            }
        }
        a_form += elem_a;
        if tri.region == Region::Fluid {
            div_sq += elem_div_sq;
            projected += elem_div_int * elem_div_int / area;
        }
    }
    QuadratureNorms { a_form, div_sq, projected_div_sq: projected }
}

fn expand_homogeneous<T: Real>(map: &DirichletMap<T>, reduced: &[T]) -> Vec<T> {
    let mut full = vec![T::zero(); map.n_full()];
    for (free, v) in reduced.iter().enumerate() {
        full[map.full_index(free)] = *v;
    }
    full
}

fn quadratic_form<T: Real>(m: &CsrMatrix<T>, x: &[T]) -> T {
    let mut y = vec![T::zero(); x.len()];
    m.matvec(x, &mut y);
    let mut acc = T::zero();
    for (a, b) in x.iter().zip(&y) {
        acc += *a * *b;
    }
    acc
}

/// Compare the matrix route against the quadrature route for both norm
/// identities over random coefficient vectors; returns the worst relative
/// deviation.
pub fn norm_identity_check<T: Real>(
    space: &CoupledSpace<T>,
    params: &MaterialParams<T>,
    reduced: &ReducedBlocks<T>,
    r: T,
    samples: usize,
    seed: u64,
) -> Result<T> {
    let n = reduced.a.nrows();
    let dq = DqOperator::new(&reduced.b, &reduced.pressure_mass)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::zero();
    for _ in 0..samples {
        let u: Vec<T> = (0..n).map(|_| T::of(rng.random_range(-1.0..1.0))).collect();
        let full = expand_homogeneous(&reduced.map, &u);
        let q = quadrature_norms(space, params, &full);

        let matrix_v = quadratic_form(&reduced.a, &u) + r * quadratic_form(&reduced.div_div, &u);
        let quad_v = q.a_form + r * q.div_sq;
        let dev_v = (matrix_v - quad_v).abs() / quad_v.abs().max(T::min_positive_value());
        worst = worst.max(dev_v);

        let matrix_vq = quadratic_form(&reduced.a, &u) + r * dq.quadratic_form(&u);
        let quad_vq = q.a_form + r * q.projected_div_sq;
        let dev_vq = (matrix_vq - quad_vq).abs() / quad_vq.abs().max(T::min_positive_value());
        worst = worst.max(dev_vq);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{apply_dirichlet, assemble_blocks, build_space};
    use crate::mesh::{build_two_region_mesh, GeometryTag};

    fn setup() -> (CoupledSpace<f64>, MaterialParams<f64>, ReducedBlocks<f64>) {
        let mesh = build_two_region_mesh(GeometryTag::CavityHalves, 0).unwrap();
        let space = build_space(&mesh).unwrap();
        let params = MaterialParams::unit().with_time_step(0.1);
        let blocks = assemble_blocks(&space, &params);
        let rhs = vec![0.0; space.n_velocity_dofs()];
        let reduced = apply_dirichlet(&blocks, &rhs, &space, &[]).unwrap();
        (space, params, reduced)
    }

    #[test]
    fn identities_hold_to_near_machine_precision() {
        let (space, params, reduced) = setup();
        let r = crate::system::scaling_parameter(&params);
        let worst = norm_identity_check(&space, &params, &reduced, r, 20, 42).unwrap();
        assert!(worst <= 1e-12, "worst deviation {worst:e}");
    }

    #[test]
    fn with_r_zero_both_identities_reduce_to_the_a_form() {
        let (space, params, reduced) = setup();
        let worst = norm_identity_check(&space, &params, &reduced, 0.0, 5, 7).unwrap();
        assert!(worst <= 1e-12, "worst deviation {worst:e}");
    }

    #[test]
    fn projection_is_a_contraction() {
        // u' D^Q u <= u' D u for arbitrary u
        use rand::{Rng, SeedableRng};
        let (_space, _params, reduced) = setup();
        let dq = DqOperator::new(&reduced.b, &reduced.pressure_mass).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let u: Vec<f64> = (0..reduced.a.nrows()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lhs = dq.quadratic_form(&u);
            let rhs = quadratic_form(&reduced.div_div, &u);
            assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0));
        }
    }
}
