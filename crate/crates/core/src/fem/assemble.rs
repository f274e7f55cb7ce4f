//! Assembly of the coupled bilinear forms.
//!
//! The velocity form combines, per region,
//!   fluid:     (rho_f/k)(u, v) + mu_f (eps(u), eps(v))
//!   structure: (rho_s/k)(u, v) + k mu_s (eps(u), eps(v)) + k lambda_s (div u, div v)
//! the coupling form is b(v, q) = (div v_f, q) with piecewise-constant q,
//! and the stabilization matrix is the fluid div-div form. All integrands
//! are polynomials of degree at most five, integrated exactly by one fixed
//! symmetric rule.

use crate::error::{Error, Result};
use crate::fem::params::MaterialParams;
use crate::fem::quadrature::{degree5, p2_ref_gradients, p2_values, ElementGeometry, TriQuadrature};
use crate::fem::space::CoupledSpace;
use crate::krylov::sparse::{CooBuilder, CsrMatrix};
use crate::mesh::Region;
use crate::scalar::Real;

/// The assembled blocks of the saddle system, before boundary elimination.
#[derive(Debug, Clone)]
pub struct AssembledBlocks<T> {
    /// coupled velocity form, symmetric
    pub a: CsrMatrix<T>,
    /// pressure x velocity divergence coupling
    pub b: CsrMatrix<T>,
    /// fluid div-div form (zero on structure-only DOFs)
    pub div_div: CsrMatrix<T>,
    /// diagonal pressure mass: fluid triangle areas
    pub pressure_mass: Vec<T>,
}

/// Fields from the previous time step, laid out on the current mesh.
#[derive(Debug, Clone, Copy)]
pub struct PrevState<'a, T> {
    /// coupled velocity coefficients (P2)
    pub velocity: &'a [T],
    /// structure displacement coefficients (P2, zero off-structure)
    pub displacement: &'a [T],
    /// discrete mesh velocity, one 2D vector per mesh node (P1)
    pub mesh_velocity: &'a [[T; 2]],
}

pub fn assemble_blocks<T: Real>(space: &CoupledSpace<T>, params: &MaterialParams<T>) -> AssembledBlocks<T> {
    AssembledBlocks {
        a: assemble_a(space, params),
        b: assemble_b(space),
        div_div: assemble_d(space),
        pressure_mass: assemble_mp(space),
    }
}

/// Region weights of the velocity form.
fn form_weights<T: Real>(region: Region, p: &MaterialParams<T>) -> (T, T, T) {
    match region {
        Region::Fluid => (p.rho_f / p.k, p.mu_f, T::zero()),
        Region::Structure => (p.rho_s / p.k, p.k * p.mu_s, p.k * p.lambda_s),
    }
}

pub fn assemble_a<T: Real>(space: &CoupledSpace<T>, params: &MaterialParams<T>) -> CsrMatrix<T> {
    let n = space.n_velocity_dofs();
    let quad = degree5::<T>();
    let mesh = space.mesh();
    let mut builder = CooBuilder::new(n, n);
    let half = T::of(0.5);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let (mass_w, eps_w, div_w) = form_weights(tri.region, params);
        let geo = ElementGeometry::new(&mesh.triangle_coords(t));
        let nodes = space.element_nodes(t);
        let mut local = [[T::zero(); 12]; 12];
        for (pt, w) in quad.points.iter().zip(&quad.weights) {
            let scale = geo.area * *w;
            let vals = p2_values(pt[0], pt[1]);
            let grads_ref = p2_ref_gradients(pt[0], pt[1]);
            let grads: Vec<[T; 2]> = grads_ref.iter().map(|g| geo.phys_gradient(*g)).collect();
            for a in 0..6 {
                for b in 0..6 {
                    // products of paired basis values are grouped so swapping
                    // (a,c) with (b,d) reproduces bit-identical entries and
                    // the assembled matrix is exactly symmetric
                    let mass = mass_w * (vals[a] * vals[b]);
                    let gdot = grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1];
                    for c in 0..2 {
                        for d in 0..2 {
                            let mut v = T::zero();
                            if c == d {
                                v += mass + eps_w * (half * gdot);
                            }
                            v += eps_w * (half * (grads[a][d] * grads[b][c]));
                            v += div_w * (grads[a][c] * grads[b][d]);
                            local[2 * a + c][2 * b + d] += scale * v;
                        }
                    }
                }
            }
        }
        scatter(&mut builder, space, &nodes, &local);
    }
    builder.into_csr()
}

pub fn assemble_b<T: Real>(space: &CoupledSpace<T>) -> CsrMatrix<T> {
    let quad = degree5::<T>();
    let mesh = space.mesh();
    let mut builder = CooBuilder::new(space.n_pressure_dofs(), space.n_velocity_dofs());
    for &t in space.fluid_triangles() {
        let row = space.pressure_index(t).expect("fluid triangle has a pressure DOF");
        let geo = ElementGeometry::new(&mesh.triangle_coords(t));
        let nodes = space.element_nodes(t);
        let mut local = [T::zero(); 12];
        for (pt, w) in quad.points.iter().zip(&quad.weights) {
            let scale = geo.area * *w;
            let grads_ref = p2_ref_gradients(pt[0], pt[1]);
            for a in 0..6 {
                let g = geo.phys_gradient(grads_ref[a]);
                for c in 0..2 {
                    local[2 * a + c] += scale * g[c];
                }
            }
        }
        for a in 0..6 {
            for c in 0..2 {
                builder.push(row, space.velocity_dof(nodes[a], c), local[2 * a + c]);
            }
        }
    }
    builder.into_csr()
}

pub fn assemble_d<T: Real>(space: &CoupledSpace<T>) -> CsrMatrix<T> {
    let n = space.n_velocity_dofs();
    let quad = degree5::<T>();
    let mesh = space.mesh();
    let mut builder = CooBuilder::new(n, n);
    for &t in space.fluid_triangles() {
        let geo = ElementGeometry::new(&mesh.triangle_coords(t));
        let nodes = space.element_nodes(t);
        let mut local = [[T::zero(); 12]; 12];
        for (pt, w) in quad.points.iter().zip(&quad.weights) {
            let scale = geo.area * *w;
            let grads_ref = p2_ref_gradients(pt[0], pt[1]);
            let grads: Vec<[T; 2]> = grads_ref.iter().map(|g| geo.phys_gradient(*g)).collect();
            for a in 0..6 {
                for b in 0..6 {
                    for c in 0..2 {
                        for d in 0..2 {
                            local[2 * a + c][2 * b + d] += scale * (grads[a][c] * grads[b][d]);
                        }
                    }
                }
            }
        }
        scatter(&mut builder, space, &nodes, &local);
    }
    builder.into_csr()
}

pub fn assemble_mp<T: Real>(space: &CoupledSpace<T>) -> Vec<T> {
    space.fluid_triangles().iter().map(|&t| space.mesh().triangle_area(t)).collect()
}

/// Full H1 Gram matrix `(u,v) + (grad u, grad v)` over both regions,
/// componentwise; used by the inf-sup study as the parameter-free norm.
pub fn assemble_h1_gram<T: Real>(space: &CoupledSpace<T>) -> CsrMatrix<T> {
    let n = space.n_velocity_dofs();
    let quad = degree5::<T>();
    let mesh = space.mesh();
    let mut builder = CooBuilder::new(n, n);
    for (t, _) in mesh.triangles().iter().enumerate() {
        let geo = ElementGeometry::new(&mesh.triangle_coords(t));
        let nodes = space.element_nodes(t);
        let mut local = [[T::zero(); 12]; 12];
        for (pt, w) in quad.points.iter().zip(&quad.weights) {
            let scale = geo.area * *w;
            let vals = p2_values(pt[0], pt[1]);
            let grads_ref = p2_ref_gradients(pt[0], pt[1]);
            let grads: Vec<[T; 2]> = grads_ref.iter().map(|g| geo.phys_gradient(*g)).collect();
            for a in 0..6 {
                for b in 0..6 {
                    let v = vals[a] * vals[b] + grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1];
                    for c in 0..2 {
                        local[2 * a + c][2 * b + c] += scale * v;
                    }
                }
            }
        }
        scatter(&mut builder, space, &nodes, &local);
    }
    builder.into_csr()
}

fn scatter<T: Real>(
    builder: &mut CooBuilder<T>,
    space: &CoupledSpace<T>,
    nodes: &[usize; 6],
    local: &[[T; 12]; 12],
) {
    for a in 0..6 {
        for c in 0..2 {
            let row = space.velocity_dof(nodes[a], c);
            for b in 0..6 {
                for d in 0..2 {
                    let v = local[2 * a + c][2 * b + d];
                    if v != T::zero() {
                        builder.push(row, space.velocity_dof(nodes[b], d), v);
                    }
                }
            }
        }
    }
}

/// Matrix-free application of `D^Q = B' Mp^{-1} B`, plus its explicit sparse
/// form (cheap for piecewise-constant pressure).
pub struct DqOperator<'a, T> {
    b: &'a CsrMatrix<T>,
    inv_mass: Vec<T>,
}

impl<'a, T: Real> DqOperator<'a, T> {
    pub fn new(b: &'a CsrMatrix<T>, pressure_mass: &[T]) -> Result<Self> {
        if b.nrows() != pressure_mass.len() {
            return Err(Error::DimensionMismatch { expected: b.nrows(), got: pressure_mass.len() });
        }
        if pressure_mass.iter().any(|m| !(*m > T::zero())) {
            return Err(Error::InvalidParameter("pressure mass must be positive".into()));
        }
        Ok(DqOperator { b, inv_mass: pressure_mass.iter().map(|m| T::one() / *m).collect() })
    }

    /// y = B' Mp^{-1} B x
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let mut p = vec![T::zero(); self.b.nrows()];
        self.b.matvec(x, &mut p);
        for (pi, mi) in p.iter_mut().zip(&self.inv_mass) {
            *pi = *pi * *mi;
        }
        self.b.matvec_transpose(&p, y);
    }

    pub fn quadratic_form(&self, x: &[T]) -> T {
        let mut p = vec![T::zero(); self.b.nrows()];
        self.b.matvec(x, &mut p);
        let mut acc = T::zero();
        for (pi, mi) in p.iter().zip(&self.inv_mass) {
            acc += *pi * *pi * *mi;
        }
        acc
    }

    /// Explicit sparse product.
    pub fn explicit(&self) -> CsrMatrix<T> {
        let scaled = scale_rows(self.b, &self.inv_mass);
        self.b.transpose().matmul(&scaled).expect("dimensions agree")
    }
}

pub(crate) fn scale_rows<T: Real>(m: &CsrMatrix<T>, d: &[T]) -> CsrMatrix<T> {
    assert_eq!(d.len(), m.nrows());
    let mut triplets = Vec::with_capacity(m.nnz());
    for r in 0..m.nrows() {
        let (cols, vals) = m.row(r);
        for (c, v) in cols.iter().zip(vals) {
            triplets.push((r, *c, *v * d[r]));
        }
    }
    CsrMatrix::from_triplets(m.nrows(), m.ncols(), triplets)
}

/// Load vector of the modified explicit scheme on the current mesh:
/// previous-step inertia, explicit convection (with the momentum-consistent
/// `-rho_f` weight), the structure stress recall term, and body forces.
pub fn assemble_rhs<T: Real>(
    space: &CoupledSpace<T>,
    params: &MaterialParams<T>,
    state: &PrevState<'_, T>,
    body_force_fluid: [T; 2],
    body_force_structure: [T; 2],
) -> Result<Vec<T>> {
    let n = space.n_velocity_dofs();
    if state.velocity.len() != n {
        return Err(Error::MissingState(format!(
            "previous velocity has {} entries, space has {n}",
            state.velocity.len()
        )));
    }
    if state.displacement.len() != n {
        return Err(Error::MissingState(format!(
            "previous displacement has {} entries, space has {n}",
            state.displacement.len()
        )));
    }
    let mesh = space.mesh();
    if state.mesh_velocity.len() != mesh.nodes().len() {
        return Err(Error::MissingState(format!(
            "mesh velocity has {} entries, mesh has {} nodes",
            state.mesh_velocity.len(),
            mesh.nodes().len()
        )));
    }

    let quad: TriQuadrature<T> = degree5();
    let mut rhs = vec![T::zero(); n];
    let one = T::one();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = ElementGeometry::new(&mesh.triangle_coords(t));
        let nodes = space.element_nodes(t);
        // element coefficient gather
        let mut vel = [[T::zero(); 2]; 6];
        let mut disp = [[T::zero(); 2]; 6];
        for a in 0..6 {
            for c in 0..2 {
                vel[a][c] = state.velocity[space.velocity_dof(nodes[a], c)];
                disp[a][c] = state.displacement[space.velocity_dof(nodes[a], c)];
            }
        }
        let verts = tri.vertices;
        let mut local = [T::zero(); 12];
        for (pt, w) in quad.points.iter().zip(&quad.weights) {
            let scale = geo.area * *w;
            let vals = p2_values(pt[0], pt[1]);
            let grads_ref = p2_ref_gradients(pt[0], pt[1]);
            let grads: Vec<[T; 2]> = grads_ref.iter().map(|g| geo.phys_gradient(*g)).collect();

            // previous velocity and its gradient at the point
            let mut v = [T::zero(); 2];
            let mut grad_v = [[T::zero(); 2]; 2]; // grad_v[i][c] = d_c v_i
            for a in 0..6 {
                for i in 0..2 {
                    v[i] += vel[a][i] * vals[a];
                    for c in 0..2 {
                        grad_v[i][c] += vel[a][i] * grads[a][c];
                    }
                }
            }

            let mut load = [T::zero(); 2];
            match tri.region {
                Region::Fluid => {
                    // P1 mesh velocity at the point
                    let bary = [one - pt[0] - pt[1], pt[0], pt[1]];
                    let mut wv = [T::zero(); 2];
                    for (lv, &vert) in bary.iter().zip(&verts) {
                        let mv = state.mesh_velocity[vert];
                        wv[0] += *lv * mv[0];
                        wv[1] += *lv * mv[1];
                    }
                    let rel = [v[0] - wv[0], v[1] - wv[1]];
                    for i in 0..2 {
                        let conv = rel[0] * grad_v[i][0] + rel[1] * grad_v[i][1];
                        load[i] = body_force_fluid[i] + params.rho_f / params.k * v[i]
                            - params.rho_f * conv;
                    }
                    for a in 0..6 {
                        for c in 0..2 {
                            local[2 * a + c] += scale * load[c] * vals[a];
                        }
                    }
                }
                Region::Structure => {
                    for i in 0..2 {
                        load[i] = body_force_structure[i] + params.rho_s / params.k * v[i];
                    }
                    // stress recall -(P(u^n), grad phi)
                    let mut grad_u = [[T::zero(); 2]; 2];
                    for a in 0..6 {
                        for i in 0..2 {
                            for c in 0..2 {
                                grad_u[i][c] += disp[a][i] * grads[a][c];
                            }
                        }
                    }
                    let half = T::of(0.5);
                    let div_u = grad_u[0][0] + grad_u[1][1];
                    let mut stress = [[T::zero(); 2]; 2];
                    for i in 0..2 {
                        for jj in 0..2 {
                            stress[i][jj] = params.mu_s * half * (grad_u[i][jj] + grad_u[jj][i]);
                        }
                        stress[i][i] += params.lambda_s * div_u;
                    }
                    for a in 0..6 {
                        for c in 0..2 {
                            let mut recall = T::zero();
                            for jj in 0..2 {
                                recall += stress[c][jj] * grads[a][jj];
                            }
                            local[2 * a + c] += scale * (load[c] * vals[a] - recall);
                        }
                    }
                }
            }
        }
        for a in 0..6 {
            for c in 0..2 {
                rhs[space.velocity_dof(nodes[a], c)] += local[2 * a + c];
            }
        }
    }
    Ok(rhs)
}
