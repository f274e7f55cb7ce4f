//! Discrete ALE mesh motion.
//!
//! The fluid mesh follows the interface by a piecewise-linear extension of
//! the interface displacement: zero on the outer fluid boundary, prescribed
//! on the interface, and harmonic (componentwise Laplacian) or linear-elastic
//! in between. Piecewise-linear is the only choice that keeps triangles
//! triangular, so the per-element Jacobian of the motion is constant and the
//! regularity quantities of the interface map are exact elementwise maxima.

use std::collections::BTreeMap;

use super::{Mesh, Region};
use crate::error::{Error, Result};
use crate::krylov::lu::sparse_lu_factorize;
use crate::krylov::sparse::CooBuilder;
use crate::scalar::Real;

/// Extension operator for the interior displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AleOperator<T> {
    /// Componentwise Laplace equation.
    Laplacian,
    /// `-mu Laplacian - lambda grad(div)`, weighting mesh stiffness near the
    /// interface.
    Elasticity { mu: T, lambda: T },
}

impl<T: Real> Default for AleOperator<T> {
    fn default() -> Self {
        AleOperator::Laplacian
    }
}

/// A solved mesh displacement over the reference mesh.
#[derive(Debug, Clone)]
pub struct MeshMotion<T> {
    reference: Mesh<T>,
    /// One 2D displacement per mesh node; zero on structure nodes.
    displacement: Vec<[T; 2]>,
    operator: AleOperator<T>,
    /// min over fluid triangles of det(I + grad d); the motion is only
    /// usable while this stays positive.
    min_det: T,
}

/// Geometric regularity of the interface map.
#[derive(Debug, Clone, Copy)]
pub struct GeometryReport<T> {
    /// max(sup ||grad x_s||_2, 1) over interface-adjacent fluid elements.
    pub d0: T,
    /// max(sup 1/det(grad x_s), 1) over interface-adjacent fluid elements.
    pub d1: T,
    /// min det(grad x_s) over all fluid elements.
    pub min_det: T,
    /// smallest triangle angle of the moved configuration, radians.
    pub min_angle: T,
}

impl<T: Real> MeshMotion<T> {
    pub fn zero(reference: Mesh<T>) -> Self {
        let n = reference.nodes().len();
        MeshMotion {
            reference,
            displacement: vec![[T::zero(); 2]; n],
            operator: AleOperator::Laplacian,
            min_det: T::one(),
        }
    }

    pub fn reference(&self) -> &Mesh<T> {
        &self.reference
    }

    pub fn displacement(&self) -> &[[T; 2]] {
        &self.displacement
    }

    pub fn operator(&self) -> AleOperator<T> {
        self.operator
    }

    pub fn min_det(&self) -> T {
        self.min_det
    }

    pub fn is_valid(&self) -> bool {
        self.min_det > T::zero()
    }

    /// Jacobian `I + grad d` of the motion on one fluid triangle (constant
    /// per element for P1 displacement).
    pub fn jacobian(&self, t: usize) -> [[T; 2]; 2] {
        let tri = self.reference.triangles()[t];
        let coords = self.reference.triangle_coords(t);
        let grads = p1_gradients(&coords);
        let mut f = [[T::zero(); 2]; 2];
        f[0][0] = T::one();
        f[1][1] = T::one();
        for (a, g) in grads.iter().enumerate() {
            let d = self.displacement[tri.vertices[a]];
            for r in 0..2 {
                for c in 0..2 {
                    f[r][c] += d[r] * g[c];
                }
            }
        }
        f
    }
}

/// Constant gradients of the three barycentric basis functions.
pub(crate) fn p1_gradients<T: Real>(coords: &[[T; 2]; 3]) -> [[T; 2]; 3] {
    let two = T::of(2.0);
    let area = ((coords[1][0] - coords[0][0]) * (coords[2][1] - coords[0][1])
        - (coords[1][1] - coords[0][1]) * (coords[2][0] - coords[0][0]))
        / two;
    let inv = T::one() / (two * area);
    let mut g = [[T::zero(); 2]; 3];
    for i in 0..3 {
        let pn = coords[(i + 1) % 3];
        let pp = coords[(i + 2) % 3];
        // rotate (p_{i+1} - p_{i+2}) by -90 degrees
        g[i] = [(pn[1] - pp[1]) * inv, -(pn[0] - pp[0]) * inv];
    }
    g
}

fn det2<T: Real>(f: &[[T; 2]; 2]) -> T {
    f[0][0] * f[1][1] - f[0][1] * f[1][0]
}

/// Induced 2-norm of a 2x2 matrix (largest singular value).
fn norm2<T: Real>(f: &[[T; 2]; 2]) -> T {
    let p = f[0][0] * f[0][0] + f[1][0] * f[1][0];
    let r = f[0][1] * f[0][1] + f[1][1] * f[1][1];
    let q = f[0][0] * f[0][1] + f[1][0] * f[1][1];
    let half = T::of(0.5);
    let mid = (p + r) * half;
    let rad = (((p - r) * half) * ((p - r) * half) + q * q).sqrt();
    (mid + rad).max(T::zero()).sqrt()
}

/// Solve the P1 vector extension with the given interface displacement
/// (one value per entry of `mesh.interface_vertices()`, fluid side) and zero
/// data on the outer fluid boundary.
pub fn solve_ale_extension<T: Real>(
    mesh: &Mesh<T>,
    interface_displacement: &[[T; 2]],
    operator: AleOperator<T>,
) -> Result<MeshMotion<T>> {
    let pairs = mesh.interface_vertices();
    if interface_displacement.len() != pairs.len() {
        return Err(Error::MissingState(format!(
            "interface displacement has {} entries, interface has {} vertices",
            interface_displacement.len(),
            pairs.len()
        )));
    }
    let mut boundary: BTreeMap<usize, [T; 2]> = BTreeMap::new();
    for be in mesh.boundary_edges() {
        if be.marker == super::BoundaryMarker::Interface {
            continue;
        }
        for &v in &be.vertices {
            if mesh.node_region(v) == Some(Region::Fluid) {
                boundary.insert(v, [T::zero(); 2]);
            }
        }
    }
    for ((fluid_v, _), d) in pairs.iter().zip(interface_displacement) {
        // prescribed data wins over the zero outer data on shared corners
        boundary.insert(*fluid_v, *d);
    }
    solve_extension_with_boundary(mesh, &boundary, operator)
}

/// Lower-level entry: prescribe displacement on an arbitrary set of fluid
/// nodes that must cover the whole fluid boundary (outer and interface).
/// Exposed for affine-reproduction style checks.
pub fn solve_extension_with_boundary<T: Real>(
    mesh: &Mesh<T>,
    boundary_values: &BTreeMap<usize, [T; 2]>,
    operator: AleOperator<T>,
) -> Result<MeshMotion<T>> {
    let n_nodes = mesh.nodes().len();
    // free fluid nodes get equation numbers
    let mut index: Vec<Option<usize>> = vec![None; n_nodes];
    let mut free: Vec<usize> = Vec::new();
    for v in 0..n_nodes {
        if mesh.node_region(v) == Some(Region::Fluid) && !boundary_values.contains_key(&v) {
            index[v] = Some(free.len());
            free.push(v);
        }
    }
    let n_free = free.len();
    let (mu, lambda) = match operator {
        AleOperator::Laplacian => (T::one(), T::zero()),
        AleOperator::Elasticity { mu, lambda } => (mu, lambda),
    };

    let mut builder = CooBuilder::new(2 * n_free, 2 * n_free);
    let mut rhs = vec![T::zero(); 2 * n_free];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if tri.region != Region::Fluid {
            continue;
        }
        let coords = mesh.triangle_coords(t);
        let grads = p1_gradients(&coords);
        let area = mesh.triangle_area(t);
        for a in 0..3 {
            for b in 0..3 {
                // mu (grad u : grad phi) + lambda (div u)(div phi)
                let lap = mu * area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                for c in 0..2 {
                    for d in 0..2 {
                        // row (a,c) tests, column (b,d) trials
                        let mut val = if c == d { lap } else { T::zero() };
                        val += lambda * area * grads[a][c] * grads[b][d];
                        if val == T::zero() {
                            continue;
                        }
                        let va = tri.vertices[a];
                        let vb = tri.vertices[b];
                        match (index[va], index[vb]) {
                            (Some(ia), Some(ib)) => builder.push(2 * ia + c, 2 * ib + d, val),
                            (Some(ia), None) => {
                                if let Some(g) = boundary_values.get(&vb) {
                                    rhs[2 * ia + c] -= val * g[d];
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
    }

    let mut displacement = vec![[T::zero(); 2]; n_nodes];
    for (&v, g) in boundary_values {
        displacement[v] = *g;
    }
    if n_free > 0 {
        let matrix = builder.into_csr();
        let lu = sparse_lu_factorize(&matrix)?;
        let sol = lu.solve(&rhs);
        for (i, &v) in free.iter().enumerate() {
            displacement[v] = [sol[2 * i], sol[2 * i + 1]];
        }
    }

    let mut motion = MeshMotion { reference: mesh.clone(), displacement, operator, min_det: T::one() };
    let mut min_det = T::infinity();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if tri.region == Region::Fluid {
            min_det = min_det.min(det2(&motion.jacobian(t)));
        }
    }
    if !min_det.is_finite() {
        min_det = T::one(); // no fluid elements
    }
    motion.min_det = min_det;
    Ok(motion)
}

/// Apply a valid motion: fluid nodes move, structure stays on the reference
/// configuration, connectivity is untouched.
pub fn move_mesh<T: Real>(mesh: &Mesh<T>, motion: &MeshMotion<T>) -> Result<Mesh<T>> {
    if !motion.is_valid() {
        return Err(Error::InvalidMotion { min_det: motion.min_det.as_f64() });
    }
    if mesh.nodes().len() != motion.displacement.len() {
        return Err(Error::DimensionMismatch {
            expected: mesh.nodes().len(),
            got: motion.displacement.len(),
        });
    }
    let nodes: Vec<[T; 2]> = mesh
        .nodes()
        .iter()
        .zip(&motion.displacement)
        .map(|(p, d)| [p[0] + d[0], p[1] + d[1]])
        .collect();
    mesh.with_nodes(nodes)
}

/// Discrete mesh velocity `(A^{n+1} - A^n) / k`, nodewise.
pub fn mesh_velocity<T: Real>(
    motion_prev: &MeshMotion<T>,
    motion_next: &MeshMotion<T>,
    k: T,
) -> Result<Vec<[T; 2]>> {
    if k <= T::zero() {
        return Err(Error::NonPositiveTimeStep);
    }
    if motion_prev.displacement.len() != motion_next.displacement.len() {
        return Err(Error::DimensionMismatch {
            expected: motion_prev.displacement.len(),
            got: motion_next.displacement.len(),
        });
    }
    Ok(motion_prev
        .displacement
        .iter()
        .zip(&motion_next.displacement)
        .map(|(a, b)| [(b[0] - a[0]) / k, (b[1] - a[1]) / k])
        .collect())
}

/// Regularity quantities of the motion: `d0`, `d1` over interface-adjacent
/// fluid elements, the global fluid `min_det`, and the smallest angle of the
/// moved mesh. Degenerate configurations are reported, not rejected.
pub fn geometry_report<T: Real>(mesh: &Mesh<T>, motion: &MeshMotion<T>) -> GeometryReport<T> {
    let interface_nodes: std::collections::BTreeSet<usize> =
        mesh.interface_vertices().iter().map(|&(f, _)| f).collect();
    let mut d0 = T::one();
    let mut d1 = T::one();
    let mut min_det = T::infinity();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if tri.region != Region::Fluid {
            continue;
        }
        let f = motion.jacobian(t);
        let det = det2(&f);
        min_det = min_det.min(det);
        let touches_interface = tri.vertices.iter().any(|v| interface_nodes.contains(v));
        if touches_interface {
            d0 = d0.max(norm2(&f));
            if det > T::zero() {
                d1 = d1.max(T::one() / det);
            } else {
                d1 = T::infinity();
            }
        }
    }
    if !min_det.is_finite() {
        min_det = T::one();
    }

    let min_angle = match move_mesh(mesh, motion) {
        Ok(moved) => smallest_angle(&moved),
        Err(_) => T::zero(),
    };
    GeometryReport { d0, d1, min_det, min_angle }
}

fn smallest_angle<T: Real>(mesh: &Mesh<T>) -> T {
    let mut min = T::infinity();
    for t in 0..mesh.triangles().len() {
        let c = mesh.triangle_coords(t);
        for i in 0..3 {
            let a = c[i];
            let b = c[(i + 1) % 3];
            let d = c[(i + 2) % 3];
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [d[0] - a[0], d[1] - a[1]];
            let dot = u[0] * v[0] + u[1] * v[1];
            let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
            let nv = (v[0] * v[0] + v[1] * v[1]).sqrt();
            let cos = (dot / (nu * nv)).max(-T::one()).min(T::one());
            min = min.min(cos.acos());
        }
    }
    min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_two_region_mesh, GeometryTag};

    fn cavity(level: usize) -> Mesh<f64> {
        build_two_region_mesh(GeometryTag::CavityHalves, level).unwrap()
    }

    #[test]
    fn zero_interface_data_gives_zero_motion() {
        let mesh = cavity(1);
        let datum = vec![[0.0, 0.0]; mesh.interface_vertices().len()];
        let motion = solve_ale_extension(&mesh, &datum, AleOperator::Laplacian).unwrap();
        assert!(motion.displacement().iter().all(|d| d[0] == 0.0 && d[1] == 0.0));
        assert_eq!(motion.min_det(), 1.0);
    }

    fn affine_boundary(mesh: &Mesh<f64>) -> BTreeMap<usize, [f64; 2]> {
        // g(x) = M x + c with a mild M so the motion stays valid
        let m = [[0.02, 0.01], [-0.015, 0.03]];
        let c = [0.005, -0.002];
        let mut bv = BTreeMap::new();
        for be in mesh.boundary_edges() {
            for &v in &be.vertices {
                if mesh.node_region(v) == Some(Region::Fluid) {
                    let p = mesh.nodes()[v];
                    bv.insert(
                        v,
                        [
                            m[0][0] * p[0] + m[0][1] * p[1] + c[0],
                            m[1][0] * p[0] + m[1][1] * p[1] + c[1],
                        ],
                    );
                }
            }
        }
        bv
    }

    #[test]
    fn affine_boundary_data_is_reproduced_exactly() {
        let mesh = cavity(1);
        for op in [AleOperator::Laplacian, AleOperator::Elasticity { mu: 1.0, lambda: 1.0 }] {
            let bv = affine_boundary(&mesh);
            let motion = solve_extension_with_boundary(&mesh, &bv, op).unwrap();
            let m = [[0.02, 0.01], [-0.015, 0.03]];
            let c = [0.005, -0.002];
            for v in 0..mesh.nodes().len() {
                if mesh.node_region(v) != Some(Region::Fluid) {
                    continue;
                }
                let p = mesh.nodes()[v];
                let expect = [
                    m[0][0] * p[0] + m[0][1] * p[1] + c[0],
                    m[1][0] * p[0] + m[1][1] * p[1] + c[1],
                ];
                let got = motion.displacement()[v];
                assert!((got[0] - expect[0]).abs() <= 1e-12, "{op:?}");
                assert!((got[1] - expect[1]).abs() <= 1e-12, "{op:?}");
            }
        }
    }

    #[test]
    fn extension_is_linear_in_the_datum() {
        let mesh = cavity(0);
        let n_iface = mesh.interface_vertices().len();
        let mut datum = vec![[0.0, 0.0]; n_iface];
        for (i, d) in datum.iter_mut().enumerate() {
            d[0] = 0.01 * (i as f64 + 1.0);
            d[1] = -0.005 * (i as f64);
        }
        let alpha = 3.5;
        let scaled: Vec<[f64; 2]> = datum.iter().map(|d| [alpha * d[0], alpha * d[1]]).collect();
        let m1 = solve_ale_extension(&mesh, &datum, AleOperator::Laplacian).unwrap();
        let m2 = solve_ale_extension(&mesh, &scaled, AleOperator::Laplacian).unwrap();
        let scale_ref: f64 = m1.displacement().iter().flat_map(|d| d.iter()).fold(0.0, |m, v| m.max(v.abs()));
        for (a, b) in m1.displacement().iter().zip(m2.displacement()) {
            assert!((alpha * a[0] - b[0]).abs() <= 1e-12 * alpha * scale_ref.max(1.0));
            assert!((alpha * a[1] - b[1]).abs() <= 1e-12 * alpha * scale_ref.max(1.0));
        }
    }

    #[test]
    fn move_mesh_preserves_connectivity_and_rejects_invalid() {
        let mesh = cavity(0);
        let motion = MeshMotion::zero(mesh.clone());
        let moved = move_mesh(&mesh, &motion).unwrap();
        assert_eq!(moved.nodes(), mesh.nodes());
        assert_eq!(moved.triangles(), mesh.triangles());

        let mut bad = MeshMotion::zero(mesh.clone());
        bad.min_det = -0.5;
        assert!(matches!(move_mesh(&mesh, &bad), Err(Error::InvalidMotion { .. })));
    }

    #[test]
    fn rigid_translation_preserves_fluid_areas() {
        let mesh = cavity(0);
        let mut motion = MeshMotion::zero(mesh.clone());
        for v in 0..mesh.nodes().len() {
            if mesh.node_region(v) == Some(Region::Fluid) {
                motion.displacement[v] = [0.3, -0.1];
            }
        }
        let moved = move_mesh(&mesh, &motion).unwrap();
        for (t, tri) in mesh.triangles().iter().enumerate() {
            if tri.region == Region::Fluid {
                assert!((moved.triangle_area(t) - mesh.triangle_area(t)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mesh_velocity_trivial_cases() {
        let mesh = cavity(0);
        let zero = MeshMotion::zero(mesh.clone());
        let same = mesh_velocity(&zero, &zero, 0.1).unwrap();
        assert!(same.iter().all(|v| v[0] == 0.0 && v[1] == 0.0));

        let k = 0.25;
        let c = [0.02, -0.01];
        let mut next = MeshMotion::zero(mesh.clone());
        for d in next.displacement.iter_mut() {
            *d = [k * c[0], k * c[1]];
        }
        let vel = mesh_velocity(&zero, &next, k).unwrap();
        for v in vel {
            assert!((v[0] - c[0]).abs() < 1e-15 && (v[1] - c[1]).abs() < 1e-15);
        }
        assert!(mesh_velocity(&zero, &next, 0.0).is_err());
    }

    #[test]
    fn geometry_report_identity_and_uniform_stretch() {
        let mesh = cavity(0);
        let report = geometry_report(&mesh, &MeshMotion::zero(mesh.clone()));
        assert_eq!(report.d0, 1.0);
        assert_eq!(report.d1, 1.0);
        assert_eq!(report.min_det, 1.0);

        // motion x -> (2x, y): grad = diag(2, 1), det = 2
        let mut stretch = MeshMotion::zero(mesh.clone());
        for v in 0..mesh.nodes().len() {
            if mesh.node_region(v) == Some(Region::Fluid) {
                stretch.displacement[v] = [mesh.nodes()[v][0], 0.0];
            }
        }
        stretch.min_det = 2.0;
        let report = geometry_report(&mesh, &stretch);
        assert!((report.d0 - 2.0).abs() < 1e-13);
        assert!((report.d1 - 1.0).abs() < 1e-13);
        assert!((report.min_det - 2.0).abs() < 1e-13);
    }
}

#[cfg(test)]
mod oracle_tests {
    use super::*;
    use crate::mesh::{build_two_region_mesh, GeometryTag, Region};
    use nalgebra::{DMatrix, DVector, Matrix2};
    use std::collections::BTreeMap;

    /// Independent P1 gradients: solve the 3x3 Vandermonde system for each
    /// barycentric function instead of the rotated-edge formula.
    fn oracle_gradients(coords: &[[f64; 2]; 3]) -> [[f64; 2]; 3] {
        let v = DMatrix::from_row_slice(
            3,
            3,
            &[
                1.0, coords[0][0], coords[0][1],
                1.0, coords[1][0], coords[1][1],
                1.0, coords[2][0], coords[2][1],
            ],
        );
        let lu = v.lu();
        let mut out = [[0.0; 2]; 3];
        for a in 0..3 {
            let mut e = DVector::zeros(3);
            e[a] = 1.0;
            let c = lu.solve(&e).unwrap();
            out[a] = [c[1], c[2]];
        }
        out
    }

    #[test]
    fn tip_displacement_matches_dense_solve_oracle() {
        let mesh: Mesh<f64> = build_two_region_mesh(GeometryTag::CavityHalves, 1).unwrap();
        let pairs = mesh.interface_vertices();
        // displace the interface vertex nearest the domain center
        let mut datum = vec![[0.0, 0.0]; pairs.len()];
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &(fv, _)) in pairs.iter().enumerate() {
            let p = mesh.nodes()[fv];
            let d = (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        datum[best] = [0.0, 0.05];
        let motion = solve_ale_extension(&mesh, &datum, AleOperator::Laplacian).unwrap();
        assert!(motion.is_valid());

        // dense oracle: assemble the same Dirichlet problem with
        // independently computed gradients and solve with a dense LU
        let mut boundary: BTreeMap<usize, [f64; 2]> = BTreeMap::new();
        for be in mesh.boundary_edges() {
            if be.marker == crate::mesh::BoundaryMarker::Interface {
                continue;
            }
            for &v in &be.vertices {
                if mesh.node_region(v) == Some(Region::Fluid) {
                    boundary.insert(v, [0.0, 0.0]);
                }
            }
        }
        for (&(fv, _), d) in pairs.iter().zip(&datum) {
            boundary.insert(fv, *d);
        }
        let mut index = vec![None; mesh.nodes().len()];
        let mut free = Vec::new();
        for v in 0..mesh.nodes().len() {
            if mesh.node_region(v) == Some(Region::Fluid) && !boundary.contains_key(&v) {
                index[v] = Some(free.len());
                free.push(v);
            }
        }
        let n = 2 * free.len();
        let mut k = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for (t, tri) in mesh.triangles().iter().enumerate() {
            if tri.region != Region::Fluid {
                continue;
            }
            let coords = mesh.triangle_coords(t);
            let g = oracle_gradients(&coords);
            let area = mesh.triangle_area(t);
            for a in 0..3 {
                for b in 0..3 {
                    let val = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    let (va, vb) = (tri.vertices[a], tri.vertices[b]);
                    for c in 0..2 {
                        match (index[va], index[vb]) {
                            (Some(ia), Some(ib)) => k[(2 * ia + c, 2 * ib + c)] += val,
                            (Some(ia), None) => rhs[2 * ia + c] -= val * boundary[&vb][c],
                            _ => {}
                        }
                    }
                }
            }
        }
        let sol = k.lu().solve(&rhs).expect("oracle system solvable");
        let scale = sol.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (i, &v) in free.iter().enumerate() {
            let got = motion.displacement()[v];
            assert!((got[0] - sol[2 * i]).abs() <= 1e-10 * scale.max(1.0));
            assert!((got[1] - sol[2 * i + 1]).abs() <= 1e-10 * scale.max(1.0));
        }

        // nodewise difference quotient matches a direct computation
        let k_step = 0.01;
        let zero = MeshMotion::zero(mesh.clone());
        let vel = mesh_velocity(&zero, &motion, k_step).unwrap();
        for (v, d) in vel.iter().zip(motion.displacement()) {
            assert!((v[0] - d[0] / k_step).abs() <= 1e-15 * (d[0].abs() / k_step).max(1.0));
            assert!((v[1] - d[1] / k_step).abs() <= 1e-15 * (d[1].abs() / k_step).max(1.0));
        }

        // moved-mesh areas agree with a direct recomputation from moved nodes
        let moved = move_mesh(&mesh, &motion).unwrap();
        for (t, tri) in mesh.triangles().iter().enumerate() {
            if tri.region != Region::Fluid {
                continue;
            }
            let p: Vec<[f64; 2]> = tri
                .vertices
                .iter()
                .map(|&v| {
                    let q = mesh.nodes()[v];
                    let d = motion.displacement()[v];
                    [q[0] + d[0], q[1] + d[1]]
                })
                .collect();
            let area2 = ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]))
                / 2.0;
            assert!(area2 > 0.0);
            assert!((moved.triangle_area(t) - area2).abs() <= 1e-15);
        }

        // geometry report matches a per-element SVD oracle
        let report = geometry_report(&mesh, &motion);
        let iface: std::collections::BTreeSet<usize> =
            mesh.interface_vertices().iter().map(|&(f, _)| f).collect();
        let mut d0 = 1.0_f64;
        let mut d1 = 1.0_f64;
        for (t, tri) in mesh.triangles().iter().enumerate() {
            if tri.region != Region::Fluid || !tri.vertices.iter().any(|v| iface.contains(v)) {
                continue;
            }
            let f = motion.jacobian(t);
            let m = Matrix2::new(f[0][0], f[0][1], f[1][0], f[1][1]);
            let svd = m.svd(false, false);
            let smax = svd.singular_values.max();
            d0 = d0.max(smax);
            d1 = d1.max(1.0 / m.determinant());
        }
        assert!((report.d0 - d0).abs() <= 1e-12 * d0);
        assert!((report.d1 - d1).abs() <= 1e-12 * d1);
    }
}
