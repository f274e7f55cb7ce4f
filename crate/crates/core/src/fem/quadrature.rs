//! Triangle quadrature and P2 basis evaluation on the reference element.
//!
//! The reference triangle has vertices (0,0), (1,0), (0,1). Weights sum to
//! one, so an integral is `area * sum w_q f(p_q)`. The symmetric degree-5
//! rule is exact for every bilinear form in this kit (the worst integrand,
//! the P2 mass matrix, has degree 4; the explicit convection load has
//! degree 5).

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct TriQuadrature<T> {
    pub points: Vec<[T; 2]>,
    pub weights: Vec<T>,
}

/// Symmetric 7-point rule, exact to degree 5.
pub fn degree5<T: Real>() -> TriQuadrature<T> {
    let s15 = T::of(15.0).sqrt();
    let t21 = T::of(21.0);
    let t1200 = T::of(1200.0);
    let third = T::one() / T::of(3.0);
    let b = (T::of(6.0) + s15) / t21; // 0.4701...
    let a = (T::of(9.0) - T::of(2.0) * s15) / t21; // 0.0597...
    let d = (T::of(6.0) - s15) / t21; // 0.1012...
    let c = (T::of(9.0) + T::of(2.0) * s15) / t21; // 0.7974...
    let wb = (T::of(155.0) + s15) / t1200;
    let wc = (T::of(155.0) - s15) / t1200;
    let w0 = T::of(9.0) / T::of(40.0);
    // barycentric (l0, l1, l2) maps to reference (xi, eta) = (l1, l2)
    TriQuadrature {
        points: vec![
            [third, third],
            [b, b],
            [a, b],
            [b, a],
            [d, d],
            [c, d],
            [d, c],
        ],
        weights: vec![w0, wb, wb, wb, wc, wc, wc],
    }
}

/// P2 shape functions at a reference point. Local node order: the three
/// vertices, then the midpoints opposite each vertex (edge 12, edge 20,
/// edge 01).
pub fn p2_values<T: Real>(xi: T, eta: T) -> [T; 6] {
    let one = T::one();
    let two = T::of(2.0);
    let four = T::of(4.0);
    let l0 = one - xi - eta;
    let l1 = xi;
    let l2 = eta;
    [
        l0 * (two * l0 - one),
        l1 * (two * l1 - one),
        l2 * (two * l2 - one),
        four * l1 * l2,
        four * l2 * l0,
        four * l0 * l1,
    ]
}

/// Reference-coordinate gradients of the P2 shape functions.
pub fn p2_ref_gradients<T: Real>(xi: T, eta: T) -> [[T; 2]; 6] {
    let one = T::one();
    let four = T::of(4.0);
    let l0 = one - xi - eta;
    let l1 = xi;
    let l2 = eta;
    // grad l0 = (-1,-1), grad l1 = (1,0), grad l2 = (0,1)
    [
        [-(four * l0 - one), -(four * l0 - one)],
        [four * l1 - one, T::zero()],
        [T::zero(), four * l2 - one],
        [four * l2, four * l1],
        [-four * l2, four * (l0 - l2)],
        [four * (l0 - l1), -four * l1],
    ]
}

/// Affine geometry of one triangle: physical basis gradients and area.
pub struct ElementGeometry<T> {
    pub area: T,
    jac_inv_t: [[T; 2]; 2],
}

impl<T: Real> ElementGeometry<T> {
    pub fn new(coords: &[[T; 2]; 3]) -> Self {
        let j00 = coords[1][0] - coords[0][0];
        let j10 = coords[1][1] - coords[0][1];
        let j01 = coords[2][0] - coords[0][0];
        let j11 = coords[2][1] - coords[0][1];
        let det = j00 * j11 - j01 * j10;
        let inv = T::one() / det;
        // inverse transpose of [[j00, j01], [j10, j11]]
        let jac_inv_t = [[j11 * inv, -j10 * inv], [-j01 * inv, j00 * inv]];
        ElementGeometry { area: det / T::of(2.0), jac_inv_t }
    }

    /// Map a reference gradient to physical coordinates.
    pub fn phys_gradient(&self, g_ref: [T; 2]) -> [T; 2] {
        [
            self.jac_inv_t[0][0] * g_ref[0] + self.jac_inv_t[0][1] * g_ref[1],
            self.jac_inv_t[1][0] * g_ref[0] + self.jac_inv_t[1][1] * g_ref[1],
        ]
    }
}
