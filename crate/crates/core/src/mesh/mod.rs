//! Two-subdomain triangulations for moving-domain fluid-structure problems.
//!
//! A [`Mesh`] holds one fluid and one structure triangulation in a single
//! node/element list. The two regions never share node indices: along the
//! interface each geometric edge exists twice, once per side, and the pairs
//! are matched geometrically at construction time. This is what lets the
//! fluid mesh follow the interface motion while the structure keeps its
//! reference configuration; solvers glue the two copies together through a
//! shared degree-of-freedom index (see the space builder).

mod geometry;
mod io;
mod motion;

pub use geometry::{single_triangle, unit_square_fluid, GeometryTag};
pub use io::{read_mesh, read_mesh_file, write_mesh, write_mesh_file};
pub use motion::{
    geometry_report, mesh_velocity, move_mesh, solve_ale_extension, solve_extension_with_boundary,
    AleOperator, GeometryReport, MeshMotion,
};

pub use geometry::build_two_region_mesh;

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Fluid,
    Structure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMarker {
    OuterDirichlet,
    Outflow,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub marker: BoundaryMarker,
}

/// One interface edge seen from both sides; endpoints coincide on the
/// reference configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfacePair {
    pub fluid_edge: [usize; 2],
    pub structure_edge: [usize; 2],
    pub fluid_triangle: usize,
    pub structure_triangle: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh<T> {
    nodes: Vec<[T; 2]>,
    triangles: Vec<Triangle>,
    boundary_edges: Vec<BoundaryEdge>,
    // derived at validation time
    interface_pairs: Vec<InterfacePair>,
    /// (fluid vertex, structure vertex), sorted by fluid vertex
    interface_vertices: Vec<(usize, usize)>,
    node_region: Vec<Option<Region>>,
}

pub(crate) fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl<T: Real> Mesh<T> {
    /// Validate the raw data and derive the interface pairing.
    pub fn new(
        nodes: Vec<[T; 2]>,
        triangles: Vec<Triangle>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let mut mesh = Mesh {
            nodes,
            triangles,
            boundary_edges,
            interface_pairs: Vec::new(),
            interface_vertices: Vec::new(),
            node_region: Vec::new(),
        };
        mesh.validate(true)?;
        Ok(mesh)
    }

    /// Replace node coordinates, keeping connectivity and interface pairing.
    /// Only element orientation is re-checked; the geometric interface
    /// coincidence holds on the reference configuration, not on moved ones.
    pub fn with_nodes(&self, nodes: Vec<[T; 2]>) -> Result<Self> {
        if nodes.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch { expected: self.nodes.len(), got: nodes.len() });
        }
        let mut moved = self.clone();
        moved.nodes = nodes;
        for (t, tri) in moved.triangles.iter().enumerate() {
            if moved.signed_area(tri.vertices) <= T::zero() {
                return Err(Error::InvalidMesh(format!("triangle {t} is inverted after motion")));
            }
        }
        Ok(moved)
    }

    fn signed_area(&self, v: [usize; 3]) -> T {
        let p0 = self.nodes[v[0]];
        let p1 = self.nodes[v[1]];
        let p2 = self.nodes[v[2]];
        let two = T::of(2.0);
        ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])) / two
    }

    fn validate(&mut self, check_matching: bool) -> Result<()> {
        let n = self.nodes.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in &tri.vertices {
                if v >= n {
                    return Err(Error::InvalidMesh(format!("triangle {t} references node {v} out of range")));
                }
            }
            let area = self.signed_area(tri.vertices);
            if area <= T::zero() {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive area {area:?}; orientation must be counterclockwise"
                )));
            }
        }
        for (e, be) in self.boundary_edges.iter().enumerate() {
            for &v in &be.vertices {
                if v >= n {
                    return Err(Error::InvalidMesh(format!("boundary edge {e} references node {v} out of range")));
                }
            }
        }

        // node -> region map; a node used by both regions indicates a
        // mesh that was not split along the interface
        let mut node_region: Vec<Option<Region>> = vec![None; n];
        for tri in &self.triangles {
            for &v in &tri.vertices {
                match node_region[v] {
                    None => node_region[v] = Some(tri.region),
                    Some(r) if r == tri.region => {}
                    Some(_) => {
                        return Err(Error::InvalidMesh(format!(
                            "node {v} is used by both regions; interface nodes must be duplicated per side"
                        )))
                    }
                }
            }
        }
        self.node_region = node_region;

        // edge incidence
        let mut incidence: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.vertices;
            for (u, v) in [(a, b), (b, c), (c, a)] {
                incidence.entry(sorted_pair(u, v)).or_default().push(t);
            }
        }
        for (edge, tris) in &incidence {
            if tris.len() > 2 {
                return Err(Error::InvalidMesh(format!("edge {edge:?} belongs to {} triangles", tris.len())));
            }
        }

        // region-boundary edges: exactly one incident triangle
        let mut region_boundary: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (edge, tris) in &incidence {
            if tris.len() == 1 {
                region_boundary.insert(*edge, tris[0]);
            }
        }

        // every listed boundary edge must bound exactly one triangle,
        // each region-boundary edge must be listed exactly once
        let mut listed: BTreeMap<(usize, usize), BoundaryMarker> = BTreeMap::new();
        for be in &self.boundary_edges {
            let key = sorted_pair(be.vertices[0], be.vertices[1]);
            if !region_boundary.contains_key(&key) {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge {:?} is not on the boundary of a region",
                    be.vertices
                )));
            }
            if listed.insert(key, be.marker).is_some() {
                return Err(Error::InvalidMesh(format!("boundary edge {:?} listed twice", be.vertices)));
            }
        }
        for edge in region_boundary.keys() {
            if !listed.contains_key(edge) {
                return Err(Error::InvalidMesh(format!("region-boundary edge {edge:?} has no marker")));
            }
        }

        if check_matching {
            self.derive_interface(&region_boundary, &listed)?;
        }
        Ok(())
    }

    fn derive_interface(
        &mut self,
        region_boundary: &BTreeMap<(usize, usize), usize>,
        listed: &BTreeMap<(usize, usize), BoundaryMarker>,
    ) -> Result<()> {
        let tol = T::of(1e-12) * self.diameter();
        let close = |a: [T; 2], b: [T; 2]| (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol;

        let mut fluid_side: Vec<((usize, usize), usize)> = Vec::new();
        let mut structure_side: Vec<((usize, usize), usize)> = Vec::new();
        for (edge, &tri) in region_boundary {
            match self.triangles[tri].region {
                Region::Fluid => fluid_side.push((*edge, tri)),
                Region::Structure => structure_side.push((*edge, tri)),
            }
        }

        // geometric coincidence defines the interface; markers must agree
        let mut pairs = Vec::new();
        let mut vertex_pairs: BTreeMap<usize, usize> = BTreeMap::new();
        let mut structure_used = vec![false; structure_side.len()];
        for (f_edge, f_tri) in &fluid_side {
            let fa = self.nodes[f_edge.0];
            let fb = self.nodes[f_edge.1];
            let mut matched = None;
            for (si, (s_edge, s_tri)) in structure_side.iter().enumerate() {
                if structure_used[si] {
                    continue;
                }
                let sa = self.nodes[s_edge.0];
                let sb = self.nodes[s_edge.1];
                let direct = close(fa, sa) && close(fb, sb);
                let flipped = close(fa, sb) && close(fb, sa);
                if direct || flipped {
                    structure_used[si] = true;
                    let (s0, s1) = if direct { (s_edge.0, s_edge.1) } else { (s_edge.1, s_edge.0) };
                    matched = Some((([f_edge.0, f_edge.1], [s0, s1]), *s_tri));
                    break;
                }
            }
            let is_interface = matched.is_some();
            let marker = listed[f_edge];
            if is_interface && marker != BoundaryMarker::Interface {
                return Err(Error::InvalidMesh(format!(
                    "edge {f_edge:?} coincides with a structure edge but is marked {marker:?}"
                )));
            }
            if !is_interface && marker == BoundaryMarker::Interface {
                return Err(Error::InvalidMesh(format!(
                    "edge {f_edge:?} is marked interface but matches no structure edge"
                )));
            }
            if let Some(((fe, se), s_tri)) = matched {
                for (fv, sv) in [(fe[0], se[0]), (fe[1], se[1])] {
                    match vertex_pairs.get(&fv) {
                        None => {
                            vertex_pairs.insert(fv, sv);
                        }
                        Some(&prev) if prev == sv => {}
                        Some(&prev) => {
                            return Err(Error::InvalidMesh(format!(
                                "fluid vertex {fv} pairs with structure vertices {prev} and {sv}"
                            )))
                        }
                    }
                }
                pairs.push(InterfacePair {
                    fluid_edge: fe,
                    structure_edge: se,
                    fluid_triangle: *f_tri,
                    structure_triangle: s_tri,
                });
            }
        }
        // every structure-side edge marked interface must have been matched
        for (si, (s_edge, _)) in structure_side.iter().enumerate() {
            let marker = listed[s_edge];
            if marker == BoundaryMarker::Interface && !structure_used[si] {
                return Err(Error::InvalidMesh(format!(
                    "structure edge {s_edge:?} is marked interface but matches no fluid edge"
                )));
            }
            if marker != BoundaryMarker::Interface && structure_used[si] {
                return Err(Error::InvalidMesh(format!(
                    "structure edge {s_edge:?} coincides with a fluid edge but is marked {marker:?}"
                )));
            }
        }
        self.interface_pairs = pairs;
        self.interface_vertices = vertex_pairs.into_iter().collect();
        Ok(())
    }

    pub fn nodes(&self) -> &[[T; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn interface_pairs(&self) -> &[InterfacePair] {
        &self.interface_pairs
    }

    /// Paired interface vertices `(fluid side, structure side)`.
    pub fn interface_vertices(&self) -> &[(usize, usize)] {
        &self.interface_vertices
    }

    pub fn node_region(&self, node: usize) -> Option<Region> {
        self.node_region[node]
    }

    pub fn triangle_coords(&self, t: usize) -> [[T; 2]; 3] {
        let v = self.triangles[t].vertices;
        [self.nodes[v[0]], self.nodes[v[1]], self.nodes[v[2]]]
    }

    pub fn triangle_area(&self, t: usize) -> T {
        self.signed_area(self.triangles[t].vertices)
    }

    /// Bounding-box diagonal.
    pub fn diameter(&self) -> T {
        let mut lo = [T::infinity(); 2];
        let mut hi = [T::neg_infinity(); 2];
        for p in &self.nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let dx = hi[0] - lo[0];
        let dy = hi[1] - lo[1];
        (dx * dx + dy * dy).sqrt()
    }

    pub fn fluid_triangle_count(&self) -> usize {
        self.triangles.iter().filter(|t| t.region == Region::Fluid).count()
    }

    /// One uniform quadrisection step; children inherit region and boundary
    /// markers, so refined meshes stay nested in the level-0 mesh.
    pub fn refined(&self) -> Result<Mesh<T>> {
        let two = T::of(2.0);
        let mut nodes = self.nodes.clone();
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<[T; 2]>| -> usize {
            let key = sorted_pair(a, b);
            if let Some(&m) = midpoint.get(&key) {
                return m;
            }
            let pa = nodes[key.0];
            let pb = nodes[key.1];
            let m = nodes.len();
            nodes.push([(pa[0] + pb[0]) / two, (pa[1] + pb[1]) / two]);
            midpoint.insert(key, m);
            m
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for tri in &self.triangles {
            let [a, b, c] = tri.vertices;
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            for v in [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]] {
                triangles.push(Triangle { vertices: v, region: tri.region });
            }
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for be in &self.boundary_edges {
            let [a, b] = be.vertices;
            let m = mid(a, b, &mut nodes);
            boundary_edges.push(BoundaryEdge { vertices: [a, m], marker: be.marker });
            boundary_edges.push(BoundaryEdge { vertices: [m, b], marker: be.marker });
        }
        Mesh::new(nodes, triangles, boundary_edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_clockwise_triangle() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let triangles = vec![Triangle { vertices: [0, 2, 1], region: Region::Fluid }];
        let edges = vec![
            BoundaryEdge { vertices: [0, 1], marker: BoundaryMarker::OuterDirichlet },
            BoundaryEdge { vertices: [1, 2], marker: BoundaryMarker::OuterDirichlet },
            BoundaryEdge { vertices: [2, 0], marker: BoundaryMarker::OuterDirichlet },
        ];
        assert!(Mesh::new(nodes, triangles, edges).is_err());
    }

    #[test]
    fn rejects_shared_interface_nodes() {
        // two triangles of different regions sharing an edge by index
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let triangles = vec![
            Triangle { vertices: [0, 1, 2], region: Region::Fluid },
            Triangle { vertices: [0, 2, 3], region: Region::Structure },
        ];
        let edges = vec![
            BoundaryEdge { vertices: [0, 1], marker: BoundaryMarker::OuterDirichlet },
            BoundaryEdge { vertices: [1, 2], marker: BoundaryMarker::OuterDirichlet },
            BoundaryEdge { vertices: [2, 3], marker: BoundaryMarker::OuterDirichlet },
            BoundaryEdge { vertices: [3, 0], marker: BoundaryMarker::OuterDirichlet },
            BoundaryEdge { vertices: [0, 2], marker: BoundaryMarker::Interface },
        ];
        assert!(Mesh::new(nodes, triangles, edges).is_err());
    }

    #[test]
    fn missing_marker_is_rejected() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let triangles = vec![Triangle { vertices: [0, 1, 2], region: Region::Fluid }];
        let edges = vec![
            BoundaryEdge { vertices: [0, 1], marker: BoundaryMarker::OuterDirichlet },
            BoundaryEdge { vertices: [1, 2], marker: BoundaryMarker::OuterDirichlet },
        ];
        assert!(Mesh::new(nodes, triangles, edges).is_err());
    }
}
