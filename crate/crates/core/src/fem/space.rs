//! Coupled P2-velocity / P0-pressure space.
//!
//! Scalar velocity nodes are the mesh vertices plus one node per triangle
//! edge (the midpoint). Fluid-side and structure-side copies of an interface
//! vertex or edge share a single global index, which enforces the kinematic
//! interface condition strongly: one unknown drives both the fluid trace and
//! the structure trace. Pressure is one DOF per fluid triangle.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mesh::{sorted_pair, BoundaryMarker, Mesh, Region};
use crate::scalar::Real;

/// Extra space-construction choices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpaceOptions {
    /// Constrain the normal velocity component on outflow edges instead of
    /// leaving the boundary natural. Off by default: the natural outflow
    /// keeps the pressure free of a constant kernel.
    pub outflow_no_flux: bool,
}

#[derive(Debug, Clone)]
pub struct CoupledSpace<T> {
    mesh: Mesh<T>,
    n_scalar: usize,
    /// per triangle: canonical scalar nodes (v0 v1 v2, mid12, mid20, mid01)
    element_nodes: Vec<[usize; 6]>,
    /// per triangle: pressure DOF if fluid
    pressure_index: Vec<Option<usize>>,
    fluid_triangles: Vec<usize>,
    /// sorted constrained velocity DOFs
    dirichlet: Vec<usize>,
    /// representative reference position per scalar node
    positions: Vec<[T; 2]>,
    /// scalar node appears in a structure element
    touches_structure: Vec<bool>,
    /// scalar node appears in a fluid element
    touches_fluid: Vec<bool>,
    /// canonical scalar node of each mesh vertex (usize::MAX if unused)
    vertex_scalar: Vec<usize>,
    /// canonical scalar node of each triangle edge
    edge_scalar: BTreeMap<(usize, usize), usize>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }
    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        // smaller root wins: keeps canonical representatives deterministic
        if ra < rb {
            self.parent[rb] = ra;
        } else if rb < ra {
            self.parent[ra] = rb;
        }
    }
}

pub fn build_space<T: Real>(mesh: &Mesh<T>) -> Result<CoupledSpace<T>> {
    build_space_with_options(mesh, SpaceOptions::default())
}

pub fn build_space_with_options<T: Real>(mesh: &Mesh<T>, options: SpaceOptions) -> Result<CoupledSpace<T>> {
    let n_vertices = mesh.nodes().len();

    // edge enumeration over all triangles (regions are node-disjoint)
    let mut edge_id: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for tri in mesh.triangles() {
        let [a, b, c] = tri.vertices;
        for (u, v) in [(a, b), (b, c), (c, a)] {
            let next = edge_id.len();
            edge_id.entry(sorted_pair(u, v)).or_insert(next);
        }
    }
    let n_edges = edge_id.len();
    let n_prov = n_vertices + n_edges;

    // identify interface copies: paired vertices and paired edges
    let mut uf = UnionFind::new(n_prov);
    for &(fv, sv) in mesh.interface_vertices() {
        uf.union(fv, sv);
    }
    for pair in mesh.interface_pairs() {
        let fe = edge_id
            .get(&sorted_pair(pair.fluid_edge[0], pair.fluid_edge[1]))
            .ok_or_else(|| Error::InvalidMesh("interface edge missing from fluid elements".into()))?;
        let se = edge_id
            .get(&sorted_pair(pair.structure_edge[0], pair.structure_edge[1]))
            .ok_or_else(|| Error::InvalidMesh("interface edge missing from structure elements".into()))?;
        uf.union(n_vertices + fe, n_vertices + se);
    }

    // canonical numbering in order of first appearance of each root,
    // sweeping vertices then edges
    let mut canon: Vec<usize> = vec![usize::MAX; n_prov];
    let mut positions: Vec<[T; 2]> = Vec::new();
    let mut n_scalar = 0usize;
    let mut assign = |prov: usize, pos: [T; 2], uf: &mut UnionFind, canon: &mut Vec<usize>, positions: &mut Vec<[T; 2]>| -> usize {
        let root = uf.find(prov);
        if canon[root] == usize::MAX {
            canon[root] = n_scalar;
            positions.push(pos);
            n_scalar += 1;
        }
        canon[root]
    };
    let mut vertex_scalar = vec![usize::MAX; n_vertices];
    for v in 0..n_vertices {
        if mesh.node_region(v).is_some() {
            vertex_scalar[v] = assign(v, mesh.nodes()[v], &mut uf, &mut canon, &mut positions);
        }
    }
    let half = T::of(0.5);
    let mut edge_scalar: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&(a, b), &e) in &edge_id {
        let pa = mesh.nodes()[a];
        let pb = mesh.nodes()[b];
        let mid = [(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half];
        let s = assign(n_vertices + e, mid, &mut uf, &mut canon, &mut positions);
        edge_scalar.insert((a, b), s);
    }

    // per-element scalar nodes and pressure indices
    let mut element_nodes = Vec::with_capacity(mesh.triangles().len());
    let mut pressure_index = vec![None; mesh.triangles().len()];
    let mut fluid_triangles = Vec::new();
    let mut touches_structure = vec![false; n_scalar];
    let mut touches_fluid = vec![false; n_scalar];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let [a, b, c] = tri.vertices;
        let nodes = [
            vertex_scalar[a],
            vertex_scalar[b],
            vertex_scalar[c],
            edge_scalar[&sorted_pair(b, c)],
            edge_scalar[&sorted_pair(c, a)],
            edge_scalar[&sorted_pair(a, b)],
        ];
        for &s in &nodes {
            match tri.region {
                Region::Fluid => touches_fluid[s] = true,
                Region::Structure => touches_structure[s] = true,
            }
        }
        element_nodes.push(nodes);
        if tri.region == Region::Fluid {
            pressure_index[t] = Some(fluid_triangles.len());
            fluid_triangles.push(t);
        }
    }

    // Dirichlet set: outer Dirichlet edges constrain both components of
    // their endpoint and midpoint nodes; outflow edges optionally constrain
    // the dominant normal component
    let mut dirichlet: Vec<usize> = Vec::new();
    for be in mesh.boundary_edges() {
        let [a, b] = be.vertices;
        match be.marker {
            BoundaryMarker::OuterDirichlet => {
                for s in [vertex_scalar[a], vertex_scalar[b], edge_scalar[&sorted_pair(a, b)]] {
                    dirichlet.push(2 * s);
                    dirichlet.push(2 * s + 1);
                }
            }
            BoundaryMarker::Outflow if options.outflow_no_flux => {
                let pa = mesh.nodes()[a];
                let pb = mesh.nodes()[b];
                let d = [pb[0] - pa[0], pb[1] - pa[1]];
                // normal (d.y, -d.x): constrain the dominant component
                let comp = if d[1].abs() >= d[0].abs() { 0 } else { 1 };
                for s in [vertex_scalar[a], vertex_scalar[b], edge_scalar[&sorted_pair(a, b)]] {
                    dirichlet.push(2 * s + comp);
                }
            }
            _ => {}
        }
    }
    dirichlet.sort_unstable();
    dirichlet.dedup();

    Ok(CoupledSpace {
        mesh: mesh.clone(),
        n_scalar,
        element_nodes,
        pressure_index,
        fluid_triangles,
        dirichlet,
        positions,
        touches_structure,
        touches_fluid,
        vertex_scalar,
        edge_scalar,
    })
}

impl<T: Real> CoupledSpace<T> {
    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }

    pub fn n_scalar_nodes(&self) -> usize {
        self.n_scalar
    }

    pub fn n_velocity_dofs(&self) -> usize {
        2 * self.n_scalar
    }

    pub fn n_pressure_dofs(&self) -> usize {
        self.fluid_triangles.len()
    }

    /// Scalar nodes of element `t` in local P2 order.
    pub fn element_nodes(&self, t: usize) -> [usize; 6] {
        self.element_nodes[t]
    }

    /// Velocity DOF of a scalar node and component.
    pub fn velocity_dof(&self, scalar: usize, comp: usize) -> usize {
        2 * scalar + comp
    }

    pub fn pressure_index(&self, t: usize) -> Option<usize> {
        self.pressure_index[t]
    }

    pub fn fluid_triangles(&self) -> &[usize] {
        &self.fluid_triangles
    }

    pub fn dirichlet_dofs(&self) -> &[usize] {
        &self.dirichlet
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet.binary_search(&dof).is_ok()
    }

    /// Reference position of a scalar node.
    pub fn scalar_position(&self, scalar: usize) -> [T; 2] {
        self.positions[scalar]
    }

    pub fn scalar_touches_structure(&self, scalar: usize) -> bool {
        self.touches_structure[scalar]
    }

    pub fn scalar_touches_fluid(&self, scalar: usize) -> bool {
        self.touches_fluid[scalar]
    }

    /// Canonical scalar node of a mesh vertex.
    pub fn vertex_scalar(&self, vertex: usize) -> usize {
        self.vertex_scalar[vertex]
    }

    /// Scalar nodes lying on boundary edges with the given marker, with
    /// their positions. Midpoint nodes included; deduplicated, sorted.
    pub fn boundary_scalar_nodes(&self, marker: BoundaryMarker) -> Vec<(usize, [T; 2])> {
        let mut out: BTreeMap<usize, [T; 2]> = BTreeMap::new();
        for be in self.mesh.boundary_edges() {
            if be.marker != marker {
                continue;
            }
            let [a, b] = be.vertices;
            let sa = self.vertex_scalar[a];
            let sb = self.vertex_scalar[b];
            let sm = self.edge_scalar[&sorted_pair(a, b)];
            for s in [sa, sb, sm] {
                out.insert(s, self.positions[s]);
            }
        }
        out.into_iter().collect()
    }

    /// First scalar node within matching tolerance of a point.
    pub fn find_scalar_near(&self, p: [T; 2]) -> Option<usize> {
        let tol = T::of(1e-12) * self.mesh.diameter();
        self.positions
            .iter()
            .position(|q| (q[0] - p[0]).abs() <= tol && (q[1] - p[1]).abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_two_region_mesh, unit_square_fluid, GeometryTag};

    #[test]
    fn interface_nodes_are_shared_between_sides() {
        let mesh = build_two_region_mesh::<f64>(GeometryTag::CavityHalves, 0).unwrap();
        let space = build_space(&mesh).unwrap();
        for pair in mesh.interface_pairs() {
            let ft = pair.fluid_triangle;
            let st = pair.structure_triangle;
            let f_nodes = space.element_nodes(ft);
            let s_nodes = space.element_nodes(st);
            // endpoint vertices resolve to the same canonical scalar
            for (fv, sv) in [
                (pair.fluid_edge[0], pair.structure_edge[0]),
                (pair.fluid_edge[1], pair.structure_edge[1]),
            ] {
                assert_eq!(space.vertex_scalar(fv), space.vertex_scalar(sv));
            }
            // the midpoint scalar appears in both elements
            let shared: Vec<usize> =
                f_nodes.iter().filter(|s| s_nodes.contains(s)).copied().collect();
            assert!(shared.len() >= 3, "fluid and structure elements share the edge nodes");
        }
    }

    #[test]
    fn fluid_only_mesh_has_standard_p2_p0_layout() {
        let mesh = unit_square_fluid::<f64>(2, true).unwrap();
        let space = build_space(&mesh).unwrap();
        // 2x2 grid: 9 vertices, 16 edges (8 tri * 3 / shared interior)
        let n_vertices = mesh.nodes().len();
        assert_eq!(n_vertices, 9);
        assert_eq!(space.n_pressure_dofs(), 8);
        // scalar nodes = vertices + edges
        let n_edges = space.n_scalar_nodes() - n_vertices;
        assert_eq!(n_edges, 16);
        assert_eq!(space.n_velocity_dofs(), 2 * (9 + 16));
    }

    #[test]
    fn dirichlet_set_excludes_outflow_nodes() {
        let mesh = build_two_region_mesh::<f64>(GeometryTag::CavityHalves, 0).unwrap();
        let space = build_space(&mesh).unwrap();
        // node on the outflow segment interior: x = 1, y = 0.75
        let s = space
            .find_scalar_near([1.0, 0.75])
            .expect("outflow node exists");
        assert!(!space.is_dirichlet(2 * s));
        assert!(!space.is_dirichlet(2 * s + 1));
        // corner (1,1) is shared with the Dirichlet lid: constrained
        let c = space.find_scalar_near([1.0, 1.0]).unwrap();
        assert!(space.is_dirichlet(2 * c));
    }

    #[test]
    fn dof_count_grows_roughly_four_times_per_level() {
        let mut counts = Vec::new();
        for level in 0..3 {
            let mesh = build_two_region_mesh::<f64>(GeometryTag::CavityHalves, level).unwrap();
            let space = build_space(&mesh).unwrap();
            counts.push((space.n_velocity_dofs() + space.n_pressure_dofs()) as f64);
        }
        for w in counts.windows(2) {
            let ratio = w[1] / w[0];
            assert!(ratio > 3.0 && ratio < 4.5, "growth {ratio}");
        }
    }
}
