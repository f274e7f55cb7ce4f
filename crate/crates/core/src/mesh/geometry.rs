//! Built-in benchmark geometries.
//!
//! `cavity_halves` is the unit square with fluid above `y = 0.5` and the
//! elastic structure below; `channel_flag` is a long channel with a stubby
//! elastic flag clamped to the bottom wall. Both are structured meshes whose
//! interface lines up with grid edges, so nested refinements come from plain
//! quadrisection.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::{BoundaryEdge, BoundaryMarker, Mesh, Region, Triangle};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryTag {
    CavityHalves,
    ChannelFlag,
}

impl FromStr for GeometryTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cavity_halves" => Ok(GeometryTag::CavityHalves),
            "channel_flag" => Ok(GeometryTag::ChannelFlag),
            other => Err(Error::UnknownGeometry(other.to_string())),
        }
    }
}

impl GeometryTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeometryTag::CavityHalves => "cavity_halves",
            GeometryTag::ChannelFlag => "channel_flag",
        }
    }
}

/// Build one of the stock two-region meshes at the given refinement level.
pub fn build_two_region_mesh<T: Real>(geometry: GeometryTag, refinement_level: usize) -> Result<Mesh<T>> {
    let mut mesh = match geometry {
        GeometryTag::CavityHalves => cavity_halves::<T>()?,
        GeometryTag::ChannelFlag => channel_flag::<T>()?,
    };
    for _ in 0..refinement_level {
        mesh = mesh.refined()?;
    }
    Ok(mesh)
}

struct GridSpec<T> {
    nx: usize,
    ny: usize,
    x0: T,
    y0: T,
    dx: T,
    dy: T,
}

impl<T: Real> GridSpec<T> {
    fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    fn coords(&self) -> Vec<[T; 2]> {
        let mut nodes = Vec::with_capacity((self.nx + 1) * (self.ny + 1));
        for j in 0..=self.ny {
            for i in 0..=self.nx {
                let x = self.x0 + self.dx * T::from_usize(i).expect("index");
                let y = self.y0 + self.dy * T::from_usize(j).expect("index");
                nodes.push([x, y]);
            }
        }
        nodes
    }
}

/// Structured grid of `nx x ny` cells split into CCW triangle pairs; the
/// cell region and outer-boundary markers are supplied by closures, then the
/// interface is split into per-side node copies.
fn structured_two_region<T: Real>(
    spec: &GridSpec<T>,
    cell_region: impl Fn(usize, usize) -> Region,
    outer_marker: impl Fn([T; 2], [T; 2]) -> BoundaryMarker,
) -> Result<Mesh<T>> {
    let nodes = spec.coords();
    let mut triangles = Vec::with_capacity(2 * spec.nx * spec.ny);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let region = cell_region(i, j);
            let a = spec.node(i, j);
            let b = spec.node(i + 1, j);
            let c = spec.node(i + 1, j + 1);
            let d = spec.node(i, j + 1);
            triangles.push(Triangle { vertices: [a, b, c], region });
            triangles.push(Triangle { vertices: [a, c, d], region });
        }
    }
    split_interface(nodes, triangles, outer_marker)
}

/// Duplicate interface nodes so that fluid and structure stop sharing
/// indices, remap fluid elements onto the copies and emit boundary edges
/// (outer edges get markers from the classifier, interface edges appear once
/// per side).
fn split_interface<T: Real>(
    mut nodes: Vec<[T; 2]>,
    mut triangles: Vec<Triangle>,
    outer_marker: impl Fn([T; 2], [T; 2]) -> BoundaryMarker,
) -> Result<Mesh<T>> {
    let mut incidence: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        let [a, b, c] = tri.vertices;
        for (u, v) in [(a, b), (b, c), (c, a)] {
            incidence.entry(super::sorted_pair(u, v)).or_default().push(t);
        }
    }

    // interface edges: shared by triangles of different regions
    let mut interface_edges: Vec<(usize, usize)> = Vec::new();
    for (edge, tris) in &incidence {
        if tris.len() == 2 && triangles[tris[0]].region != triangles[tris[1]].region {
            interface_edges.push(*edge);
        }
    }
    // nodes on the interface get a fluid-side copy
    let mut fluid_copy: BTreeMap<usize, usize> = BTreeMap::new();
    for &(a, b) in &interface_edges {
        for v in [a, b] {
            fluid_copy.entry(v).or_insert_with(|| {
                let copy = nodes.len();
                nodes.push(nodes[v]);
                copy
            });
        }
    }
    let remap = |v: usize, region: Region, fluid_copy: &BTreeMap<usize, usize>| -> usize {
        match region {
            Region::Fluid => fluid_copy.get(&v).copied().unwrap_or(v),
            Region::Structure => v,
        }
    };
    for tri in triangles.iter_mut() {
        for v in tri.vertices.iter_mut() {
            *v = remap(*v, tri.region, &fluid_copy);
        }
    }

    let mut boundary_edges = Vec::new();
    for (edge, tris) in &incidence {
        let (a, b) = *edge;
        if tris.len() == 2 && triangles[tris[0]].region != triangles[tris[1]].region {
            // one copy per side
            let fa = fluid_copy[&a];
            let fb = fluid_copy[&b];
            boundary_edges.push(BoundaryEdge { vertices: [fa, fb], marker: BoundaryMarker::Interface });
            boundary_edges.push(BoundaryEdge { vertices: [a, b], marker: BoundaryMarker::Interface });
        } else if tris.len() == 1 {
            let region = triangles[tris[0]].region;
            let (ra, rb) = (remap(a, region, &fluid_copy), remap(b, region, &fluid_copy));
            let marker = outer_marker(nodes[ra], nodes[rb]);
            boundary_edges.push(BoundaryEdge { vertices: [ra, rb], marker });
        }
    }
    Mesh::new(nodes, triangles, boundary_edges)
}

/// Unit square, fluid on top of the structure, interface on `y = 0.5`.
/// The upper left wall carries inflow Dirichlet data, the upper right wall
/// is an open outflow; everything else is a wall or clamped structure.
fn cavity_halves<T: Real>() -> Result<Mesh<T>> {
    let n = 4;
    let h = T::one() / T::from_usize(n).expect("n");
    let spec = GridSpec { nx: n, ny: n, x0: T::zero(), y0: T::zero(), dx: h, dy: h };
    let half = n / 2;
    let one = T::one();
    let mid = T::of(0.5);
    let tol = T::of(1e-9);
    structured_two_region(
        &spec,
        |_, j| if j >= half { Region::Fluid } else { Region::Structure },
        |a, b| {
            let mx = (a[0] + b[0]) * T::of(0.5);
            let my = (a[1] + b[1]) * T::of(0.5);
            if (mx - one).abs() <= tol && my > mid {
                BoundaryMarker::Outflow
            } else {
                BoundaryMarker::OuterDirichlet
            }
        },
    )
}

/// Channel `[0,4] x [0,1]` with a one-cell-wide elastic flag clamped to the
/// bottom wall, spanning `x in [2, 2.25]`, `y in [0, 0.5]`. A coarse stand-in
/// for the classic flow-past-elastic-flag benchmark layout.
fn channel_flag<T: Real>() -> Result<Mesh<T>> {
    let nx = 16;
    let ny = 4;
    let h = T::of(0.25);
    let spec = GridSpec { nx, ny, x0: T::zero(), y0: T::zero(), dx: h, dy: h };
    let four = T::of(4.0);
    let tol = T::of(1e-9);
    structured_two_region(
        &spec,
        |i, j| if i == 8 && j < 2 { Region::Structure } else { Region::Fluid },
        |a, b| {
            let mx = (a[0] + b[0]) * T::of(0.5);
            if (mx - four).abs() <= tol {
                BoundaryMarker::Outflow
            } else {
                BoundaryMarker::OuterDirichlet
            }
        },
    )
}

/// Fluid-only unit square on an `n x n` grid (a plain Stokes layout used by
/// tests and the inf-sup study). With `outflow_right` the right wall is
/// open, otherwise the cavity is fully enclosed and constant pressures are
/// in play.
pub fn unit_square_fluid<T: Real>(n: usize, outflow_right: bool) -> Result<Mesh<T>> {
    let h = T::one() / T::from_usize(n).expect("n");
    let spec = GridSpec { nx: n, ny: n, x0: T::zero(), y0: T::zero(), dx: h, dy: h };
    let one = T::one();
    let tol = T::of(1e-9);
    structured_two_region(
        &spec,
        |_, _| Region::Fluid,
        |a, b| {
            let mx = (a[0] + b[0]) * T::of(0.5);
            if outflow_right && (mx - one).abs() <= tol {
                BoundaryMarker::Outflow
            } else {
                BoundaryMarker::OuterDirichlet
            }
        },
    )
}

/// Single reference triangle, for assembly oracles.
pub fn single_triangle<T: Real>(region: Region) -> Result<Mesh<T>> {
    let nodes = vec![[T::zero(), T::zero()], [T::one(), T::zero()], [T::zero(), T::one()]];
    let triangles = vec![Triangle { vertices: [0, 1, 2], region }];
    let edges = vec![
        BoundaryEdge { vertices: [0, 1], marker: BoundaryMarker::OuterDirichlet },
        BoundaryEdge { vertices: [1, 2], marker: BoundaryMarker::OuterDirichlet },
        BoundaryEdge { vertices: [2, 0], marker: BoundaryMarker::OuterDirichlet },
    ];
    Mesh::new(nodes, triangles, edges)
}
