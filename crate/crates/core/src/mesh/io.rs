//! Plain-text mesh files.
//!
//! ```text
//! nodes N triangles M edges K
//! x y                (N lines)
//! i j k tag          (M lines, tag = fluid | structure)
//! i j marker         (K lines, marker = outer_dirichlet | outflow | interface)
//! ```
//!
//! Coordinates are printed with 17 significant digits, so write/read/write
//! round-trips are bit-exact.

use std::path::Path;

use super::{BoundaryEdge, BoundaryMarker, Mesh, Region, Triangle};
use crate::error::{Error, Result};
use crate::scalar::Real;

fn region_str(r: Region) -> &'static str {
    match r {
        Region::Fluid => "fluid",
        Region::Structure => "structure",
    }
}

fn marker_str(m: BoundaryMarker) -> &'static str {
    match m {
        BoundaryMarker::OuterDirichlet => "outer_dirichlet",
        BoundaryMarker::Outflow => "outflow",
        BoundaryMarker::Interface => "interface",
    }
}

pub fn write_mesh<T: Real>(mesh: &Mesh<T>) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "nodes {} triangles {} edges {}\n",
        mesh.nodes().len(),
        mesh.triangles().len(),
        mesh.boundary_edges().len()
    ));
    for p in mesh.nodes() {
        out.push_str(&format!("{} {}\n", p[0].fmt_full(), p[1].fmt_full()));
    }
    for tri in mesh.triangles() {
        let [a, b, c] = tri.vertices;
        out.push_str(&format!("{a} {b} {c} {}\n", region_str(tri.region)));
    }
    for be in mesh.boundary_edges() {
        let [a, b] = be.vertices;
        out.push_str(&format!("{a} {b} {}\n", marker_str(be.marker)));
    }
    out
}

pub fn write_mesh_file<T: Real>(mesh: &Mesh<T>, path: &Path) -> Result<()> {
    std::fs::write(path, write_mesh(mesh))?;
    Ok(())
}

pub fn read_mesh<T: Real>(text: &str) -> Result<Mesh<T>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty mesh file".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 6 || h[0] != "nodes" || h[2] != "triangles" || h[4] != "edges" {
        return Err(Error::Parse(format!("bad mesh header '{header}'")));
    }
    let n: usize = h[1].parse().map_err(|_| Error::Parse("bad node count".into()))?;
    let m: usize = h[3].parse().map_err(|_| Error::Parse("bad triangle count".into()))?;
    let k: usize = h[5].parse().map_err(|_| Error::Parse("bad edge count".into()))?;

    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing node line {i}")))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("bad node line '{line}'")));
        }
        let x = T::parse_text(parts[0]).ok_or_else(|| Error::Parse(format!("bad coordinate '{}'", parts[0])))?;
        let y = T::parse_text(parts[1]).ok_or_else(|| Error::Parse(format!("bad coordinate '{}'", parts[1])))?;
        nodes.push([x, y]);
    }
    let mut triangles = Vec::with_capacity(m);
    for i in 0..m {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing triangle line {i}")))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("bad triangle line '{line}'")));
        }
        let v: Vec<usize> = parts[..3]
            .iter()
            .map(|p| p.parse().map_err(|_| Error::Parse(format!("bad index '{p}'"))))
            .collect::<Result<_>>()?;
        let region = match parts[3] {
            "fluid" => Region::Fluid,
            "structure" => Region::Structure,
            other => return Err(Error::Parse(format!("unknown region tag '{other}'"))),
        };
        triangles.push(Triangle { vertices: [v[0], v[1], v[2]], region });
    }
    let mut boundary_edges = Vec::with_capacity(k);
    for i in 0..k {
        let line = lines.next().ok_or_else(|| Error::Parse(format!("missing edge line {i}")))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("bad edge line '{line}'")));
        }
        let a: usize = parts[0].parse().map_err(|_| Error::Parse(format!("bad index '{}'", parts[0])))?;
        let b: usize = parts[1].parse().map_err(|_| Error::Parse(format!("bad index '{}'", parts[1])))?;
        let marker = match parts[2] {
            "outer_dirichlet" => BoundaryMarker::OuterDirichlet,
            "outflow" => BoundaryMarker::Outflow,
            "interface" => BoundaryMarker::Interface,
            other => return Err(Error::Parse(format!("unknown marker '{other}'"))),
        };
        boundary_edges.push(BoundaryEdge { vertices: [a, b], marker });
    }
    Mesh::new(nodes, triangles, boundary_edges)
}

pub fn read_mesh_file<T: Real>(path: &Path) -> Result<Mesh<T>> {
    read_mesh(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_two_region_mesh, GeometryTag};

    #[test]
    fn round_trip_is_bit_exact() {
        for geometry in [GeometryTag::CavityHalves, GeometryTag::ChannelFlag] {
            let mesh: Mesh<f64> = build_two_region_mesh(geometry, 1).unwrap();
            let text = write_mesh(&mesh);
            let back: Mesh<f64> = read_mesh(&text).unwrap();
            assert_eq!(write_mesh(&back), text);
            assert_eq!(back.interface_pairs().len(), mesh.interface_pairs().len());
        }
    }

    #[test]
    fn malformed_files_error_out() {
        assert!(read_mesh::<f64>("").is_err());
        assert!(read_mesh::<f64>("nodes 1 triangles 0 edges 0\n").is_err());
        assert!(read_mesh::<f64>("nodes 0 triangles 0 edgez 0\n").is_err());
    }
}
