//! Doubling a surface along its boundary.

use super::{Metric, SurfaceMesh};
use crate::error::{Error, Result};

/// Closed surface obtained by gluing two copies of a mesh along the boundary.
///
/// The first copy keeps the raw vertex ids and node ids of the source mesh.
/// The second copy is the mirror image `(x, y) -> (-x, y)` with reversed
/// triangles, so both copies are counterclockwise in parameter space and the
/// glued surface is consistently oriented.
#[derive(Debug, Clone)]
pub struct DoubledMesh {
    pub mesh: SurfaceMesh,
    /// For each node of the double, the node of the source mesh it copies.
    pub source_node: Vec<usize>,
    /// `true` for nodes of the second copy that are not on the glued boundary.
    pub mirrored: Vec<bool>,
    /// `true` for nodes on the glued boundary.
    pub on_seam: Vec<bool>,
}

/// Glue two copies of `mesh` along its boundary by the identity map.
pub fn double_mesh(mesh: &SurfaceMesh) -> Result<DoubledMesh> {
    if !mesh.has_boundary() {
        return Err(Error::ClosedMesh);
    }
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices().to_vec();
    vertices.extend(mesh.vertices().iter().map(|p| [-p[0], p[1]]));

    let mut triangles = mesh.triangles().to_vec();
    triangles.extend(
        mesh.triangles()
            .iter()
            .map(|t| [t[0] + nv, t[2] + nv, t[1] + nv]),
    );

    // The reflection diag(-1, 1) conjugates the metric by flipping the sign of g12.
    let mut metric = mesh.metric().to_vec();
    metric.extend(mesh.metric().iter().map(|g| Metric::new(g.g11, -g.g12, g.g22)));

    let mut identifications = mesh.identifications().to_vec();
    identifications.extend(mesh.identifications().iter().map(|p| [p[0] + nv, p[1] + nv]));
    for v in 0..nv {
        if mesh.is_boundary_node(mesh.node_of(v)) {
            identifications.push([v, v + nv]);
        }
    }

    let mut rho = mesh.rho_per_vertex();
    rho.extend_from_within(..);

    let doubled = SurfaceMesh::with_all(vertices, triangles, metric, identifications, Some(rho))?;

    let mut source_node = vec![usize::MAX; doubled.num_nodes()];
    let mut mirrored = vec![false; doubled.num_nodes()];
    let mut on_seam = vec![false; doubled.num_nodes()];
    for v in 0..nv {
        let src = mesh.node_of(v);
        let a = doubled.node_of(v);
        let b = doubled.node_of(v + nv);
        source_node[a] = src;
        source_node[b] = src;
        if a == b {
            on_seam[a] = true;
        } else {
            mirrored[b] = true;
        }
    }
    Ok(DoubledMesh {
        mesh: doubled,
        source_node,
        mirrored,
        on_seam,
    })
}

/// Even reflection of a node field of `mesh` onto its double.
pub fn reflect_function(mesh: &SurfaceMesh, double: &DoubledMesh, u: &[f64]) -> Result<Vec<f64>> {
    mesh.check_field(u, "field values")?;
    if double.source_node.iter().any(|&s| s >= mesh.num_nodes()) {
        return Err(Error::SizeMismatch {
            what: "double/source node map",
            expected: mesh.num_nodes(),
            found: double.source_node.len(),
        });
    }
    Ok(double.source_node.iter().map(|&s| u[s]).collect())
}
