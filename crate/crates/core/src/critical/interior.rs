//! Banchoff indices at vertices.

use super::{Classification, CriticalKind, CriticalPoint, VertexOrder};
use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

/// Number of sign changes of `u(w) - u(v)` around the link of `node`
/// (cyclically for closed links, along the path for boundary links).
pub fn link_sign_changes(mesh: &SurfaceMesh, node: usize, order: &VertexOrder) -> usize {
    let link = mesh.link(node);
    let above: Vec<bool> = link.nodes.iter().map(|&w| order.less(node, w)).collect();
    let n = above.len();
    let mut count = (1..n).filter(|&i| above[i] != above[i - 1]).count();
    if link.closed && n > 1 && above[0] != above[n - 1] {
        count += 1;
    }
    count
}

/// `1 - sc/2` at every node. Meaningful as a Banchoff index only at nodes with
/// closed links.
pub fn vertex_indices(mesh: &SurfaceMesh, order: &VertexOrder) -> Vec<i64> {
    (0..mesh.num_nodes())
        .map(|v| 1 - link_sign_changes(mesh, v, order) as i64 / 2)
        .collect()
}

fn classify(sc: usize, is_min: bool) -> Classification {
    match sc {
        0 if is_min => Classification::Minimum,
        0 => Classification::Maximum,
        4 => Classification::Saddle,
        _ => Classification::Degenerate,
    }
}

/// Interior vertices whose link sign-change count differs from 2. Ties within
/// `zero_tol · max|u|` are broken by node index.
pub fn interior_critical_points(
    mesh: &SurfaceMesh,
    u: &[f64],
    zero_tol: f64,
) -> Result<Vec<CriticalPoint>> {
    mesh.check_field(u, "field values")?;
    interior_critical_points_with(mesh, u, &VertexOrder::new(u, zero_tol))
}

pub fn interior_critical_points_with(
    mesh: &SurfaceMesh,
    u: &[f64],
    order: &VertexOrder,
) -> Result<Vec<CriticalPoint>> {
    mesh.check_field(u, "field values")?;
    let mut out = Vec::new();
    for v in 0..mesh.num_nodes() {
        if mesh.is_boundary_node(v) {
            continue;
        }
        let link = mesh.link(v);
        if !link.closed {
            return Err(Error::NonManifoldVertex {
                vertex: mesh.representative(v),
                reason: "interior vertex with an open link".into(),
            });
        }
        let sc = link_sign_changes(mesh, v, order);
        if sc == 2 {
            continue;
        }
        let is_min = link.nodes.first().is_some_and(|&w| order.less(v, w));
        out.push(CriticalPoint {
            node: v,
            position: mesh.node_position(v),
            kind: CriticalKind::Interior,
            index: 1 - sc as i64 / 2,
            link_sign_changes: sc,
            value: u[v],
            classification: classify(sc, is_min),
        });
    }
    Ok(out)
}

/// Sum of Banchoff indices over a closed mesh with exact value comparisons.
pub fn pl_index_sum(mesh: &SurfaceMesh, u: &[f64]) -> Result<i64> {
    mesh.check_field(u, "field values")?;
    pl_index_sum_with(mesh, &VertexOrder::exact(u))
}

pub fn pl_index_sum_with(mesh: &SurfaceMesh, order: &VertexOrder) -> Result<i64> {
    if mesh.has_boundary() {
        return Err(Error::NotClosed);
    }
    Ok(vertex_indices(mesh, order).iter().sum())
}
