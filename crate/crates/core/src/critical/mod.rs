//! Critical points of piecewise-linear fields.
//!
//! Every comparison between vertex values goes through a [`VertexOrder`], a
//! strict total order in which values closer than a tolerance are tied and ties
//! are broken by a fixed integer key. With a strict order the link of every
//! vertex splits into "above" and "below", which is all the Banchoff index needs.

mod boundary;
mod interior;
mod nodal;

use serde::Serialize;

pub use boundary::{
    boundary_sign_changes, boundary_singular_zeros, boundary_trace_extrema, BoundarySignData,
    LoopSignData, SetComponent, SetComponentKind, TraceExtrema,
};
pub use interior::{
    interior_critical_points, interior_critical_points_with, link_sign_changes, pl_index_sum,
    pl_index_sum_with, vertex_indices,
};
pub use nodal::{nodal_polylines, nodal_segments, Polyline};

/// Default snapping tolerance, relative to the sup-norm of the boundary trace.
pub const DEFAULT_ZERO_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Interior,
    BoundaryTrace,
    BoundarySingularZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Minimum,
    Maximum,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    /// Node id (vertex class after identifications).
    pub node: usize,
    pub position: [f64; 2],
    pub kind: CriticalKind,
    pub index: i64,
    /// Sign changes around the link. Trace extrema count along the boundary
    /// loop and always report 0.
    pub link_sign_changes: usize,
    pub value: f64,
    pub classification: Classification,
}

/// Strict total order on nodes: `(cluster, key, node)` where clusters chain
/// together values that differ by at most `tol · max|u|`.
#[derive(Debug, Clone)]
pub struct VertexOrder {
    rank: Vec<usize>,
}

impl VertexOrder {
    /// Ties broken by node index.
    pub fn new(u: &[f64], tol: f64) -> Self {
        let key: Vec<usize> = (0..u.len()).collect();
        Self::with_tie_key(u, tol, &key)
    }

    /// Exact comparison of values (ties only for equal floats).
    pub fn exact(u: &[f64]) -> Self {
        Self::new(u, 0.0)
    }

    pub fn with_tie_key(u: &[f64], tol: f64, key: &[usize]) -> Self {
        assert_eq!(u.len(), key.len());
        let n = u.len();
        let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let gap = tol * scale;
        let mut by_value: Vec<usize> = (0..n).collect();
        by_value.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(a.cmp(&b)));
        let mut cluster = vec![0usize; n];
        for w in 1..n {
            let (prev, cur) = (by_value[w - 1], by_value[w]);
            cluster[cur] = cluster[prev] + usize::from(u[cur] - u[prev] > gap);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| (cluster[v], key[v], v));
        let mut rank = vec![0; n];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }
        VertexOrder { rank }
    }

    pub fn rank(&self, node: usize) -> usize {
        self.rank[node]
    }

    pub fn less(&self, a: usize, b: usize) -> bool {
        self.rank[a] < self.rank[b]
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }
}

/// Critical points as a JSON array.
pub fn critical_points_json(points: &[CriticalPoint]) -> String {
    serde_json::to_string_pretty(points).expect("critical points serialize")
}

pub(crate) fn sup_norm(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_within_tolerance_use_the_key() {
        let u = [1.0, 1.0 + 1e-12, 0.5, 2.0];
        let o = VertexOrder::new(&u, 1e-9);
        assert!(o.less(2, 0) && o.less(0, 1) && o.less(1, 3));
        let o = VertexOrder::with_tie_key(&u, 1e-9, &[5, 1, 0, 0]);
        assert!(o.less(1, 0));
        let exact = VertexOrder::exact(&u);
        assert!(exact.less(0, 1));
    }

    #[test]
    fn chained_clusters_are_transitive() {
        // 0 ~ 1 and 1 ~ 2 but not 0 ~ 2: all three form one cluster.
        let u = [0.0, 0.6e-9, 1.2e-9, 1.0];
        let o = VertexOrder::with_tie_key(&u, 1e-9, &[2, 1, 0, 3]);
        assert!(o.less(2, 1) && o.less(1, 0) && o.less(0, 3));
    }
}
