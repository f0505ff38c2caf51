//! Triangle meshes of surfaces with boundary.
//!
//! A [`SurfaceMesh`] stores raw vertices in a planar parameter domain together
//! with a constant metric tensor per triangle and an optional list of vertex
//! identifications (used for periodic directions such as the seam of a flat
//! cylinder). After identifications the raw vertices collapse into *nodes*;
//! every scalar field in this crate is sampled per node, and all topology
//! (edges, links, boundary loops, Euler characteristic) is computed on nodes.
//!
//! The mesh is validated once at construction and is immutable afterwards.

mod double;
mod generate;
mod io;

pub use double::{double_mesh, reflect_function, DoubledMesh};
pub use generate::{
    generate_annulus, generate_cylinder, generate_disk, MIN_ANGULAR_SAMPLES,
};
pub use io::{MeshData, MESH_FORMAT_VERSION};

use crate::error::{Error, Result};

/// Symmetric 2x2 metric tensor `[[g11, g12], [g12, g22]]` in the parameter frame
/// of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl Metric {
    pub const IDENTITY: Metric = Metric {
        g11: 1.0,
        g12: 0.0,
        g22: 1.0,
    };

    pub fn new(g11: f64, g12: f64, g22: f64) -> Self {
        Metric { g11, g12, g22 }
    }

    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn trace(&self) -> f64 {
        self.g11 + self.g22
    }

    pub fn is_positive_definite(&self) -> bool {
        self.det() > 0.0 && self.trace() > 0.0 && self.g11.is_finite() && self.g22.is_finite()
    }

    pub fn scaled(&self, factor: f64) -> Metric {
        Metric {
            g11: self.g11 * factor,
            g12: self.g12 * factor,
            g22: self.g22 * factor,
        }
    }

    /// Squared length `dᵀ G d` of a parameter-space displacement.
    pub fn norm_sq(&self, d: [f64; 2]) -> f64 {
        self.g11 * d[0] * d[0] + 2.0 * self.g12 * d[0] * d[1] + self.g22 * d[1] * d[1]
    }

    /// Pairing `aᵀ G⁻¹ b` of two covectors (parameter-space gradients).
    pub fn inverse_pairing(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let det = self.det();
        (self.g22 * a[0] * b[0] - self.g12 * (a[0] * b[1] + a[1] * b[0]) + self.g11 * a[1] * b[1])
            / det
    }
}

impl Default for Metric {
    fn default() -> Self {
        Metric::IDENTITY
    }
}

/// One closed boundary loop, listed in the traversal order induced by the
/// mesh orientation (interior on the left).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryComponent {
    /// Node ids around the loop.
    pub nodes: Vec<usize>,
    /// `edge_lengths[i]` is the metric length of the edge `nodes[i] -> nodes[i + 1]` (cyclic).
    pub edge_lengths: Vec<f64>,
    /// Triangle owning each boundary edge, with the raw vertex ids of its endpoints.
    pub edges: Vec<BoundaryEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub triangle: usize,
    pub from_vertex: usize,
    pub to_vertex: usize,
}

impl BoundaryComponent {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }
}

/// Ordered link of a node: the ring of neighbours around it.
///
/// For interior nodes the link is a cycle. For boundary nodes it is a path that
/// starts at the next boundary node along the loop and ends at the previous one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub nodes: Vec<usize>,
    pub closed: bool,
}

#[derive(Debug, Clone)]
struct Edge {
    a: usize,
    b: usize,
    count: usize,
}

/// Validated triangle mesh with metric, identifications and boundary weight.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    metric: Vec<Metric>,
    identifications: Vec<[usize; 2]>,
    rho: Vec<f64>,
    node_of: Vec<usize>,
    representative: Vec<usize>,
    triangle_nodes: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    is_boundary: Vec<bool>,
    boundary: Vec<BoundaryComponent>,
    links: Vec<Link>,
}

impl SurfaceMesh {
    /// Euclidean mesh without identifications and with unit boundary weight.
    pub fn new(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nt = triangles.len();
        Self::with_all(vertices, triangles, vec![Metric::IDENTITY; nt], Vec::new(), None)
    }

    /// Full constructor. `rho`, when given, is one weight per raw vertex; identified
    /// vertices must agree and only values at boundary nodes are checked for positivity.
    pub fn with_all(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        metric: Vec<Metric>,
        identifications: Vec<[usize; 2]>,
        rho: Option<Vec<f64>>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if metric.len() != triangles.len() {
            return Err(Error::SizeMismatch {
                what: "metric tensors",
                expected: triangles.len(),
                found: metric.len(),
            });
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::IndexOutOfRange {
                        context: format!("triangle {t}"),
                        index: v,
                        len: nv,
                    });
                }
            }
        }
        for (i, pair) in identifications.iter().enumerate() {
            for &v in pair {
                if v >= nv {
                    return Err(Error::IndexOutOfRange {
                        context: format!("identification {i}"),
                        index: v,
                        len: nv,
                    });
                }
            }
        }
        for (i, p) in vertices.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "vertex {i} has non-finite coordinates"
                )));
            }
        }
        for (t, g) in metric.iter().enumerate() {
            if !g.is_positive_definite() {
                return Err(Error::MetricNotPositive {
                    triangle: t,
                    det: g.det(),
                    trace: g.trace(),
                });
            }
        }

        let (node_of, representative) = resolve_identifications(nv, &identifications);
        let n_nodes = representative.len();

        let mut triangle_nodes = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let nodes = [node_of[tri[0]], node_of[tri[1]], node_of[tri[2]]];
            if nodes[0] == nodes[1] || nodes[1] == nodes[2] || nodes[0] == nodes[2] {
                return Err(Error::DegenerateTriangle {
                    triangle: t,
                    reason: "two corners are the same vertex after identifications".into(),
                });
            }
            let area = signed_area(&vertices, tri);
            if !(area > 0.0) {
                return Err(Error::DegenerateTriangle {
                    triangle: t,
                    reason: format!("signed parameter area {area} is not positive"),
                });
            }
            triangle_nodes.push(nodes);
        }

        // Unique node edges, each with its directed uses.
        let mut directed: Vec<(usize, usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (t, n) in triangle_nodes.iter().enumerate() {
            for k in 0..3 {
                directed.push((n[k], n[(k + 1) % 3], t));
            }
        }
        let mut keyed: Vec<(usize, usize, bool, usize)> = directed
            .iter()
            .map(|&(a, b, t)| (a.min(b), a.max(b), a < b, t))
            .collect();
        keyed.sort_unstable();
        let mut edges = Vec::new();
        let mut boundary_directed = Vec::new();
        let mut i = 0;
        while i < keyed.len() {
            let mut j = i;
            while j < keyed.len() && keyed[j].0 == keyed[i].0 && keyed[j].1 == keyed[i].1 {
                j += 1;
            }
            let (a, b) = (keyed[i].0, keyed[i].1);
            let count = j - i;
            if count > 2 {
                return Err(Error::EdgeIncidence {
                    a: representative[a],
                    b: representative[b],
                    count,
                });
            }
            if count == 2 && keyed[i].2 == keyed[i + 1].2 {
                return Err(Error::InconsistentOrientation {
                    a: representative[a],
                    b: representative[b],
                });
            }
            if count == 1 {
                let (from, to) = if keyed[i].2 { (a, b) } else { (b, a) };
                boundary_directed.push((from, to, keyed[i].3));
            }
            edges.push(Edge { a, b, count });
            i = j;
        }

        let mut is_boundary = vec![false; n_nodes];
        for &(from, to, _) in &boundary_directed {
            is_boundary[from] = true;
            is_boundary[to] = true;
        }

        let boundary = extract_loops(
            n_nodes,
            &boundary_directed,
            &vertices,
            &triangles,
            &triangle_nodes,
            &metric,
            &representative,
        )?;
        let links = build_links(n_nodes, &triangle_nodes, &is_boundary, &representative)?;

        // Every node must be used by at least one triangle.
        for (n, link) in links.iter().enumerate() {
            if link.nodes.is_empty() {
                return Err(Error::NonManifoldVertex {
                    vertex: representative[n],
                    reason: "vertex is not used by any triangle".into(),
                });
            }
        }

        let rho_nodes = match rho {
            None => vec![1.0; n_nodes],
            Some(values) => {
                if values.len() != nv {
                    return Err(Error::SizeMismatch {
                        what: "boundary weights",
                        expected: nv,
                        found: values.len(),
                    });
                }
                let mut out = vec![f64::NAN; n_nodes];
                for (v, &value) in values.iter().enumerate() {
                    let n = node_of[v];
                    if out[n].is_nan() {
                        out[n] = value;
                    } else if out[n] != value {
                        return Err(Error::WeightMismatch {
                            a: representative[n],
                            b: v,
                        });
                    }
                }
                for (n, &value) in out.iter().enumerate() {
                    if is_boundary[n] && !(value > 0.0 && value.is_finite()) {
                        return Err(Error::NonPositiveWeight {
                            vertex: representative[n],
                            value,
                        });
                    }
                }
                out
            }
        };

        Ok(SurfaceMesh {
            vertices,
            triangles,
            metric,
            identifications,
            rho: rho_nodes,
            node_of,
            representative,
            triangle_nodes,
            edges,
            is_boundary,
            boundary,
            links,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn metric(&self) -> &[Metric] {
        &self.metric
    }

    pub fn identifications(&self) -> &[[usize; 2]] {
        &self.identifications
    }

    /// Boundary weight per node (1 unless specified).
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.representative.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Node of a raw vertex.
    pub fn node_of(&self, vertex: usize) -> usize {
        self.node_of[vertex]
    }

    /// Smallest raw vertex id of a node.
    pub fn representative(&self, node: usize) -> usize {
        self.representative[node]
    }

    /// Parameter coordinates of a node (those of its representative vertex).
    pub fn node_position(&self, node: usize) -> [f64; 2] {
        self.vertices[self.representative[node]]
    }

    pub fn triangle_nodes(&self) -> &[[usize; 3]] {
        &self.triangle_nodes
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.is_boundary[node]
    }

    pub fn has_boundary(&self) -> bool {
        !self.boundary.is_empty()
    }

    pub fn link(&self, node: usize) -> &Link {
        &self.links[node]
    }

    /// Boundary loops, ordered by their smallest node id.
    pub fn boundary_components(&self) -> &[BoundaryComponent] {
        &self.boundary
    }

    /// Boundary nodes concatenated in loop traversal order.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        self.boundary.iter().flat_map(|c| c.nodes.iter().copied()).collect()
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&n| !self.is_boundary[n]).collect()
    }

    /// `V - E + F` counted after identifications.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_nodes() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Number of edge-connected components of the node graph.
    pub fn connected_components(&self) -> usize {
        let n = self.num_nodes();
        let mut parent: Vec<usize> = (0..n).collect();
        for e in &self.edges {
            union(&mut parent, e.a, e.b);
        }
        (0..n).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// Node pairs `(a, b)` with `a < b` for every edge after identifications.
    pub fn edge_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|e| (e.a, e.b))
    }

    /// Number of triangles sharing the edge `(a, b)` (0 if there is no such edge).
    pub fn edge_triangle_count(&self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by(|e| (e.a, e.b).cmp(&key))
            .map(|i| self.edges[i].count)
            .unwrap_or(0)
    }

    /// Largest metric edge length over all triangles.
    pub fn max_edge_length(&self) -> f64 {
        let mut h: f64 = 0.0;
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let p = self.vertices[tri[k]];
                let q = self.vertices[tri[(k + 1) % 3]];
                let d = [q[0] - p[0], q[1] - p[1]];
                h = h.max(self.metric[t].norm_sq(d).sqrt());
            }
        }
        h
    }

    /// Metric area of a triangle.
    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t]) * self.metric[t].det().sqrt()
    }

    /// Copy of this mesh with a different metric per triangle.
    pub fn with_metric(&self, metric: Vec<Metric>) -> Result<SurfaceMesh> {
        Self::with_all(
            self.vertices.clone(),
            self.triangles.clone(),
            metric,
            self.identifications.clone(),
            Some(self.rho_per_vertex()),
        )
    }

    /// Copy of this mesh with a boundary weight given per node.
    pub fn with_node_rho(&self, rho_nodes: &[f64]) -> Result<SurfaceMesh> {
        if rho_nodes.len() != self.num_nodes() {
            return Err(Error::SizeMismatch {
                what: "node weights",
                expected: self.num_nodes(),
                found: rho_nodes.len(),
            });
        }
        let per_vertex = self.node_of.iter().map(|&n| rho_nodes[n]).collect();
        Self::with_all(
            self.vertices.clone(),
            self.triangles.clone(),
            self.metric.clone(),
            self.identifications.clone(),
            Some(per_vertex),
        )
    }

    pub(crate) fn rho_per_vertex(&self) -> Vec<f64> {
        self.node_of.iter().map(|&n| self.rho[n]).collect()
    }

    /// Sample a function of parameter coordinates at every node.
    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.num_nodes()).map(|n| f(self.node_position(n))).collect()
    }

    pub(crate) fn check_field(&self, u: &[f64], what: &'static str) -> Result<()> {
        if u.len() != self.num_nodes() {
            return Err(Error::SizeMismatch {
                what,
                expected: self.num_nodes(),
                found: u.len(),
            });
        }
        Ok(())
    }
}

/// `V - E + F` after identifications.
pub fn euler_characteristic(mesh: &SurfaceMesh) -> i64 {
    mesh.euler_characteristic()
}

/// Boundary loops of the mesh.
pub fn boundary_components(mesh: &SurfaceMesh) -> Vec<BoundaryComponent> {
    mesh.boundary_components().to_vec()
}

pub(crate) fn signed_area(vertices: &[[f64; 2]], tri: &[usize; 3]) -> f64 {
    let p = vertices[tri[0]];
    let q = vertices[tri[1]];
    let r = vertices[tri[2]];
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let ra = find(parent, a);
    let rb = find(parent, b);
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

/// Returns `(node_of, representative)`; nodes are numbered by their smallest raw vertex.
fn resolve_identifications(nv: usize, pairs: &[[usize; 2]]) -> (Vec<usize>, Vec<usize>) {
    let mut parent: Vec<usize> = (0..nv).collect();
    for p in pairs {
        union(&mut parent, p[0], p[1]);
    }
    let mut node_of = vec![usize::MAX; nv];
    let mut representative = Vec::new();
    for v in 0..nv {
        let root = find(&mut parent, v);
        // union keeps the smallest index as root, so roots are met first.
        if root == v {
            node_of[v] = representative.len();
            representative.push(v);
        } else {
            node_of[v] = node_of[root];
        }
    }
    (node_of, representative)
}

fn extract_loops(
    n_nodes: usize,
    boundary_directed: &[(usize, usize, usize)],
    vertices: &[[f64; 2]],
    triangles: &[[usize; 3]],
    triangle_nodes: &[[usize; 3]],
    metric: &[Metric],
    representative: &[usize],
) -> Result<Vec<BoundaryComponent>> {
    const NONE: usize = usize::MAX;
    let mut next = vec![NONE; n_nodes];
    let mut owner = vec![NONE; n_nodes];
    let mut incoming = vec![0usize; n_nodes];
    for (k, &(from, to, _)) in boundary_directed.iter().enumerate() {
        if next[from] != NONE {
            return Err(Error::BoundaryNotClosed {
                vertex: representative[from],
            });
        }
        next[from] = to;
        owner[from] = k;
        incoming[to] += 1;
    }
    for n in 0..n_nodes {
        if (next[n] != NONE) != (incoming[n] == 1) || incoming[n] > 1 {
            return Err(Error::BoundaryNotClosed {
                vertex: representative[n],
            });
        }
    }

    let mut visited = vec![false; n_nodes];
    let mut loops = Vec::new();
    for start in 0..n_nodes {
        if next[start] == NONE || visited[start] {
            continue;
        }
        let mut nodes = Vec::new();
        let mut edge_lengths = Vec::new();
        let mut edges = Vec::new();
        let mut cur = start;
        loop {
            if visited[cur] {
                return Err(Error::BoundaryNotClosed {
                    vertex: representative[cur],
                });
            }
            visited[cur] = true;
            nodes.push(cur);
            let (from, to, t) = boundary_directed[owner[cur]];
            let tri = &triangles[t];
            let tn = &triangle_nodes[t];
            let lf = (0..3).find(|&k| tn[k] == from).expect("edge endpoint in triangle");
            let lt = (0..3).find(|&k| tn[k] == to).expect("edge endpoint in triangle");
            let p = vertices[tri[lf]];
            let q = vertices[tri[lt]];
            let len = metric[t].norm_sq([q[0] - p[0], q[1] - p[1]]).sqrt();
            edge_lengths.push(len);
            edges.push(BoundaryEdge {
                triangle: t,
                from_vertex: tri[lf],
                to_vertex: tri[lt],
            });
            cur = next[cur];
            if cur == start {
                break;
            }
        }
        loops.push(BoundaryComponent {
            nodes,
            edge_lengths,
            edges,
        });
    }
    Ok(loops)
}

fn build_links(
    n_nodes: usize,
    triangle_nodes: &[[usize; 3]],
    is_boundary: &[bool],
    representative: &[usize],
) -> Result<Vec<Link>> {
    let mut pieces: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_nodes];
    for n in triangle_nodes {
        pieces[n[0]].push((n[1], n[2]));
        pieces[n[1]].push((n[2], n[0]));
        pieces[n[2]].push((n[0], n[1]));
    }
    let mut links = Vec::with_capacity(n_nodes);
    for (v, edges) in pieces.into_iter().enumerate() {
        if edges.is_empty() {
            links.push(Link {
                nodes: Vec::new(),
                closed: false,
            });
            continue;
        }
        let fail = |reason: &str| Error::NonManifoldVertex {
            vertex: representative[v],
            reason: reason.to_string(),
        };
        for (i, e) in edges.iter().enumerate() {
            if edges[..i].iter().any(|f| f.0 == e.0) {
                return Err(fail("link has a branching vertex"));
            }
        }
        let start = if is_boundary[v] {
            let starts: Vec<usize> = edges
                .iter()
                .map(|e| e.0)
                .filter(|&a| !edges.iter().any(|f| f.1 == a))
                .collect();
            if starts.len() != 1 {
                return Err(fail("boundary link is not a single path"));
            }
            starts[0]
        } else {
            edges[0].0
        };
        let mut nodes = vec![start];
        let mut cur = start;
        for _ in 0..edges.len() {
            match edges.iter().find(|e| e.0 == cur) {
                Some(&(_, to)) => {
                    cur = to;
                    nodes.push(to);
                }
                None => return Err(fail("link path ends early")),
            }
        }
        let closed = !is_boundary[v];
        if closed {
            if nodes.last() != Some(&start) {
                return Err(fail("interior link is not a closed cycle"));
            }
            nodes.pop();
        }
        let mut sorted = nodes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(fail("link visits a neighbour twice"));
        }
        links.push(Link { nodes, closed });
    }
    Ok(links)
}
