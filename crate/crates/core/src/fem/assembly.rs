//! P1 assembly of the Dirichlet energy and the boundary mass form.

use super::{EnvelopeCholesky, SparseSymmetricMatrix};
use crate::error::{Error, Result};
use crate::mesh::{signed_area, Metric, SurfaceMesh};

/// Element stiffness `∫_T ⟨∇φ_a, ∇φ_b⟩_G dA_G` for a triangle with parameter
/// coordinates `p` and constant metric `g`.
pub fn element_stiffness(p: [[f64; 2]; 3], g: &Metric) -> Result<[[f64; 3]; 3]> {
    if !g.is_positive_definite() {
        return Err(Error::MetricNotPositive {
            triangle: usize::MAX,
            det: g.det(),
            trace: g.trace(),
        });
    }
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]));
    if !(area > 0.0) {
        return Err(Error::DegenerateTriangle {
            triangle: usize::MAX,
            reason: format!("signed area {area}"),
        });
    }
    let mut grad = [[0.0; 2]; 3];
    for a in 0..3 {
        let j = (a + 1) % 3;
        let k = (a + 2) % 3;
        grad[a] = [
            (p[j][1] - p[k][1]) / (2.0 * area),
            (p[k][0] - p[j][0]) / (2.0 * area),
        ];
    }
    let w = area * g.det().sqrt();
    let mut ke = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let v = w * g.inverse_pairing(grad[a], grad[b]);
            ke[a][b] = v;
            ke[b][a] = v;
        }
    }
    Ok(ke)
}

/// Global stiffness matrix on nodes (identification-aware).
pub fn assemble_stiffness(mesh: &SurfaceMesh) -> Result<SparseSymmetricMatrix> {
    let verts = mesh.vertices();
    let mut triplets = Vec::with_capacity(6 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = [verts[tri[0]], verts[tri[1]], verts[tri[2]]];
        let ke = element_stiffness(p, &mesh.metric()[t]).map_err(|e| match e {
            Error::MetricNotPositive { det, trace, .. } => Error::MetricNotPositive {
                triangle: t,
                det,
                trace,
            },
            Error::DegenerateTriangle { reason, .. } => Error::DegenerateTriangle { triangle: t, reason },
            other => other,
        })?;
        debug_assert!(signed_area(verts, tri) > 0.0);
        let nodes = mesh.triangle_nodes()[t];
        for a in 0..3 {
            for b in a..3 {
                triplets.push((nodes[a], nodes[b], ke[a][b]));
            }
        }
    }
    Ok(SparseSymmetricMatrix::from_triplets(mesh.num_nodes(), triplets))
}

/// Boundary mass `∫_{∂M} ρ u v ds` with metric edge lengths and `ρ` averaged per edge.
pub fn assemble_boundary_mass(mesh: &SurfaceMesh) -> Result<SparseSymmetricMatrix> {
    let rho = mesh.rho();
    let mut triplets = Vec::new();
    for comp in mesh.boundary_components() {
        let n = comp.len();
        for i in 0..n {
            let a = comp.nodes[i];
            let b = comp.nodes[(i + 1) % n];
            for &node in &[a, b] {
                if !(rho[node] > 0.0) {
                    return Err(Error::NonPositiveWeight {
                        vertex: mesh.representative(node),
                        value: rho[node],
                    });
                }
            }
            let w = 0.5 * (rho[a] + rho[b]) * comp.edge_lengths[i];
            triplets.push((a, a, w / 3.0));
            triplets.push((b, b, w / 3.0));
            triplets.push((a, b, w / 6.0));
        }
    }
    Ok(SparseSymmetricMatrix::from_triplets(mesh.num_nodes(), triplets))
}

/// Split of the nodes into boundary (loop traversal order) and interior (ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofPartition {
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
}

impl DofPartition {
    pub fn new(mesh: &SurfaceMesh) -> Self {
        DofPartition {
            boundary: mesh.boundary_nodes(),
            interior: mesh.interior_nodes(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.boundary.len() + self.interior.len()
    }

    /// Scatter boundary and interior values back into a node field.
    pub fn combine(&self, boundary: &[f64], interior: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.num_nodes()];
        for (&n, &v) in self.boundary.iter().zip(boundary) {
            u[n] = v;
        }
        for (&n, &v) in self.interior.iter().zip(interior) {
            u[n] = v;
        }
        u
    }

    pub fn boundary_values(&self, u: &[f64]) -> Vec<f64> {
        self.boundary.iter().map(|&n| u[n]).collect()
    }
}

pub(crate) fn require_connected_with_boundary(mesh: &SurfaceMesh) -> Result<()> {
    if !mesh.has_boundary() {
        return Err(Error::ClosedMesh);
    }
    let components = mesh.connected_components();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    Ok(())
}

/// Factorized interior block, reusable for many harmonic extensions.
#[derive(Debug, Clone)]
pub struct HarmonicExtender {
    partition: DofPartition,
    k_ii: EnvelopeCholesky,
    /// `K_ib` column by column (one column per boundary node).
    k_ib: Vec<Vec<(usize, f64)>>,
}

impl HarmonicExtender {
    pub fn new(mesh: &SurfaceMesh, stiffness: &SparseSymmetricMatrix) -> Result<Self> {
        require_connected_with_boundary(mesh)?;
        let partition = DofPartition::new(mesh);
        let k_ii = EnvelopeCholesky::factor(&stiffness.principal_submatrix(&partition.interior))
            .map_err(|e| match e {
                Error::Factorization { pivot, value } => Error::Factorization {
                    pivot: partition.interior[pivot],
                    value,
                },
                other => other,
            })?;
        let k_ib = stiffness.block_columns(&partition.interior, &partition.boundary);
        Ok(HarmonicExtender {
            partition,
            k_ii,
            k_ib,
        })
    }

    pub fn partition(&self) -> &DofPartition {
        &self.partition
    }

    pub fn interior_factor(&self) -> &EnvelopeCholesky {
        &self.k_ii
    }

    pub fn k_ib_columns(&self) -> &[Vec<(usize, f64)>] {
        &self.k_ib
    }

    /// Harmonic extension of boundary values given in partition order.
    pub fn extend(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.partition.boundary.len() {
            return Err(Error::SizeMismatch {
                what: "boundary values",
                expected: self.partition.boundary.len(),
                found: f.len(),
            });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("boundary values must be finite".into()));
        }
        let mut rhs = vec![0.0; self.partition.interior.len()];
        for (col, &fv) in self.k_ib.iter().zip(f) {
            for &(r, v) in col {
                rhs[r] -= v * fv;
            }
        }
        let interior = self.k_ii.solve(&rhs);
        Ok(self.partition.combine(f, &interior))
    }
}

/// Discrete harmonic extension: equals `f` on the boundary (values in loop
/// traversal order, see [`SurfaceMesh::boundary_nodes`]) and solves
/// `K_ii x_i = -K_ib f` inside.
///
/// The discrete maximum principle holds when no triangle angle is obtuse; this
/// is not enforced.
pub fn harmonic_extension(mesh: &SurfaceMesh, f: &[f64]) -> Result<Vec<f64>> {
    let k = assemble_stiffness(mesh)?;
    HarmonicExtender::new(mesh, &k)?.extend(f)
}
