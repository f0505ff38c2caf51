//! Discrete Dirichlet-to-Neumann operator as the Schur complement of the stiffness matrix.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{cluster_ranges, finalize, SteklovEigenpair};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_boundary_mass, assemble_stiffness, DofPartition, HarmonicExtender,
    SparseSymmetricMatrix,
};
use crate::mesh::SurfaceMesh;

/// `S = K_bb - K_bi K_ii⁻¹ K_ib` on boundary nodes (in loop traversal order),
/// together with the factorized interior block used to build it.
#[derive(Debug, Clone)]
pub struct DtnOperator {
    s: DMatrix<f64>,
    m_bb: DMatrix<f64>,
    extender: HarmonicExtender,
    stiffness: SparseSymmetricMatrix,
    boundary_mass: SparseSymmetricMatrix,
}

/// Builds the Schur complement. Columns of `L⁻¹ K_ib` are computed in parallel;
/// every entry is reduced in a fixed order, so the result does not depend on
/// the thread count.
pub fn build_dtn(mesh: &SurfaceMesh) -> Result<DtnOperator> {
    let stiffness = assemble_stiffness(mesh)?;
    let boundary_mass = assemble_boundary_mass(mesh)?;
    let extender = HarmonicExtender::new(mesh, &stiffness)?;
    let part = extender.partition();
    let nb = part.boundary.len();

    let factor = extender.interior_factor();
    let columns: Vec<(usize, Vec<f64>)> = extender
        .k_ib_columns()
        .par_iter()
        .map(|col| factor.forward_sparse(col))
        .collect();

    let k_bb = stiffness.principal_submatrix(&part.boundary);
    let upper: Vec<Vec<f64>> = (0..nb)
        .into_par_iter()
        .map(|i| {
            (i..nb)
                .map(|j| {
                    let (li, yi) = &columns[i];
                    let (lj, yj) = &columns[j];
                    let start = (*li).max(*lj).min(yi.len());
                    let dot: f64 = yi[start..].iter().zip(&yj[start..]).map(|(a, b)| a * b).sum();
                    k_bb.get(i, j) - dot
                })
                .collect()
        })
        .collect();
    let mut s = DMatrix::zeros(nb, nb);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            s[(i, i + off)] = v;
            s[(i + off, i)] = v;
        }
    }
    let m_bb = boundary_mass.principal_submatrix(&part.boundary).to_dense();
    Ok(DtnOperator {
        s,
        m_bb,
        extender,
        stiffness,
        boundary_mass,
    })
}

impl DtnOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// Boundary block of the boundary mass matrix.
    pub fn boundary_mass_block(&self) -> &DMatrix<f64> {
        &self.m_bb
    }

    pub fn partition(&self) -> &DofPartition {
        self.extender.partition()
    }

    pub fn stiffness(&self) -> &SparseSymmetricMatrix {
        &self.stiffness
    }

    pub fn boundary_mass(&self) -> &SparseSymmetricMatrix {
        &self.boundary_mass
    }

    pub fn extender(&self) -> &HarmonicExtender {
        &self.extender
    }

    pub fn num_boundary(&self) -> usize {
        self.s.nrows()
    }

    /// `S f` for boundary values in partition order.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.num_boundary() {
            return Err(Error::SizeMismatch {
                what: "boundary values",
                expected: self.num_boundary(),
                found: f.len(),
            });
        }
        let v = &self.s * nalgebra::DVector::from_column_slice(f);
        Ok(v.iter().copied().collect())
    }

    /// Discrete conormal flux `S (u|∂M)` of a node field.
    pub fn flux(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.partition().num_nodes() {
            return Err(Error::SizeMismatch {
                what: "field values",
                expected: self.partition().num_nodes(),
                found: u.len(),
            });
        }
        self.apply(&self.partition().boundary_values(u))
    }

    /// `max |S - Sᵀ| / max |S|`.
    pub fn asymmetry(&self) -> f64 {
        let d = (&self.s - self.s.transpose()).abs().max();
        d / self.s.abs().max().max(f64::MIN_POSITIVE)
    }

    /// First `k` eigenpairs of `S w = σ M_bb w`, ascending.
    pub fn spectrum(&self, k: usize) -> Result<Vec<SteklovEigenpair>> {
        let nb = self.num_boundary();
        check_count(k, nb)?;
        let chol = self
            .m_bb
            .clone()
            .cholesky()
            .ok_or(Error::Factorization {
                pivot: 0,
                value: f64::NAN,
            })?;
        let l = chol.l();
        // C = L⁻¹ S L⁻ᵀ
        let x = l.solve_lower_triangular(&self.s).expect("triangular solve");
        let mut c = l
            .solve_lower_triangular(&x.transpose())
            .expect("triangular solve");
        c = (&c + c.transpose()) * 0.5;
        let eig = c.symmetric_eigen();
        let mut order: Vec<usize> = (0..nb).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let sigmas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let clusters = cluster_ranges(&sigmas);
        let mut ws = Vec::with_capacity(k);
        for &i in order.iter().take(k) {
            let y = eig.eigenvectors.column(i).into_owned();
            let w = l.tr_solve_lower_triangular(&y).expect("triangular solve");
            ws.push(w.iter().copied().collect::<Vec<f64>>());
        }
        finalize(
            &sigmas[..k],
            &clusters,
            ws,
            &self.m_bb,
            &self.stiffness,
            &self.boundary_mass,
            |_, w| self.extender.extend(w),
        )
    }
}

pub(crate) fn check_count(k: usize, available: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("at least one eigenpair must be requested".into()));
    }
    if k > available {
        return Err(Error::TooManyEigenpairs {
            requested: k,
            available,
        });
    }
    Ok(())
}

/// First `k` Steklov eigenpairs of `mesh` through the Dirichlet-to-Neumann operator.
pub fn steklov_spectrum(mesh: &SurfaceMesh, k: usize) -> Result<Vec<SteklovEigenpair>> {
    build_dtn(mesh)?.spectrum(k)
}
