//! Second route to the same eigenpairs through the shifted full system.
//!
//! `K u = σ M_b u` is equivalent to `(K + M_b) u = (1 + σ) M_b u`, and `K + M_b`
//! is positive definite on a connected mesh with boundary. Restricting the
//! inverse to boundary nodes gives `B = [(K + M_b)⁻¹]_bb` and the symmetric
//! problem `Rᵀ B R y = μ y` with `M_bb = R Rᵀ` and `μ = 1 / (1 + σ)`. No interior
//! Schur complement is formed.

use rayon::prelude::*;

use super::dtn::check_count;
use super::{cluster_ranges, finalize, SteklovEigenpair};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_boundary_mass, assemble_stiffness, require_connected_with_boundary, EnvelopeCholesky,
};
use crate::mesh::SurfaceMesh;

pub fn crosscheck_generalized(mesh: &SurfaceMesh, k: usize) -> Result<Vec<SteklovEigenpair>> {
    require_connected_with_boundary(mesh)?;
    let stiffness = assemble_stiffness(mesh)?;
    let mass = assemble_boundary_mass(mesh)?;
    let boundary = mesh.boundary_nodes();
    let nb = boundary.len();
    check_count(k, nb)?;

    let shifted = EnvelopeCholesky::factor(&stiffness.add(&mass))?;
    let columns: Vec<(usize, Vec<f64>)> = boundary
        .par_iter()
        .map(|&n| shifted.forward_sparse(&[(n, 1.0)]))
        .collect();
    let mut b = nalgebra::DMatrix::zeros(nb, nb);
    for i in 0..nb {
        for j in i..nb {
            let (li, yi) = &columns[i];
            let (lj, yj) = &columns[j];
            let start = (*li).max(*lj).min(yi.len());
            let v: f64 = yi[start..].iter().zip(&yj[start..]).map(|(a, b)| a * b).sum();
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }

    let m_bb = mass.principal_submatrix(&boundary).to_dense();
    let r = m_bb
        .clone()
        .cholesky()
        .ok_or(Error::Factorization {
            pivot: 0,
            value: f64::NAN,
        })?
        .l();
    let mut c = r.transpose() * &b * &r;
    c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..nb).collect();
    // largest μ first is smallest σ
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
    let sigmas: Vec<f64> = order.iter().map(|&i| 1.0 / eig.eigenvalues[i] - 1.0).collect();
    let clusters = cluster_ranges(&sigmas);
    let mut ws = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let y = eig.eigenvectors.column(i).into_owned();
        let w = r.tr_solve_lower_triangular(&y).expect("triangular solve");
        ws.push(w.iter().copied().collect::<Vec<f64>>());
    }

    let n = mesh.num_nodes();
    finalize(
        &sigmas[..k],
        &clusters,
        ws,
        &m_bb,
        &stiffness,
        &mass,
        |sigma, w| {
            let mut full = vec![0.0; n];
            for (&node, &v) in boundary.iter().zip(w) {
                full[node] = v;
            }
            let rhs = mass.mul_vec(&full);
            let u = shifted.solve(&rhs);
            let mut u: Vec<f64> = u.into_iter().map(|x| x * (1.0 + sigma)).collect();
            // the boundary values are w up to solver error; keep them exact
            for (&node, &v) in boundary.iter().zip(w) {
                u[node] = v;
            }
            Ok(u)
        },
    )
}
