//! Discrete Steklov spectrum.

mod crosscheck;
mod dtn;

use std::fmt::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use crosscheck::crosscheck_generalized;
pub use dtn::{build_dtn, steklov_spectrum, DtnOperator};

use crate::error::{Error, Result};
use crate::fem::SparseSymmetricMatrix;
use crate::mesh::{Metric, SurfaceMesh};

/// Relative width of an eigenvalue cluster: `|σ - σ'| <= CLUSTER_TOL * (1 + σ)`.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteklovEigenpair {
    /// 1-based position in the ascending spectrum.
    pub k: usize,
    pub sigma: f64,
    /// Size of the eigenvalue cluster this pair belongs to.
    pub multiplicity: usize,
    /// Node field on the whole mesh.
    pub u: Vec<f64>,
    /// Boundary values in loop traversal order.
    pub trace: Vec<f64>,
    /// `‖K u - σ M_b u‖ / ((‖K‖∞ + σ ‖M_b‖∞) ‖u‖)`.
    pub residual: f64,
}

/// Half-open index ranges of the eigenvalue clusters of an ascending list.
pub fn cluster_ranges(sigmas: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sigmas.len() {
        let split = i == sigmas.len()
            || (sigmas[i] - sigmas[i - 1]).abs() > CLUSTER_TOL * (1.0 + sigmas[i - 1].abs());
        if split {
            out.push((start, i));
            start = i;
        }
    }
    out
}

fn m_inner(m: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        if b[j] == 0.0 {
            continue;
        }
        let mut col = 0.0;
        for i in 0..m.nrows() {
            col += a[i] * m[(i, j)];
        }
        s += col * b[j];
    }
    s
}

/// Orthonormalizes within clusters, fixes signs, extends and measures residuals.
#[allow(clippy::too_many_arguments)]
pub(crate) fn finalize<F>(
    sigmas: &[f64],
    clusters: &[(usize, usize)],
    mut ws: Vec<Vec<f64>>,
    m_bb: &DMatrix<f64>,
    stiffness: &SparseSymmetricMatrix,
    mass: &SparseSymmetricMatrix,
    extend: F,
) -> Result<Vec<SteklovEigenpair>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let k = sigmas.len();
    let mut multiplicity = vec![1; k];
    for &(s, e) in clusters {
        if s >= k {
            break;
        }
        for i in s..e.min(k) {
            multiplicity[i] = e - s;
            // modified Gram-Schmidt in the M_bb inner product
            for j in s..i {
                let (head, tail) = ws.split_at_mut(i);
                let p = m_inner(m_bb, &tail[0], &head[j]);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= p * y;
                }
            }
            let norm = m_inner(m_bb, &ws[i], &ws[i]).sqrt();
            for x in ws[i].iter_mut() {
                *x /= norm;
            }
        }
    }

    let k_norm = stiffness.inf_norm();
    let m_norm = mass.inf_norm();
    let mut out = Vec::with_capacity(k);
    for (i, mut w) in ws.into_iter().enumerate() {
        let scale = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(first) = w.iter().find(|x| x.abs() > 1e-8 * scale) {
            if *first < 0.0 {
                for x in w.iter_mut() {
                    *x = -*x;
                }
            }
        }
        let sigma = sigmas[i];
        let u = extend(sigma, &w)?;
        let ku = stiffness.mul_vec(&u);
        let mu = mass.mul_vec(&u);
        let r: f64 = ku
            .iter()
            .zip(&mu)
            .map(|(a, b)| (a - sigma * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let u_norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let residual = r / ((k_norm + sigma.abs() * m_norm) * u_norm);
        out.push(SteklovEigenpair {
            k: i + 1,
            sigma,
            multiplicity: multiplicity[i],
            u,
            trace: w,
            residual,
        });
    }
    Ok(out)
}

/// Multiplies each triangle metric by `1 + amplitude·ξ_t`, `ξ_t ∈ [-1, 1]` drawn
/// from a ChaCha8 stream seeded by `seed`.
pub fn perturb_metric(mesh: &SurfaceMesh, amplitude: f64, seed: u64) -> Result<SurfaceMesh> {
    if !(0.0..0.5).contains(&amplitude) {
        return Err(Error::InvalidParameter(format!(
            "perturbation amplitude {amplitude} outside [0, 0.5)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metric: Vec<Metric> = mesh
        .metric()
        .iter()
        .map(|g| {
            let xi: f64 = rng.random_range(-1.0..=1.0);
            g.scaled(1.0 + amplitude * xi)
        })
        .collect();
    mesh.with_metric(metric)
}

/// CSV with header `k,sigma,multiplicity,residual`, 17 significant digits.
pub fn spectrum_csv(pairs: &[SteklovEigenpair]) -> String {
    let mut s = String::from("k,sigma,multiplicity,residual\n");
    for p in pairs {
        writeln!(s, "{},{:.16e},{},{:.16e}", p.k, p.sigma, p.multiplicity, p.residual).unwrap();
    }
    s
}

/// Gram matrix `Wᵀ M_bb W` of the traces.
pub fn trace_gram(dtn: &DtnOperator, pairs: &[SteklovEigenpair]) -> DMatrix<f64> {
    let k = pairs.len();
    DMatrix::from_fn(k, k, |i, j| {
        m_inner(dtn.boundary_mass_block(), &pairs[i].trace, &pairs[j].trace)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::harmonic_extension;
    use crate::mesh::{generate_annulus, generate_cylinder, generate_disk};

    #[test]
    fn constants_are_in_the_kernel() {
        let mesh = generate_disk(1.0, 24).unwrap();
        let dtn = build_dtn(&mesh).unwrap();
        let s1 = dtn.apply(&vec![1.0; dtn.num_boundary()]).unwrap();
        assert!(s1.iter().all(|v| v.abs() < 1e-10));
        assert!(dtn.asymmetry() <= 1e-10);
    }

    fn cos_residual(res: usize) -> f64 {
        let mesh = generate_disk(1.0, res).unwrap();
        let dtn = build_dtn(&mesh).unwrap();
        let f: Vec<f64> = dtn
            .partition()
            .boundary
            .iter()
            .map(|&n| {
                let p = mesh.node_position(n);
                p[1].atan2(p[0]).cos()
            })
            .collect();
        let sf = dtn.apply(&f).unwrap();
        let mf = dtn.boundary_mass_block() * nalgebra::DVector::from_column_slice(&f);
        let num: f64 = sf.iter().zip(mf.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        num / mf.norm()
    }

    #[test]
    fn disk_cosine_is_an_approximate_eigenvector() {
        let r0 = cos_residual(24);
        let r1 = cos_residual(48);
        assert!(r1 < r0 / 2.0, "{r0} {r1}");
        assert!(r1 < 5e-3);
    }

    #[test]
    fn disk_spectrum_and_normalization() {
        let mesh = generate_disk(1.0, 60).unwrap();
        let dtn = build_dtn(&mesh).unwrap();
        let pairs = dtn.spectrum(5).unwrap();
        let expected = [0.0, 1.0, 1.0, 2.0, 2.0];
        for (p, e) in pairs.iter().zip(expected) {
            assert!((p.sigma - e).abs() < 2e-2, "{} vs {e}", p.sigma);
            assert!(p.residual < 1e-10, "residual {}", p.residual);
        }
        assert_eq!(pairs[1].multiplicity, 2);
        assert_eq!(pairs[0].multiplicity, 1);
        let u1 = &pairs[0].u;
        assert!(u1.iter().all(|v| (v - u1[0]).abs() < 1e-8));
        let gram = trace_gram(&dtn, &pairs);
        assert!((gram - DMatrix::identity(5, 5)).abs().max() < 1e-8);
        for p in &pairs {
            let first = p.trace.iter().find(|x| x.abs() > 1e-8).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn cylinder_second_eigenvalue() {
        let short = steklov_spectrum(&generate_cylinder(0.5, 48).unwrap(), 4).unwrap();
        assert!((short[1].sigma - 0.5f64.tanh()).abs() < 2e-2);
        assert_eq!(short[1].multiplicity, 2);
        let long = steklov_spectrum(&generate_cylinder(2.0, 48).unwrap(), 3).unwrap();
        assert!((long[1].sigma - 0.5).abs() < 2e-2);
        assert_eq!(long[1].multiplicity, 1);
    }

    #[test]
    fn routes_agree() {
        for mesh in [
            generate_disk(1.0, 36).unwrap(),
            generate_annulus(0.5, 1.0, 32).unwrap(),
            generate_cylinder(0.7, 24).unwrap(),
        ] {
            let a = steklov_spectrum(&mesh, 10).unwrap();
            let b = crosscheck_generalized(&mesh, 10).unwrap();
            let smax = a.last().unwrap().sigma;
            assert!((a[0].sigma - b[0].sigma).abs() <= 1e-8 * smax);
            for (p, q) in a.iter().zip(&b).skip(1) {
                assert!((p.sigma - q.sigma).abs() <= 1e-8 * p.sigma, "{} {}", p.sigma, q.sigma);
                assert_eq!(p.multiplicity, q.multiplicity);
                assert!(q.residual < 1e-9);
            }
        }
    }

    #[test]
    fn constant_weight_scales_the_spectrum() {
        let mesh = generate_annulus(0.5, 1.0, 24).unwrap();
        let a = steklov_spectrum(&mesh, 6).unwrap();
        let heavy = mesh.with_node_rho(&vec![4.0; mesh.num_nodes()]).unwrap();
        let b = steklov_spectrum(&heavy, 6).unwrap();
        for (p, q) in a.iter().zip(&b).skip(1) {
            assert!((p.sigma / 4.0 - q.sigma).abs() <= 1e-10 * p.sigma);
        }
    }

    #[test]
    fn second_eigenvalue_bounds_rayleigh_quotients() {
        let mesh = generate_annulus(0.5, 1.0, 24).unwrap();
        let dtn = build_dtn(&mesh).unwrap();
        let pairs = dtn.spectrum(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let nb = dtn.num_boundary();
        let ones = vec![1.0; nb];
        let total = m_inner(dtn.boundary_mass_block(), &ones, &ones);
        for _ in 0..20 {
            let mut phi: Vec<f64> = (0..nb).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = m_inner(dtn.boundary_mass_block(), &phi, &ones) / total;
            phi.iter_mut().for_each(|x| *x -= mean);
            let h = harmonic_extension(&mesh, &phi).unwrap();
            let q = dtn.stiffness().quadratic_form(&h) / m_inner(dtn.boundary_mass_block(), &phi, &phi);
            assert!(pairs[1].sigma <= q + 1e-10);
        }
    }

    #[test]
    fn perturbation_is_deterministic_and_bounded() {
        let mesh = generate_disk(1.0, 30).unwrap();
        let same = perturb_metric(&mesh, 0.0, 9).unwrap();
        assert_eq!(same.metric(), mesh.metric());
        let a = perturb_metric(&mesh, 0.1, 42).unwrap();
        let b = perturb_metric(&mesh, 0.1, 42).unwrap();
        assert_eq!(a.metric(), b.metric());
        assert!(perturb_metric(&mesh, 0.5, 1).is_err());
        assert!(perturb_metric(&mesh, -0.1, 1).is_err());

        let s0 = steklov_spectrum(&mesh, 3).unwrap();
        let s1 = steklov_spectrum(&a, 3).unwrap();
        for (p, q) in s0.iter().zip(&s1) {
            assert!((p.sigma - q.sigma).abs() < 0.1 * (1.0 + p.sigma));
        }
    }

    #[test]
    fn csv_layout() {
        let mesh = generate_disk(1.0, 12).unwrap();
        let pairs = steklov_spectrum(&mesh, 2).unwrap();
        let csv = spectrum_csv(&pairs);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k,sigma,multiplicity,residual"));
        assert!(lines.next().unwrap().starts_with("1,"));
        assert!(matches!(
            steklov_spectrum(&mesh, 1000),
            Err(Error::TooManyEigenpairs { .. })
        ));
    }

    #[test]
    fn cluster_ranges_chain_neighbours() {
        assert_eq!(
            cluster_ranges(&[0.0, 1.0, 1.0 + 1e-7, 2.0]),
            vec![(0, 1), (1, 3), (3, 4)]
        );
    }
}
