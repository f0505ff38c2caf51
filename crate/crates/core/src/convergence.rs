//! Eigenvalue errors against the closed-form spectra over a resolution ladder.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{generate_annulus, generate_cylinder, generate_disk, SurfaceMesh};
use crate::oracle::{model_for, Geometry};
use crate::spectrum::steklov_spectrum;

/// Observed rates below this are reported as failures.
pub const MIN_RATE: f64 = 1.5;

/// Errors below this are treated as exact and carry no rate.
pub const EXACT_ERROR: f64 = 1e-11;

pub fn generate(geometry: Geometry, resolution: usize) -> Result<SurfaceMesh> {
    match geometry {
        Geometry::Disk { radius } => generate_disk(radius, resolution),
        Geometry::Annulus { r, big_r } => generate_annulus(r, big_r, resolution),
        Geometry::Cylinder { half_length } => generate_cylinder(half_length, resolution),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rung {
    pub resolution: usize,
    pub vertices: usize,
    /// Longest edge.
    pub h: f64,
    pub sigmas: Vec<f64>,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub geometry: Geometry,
    pub exact: Vec<f64>,
    pub rungs: Vec<Rung>,
    /// Least-squares slope of `log error` against `log h`, per eigenvalue;
    /// `None` when the error is exact on some rung.
    pub rates: Vec<Option<f64>>,
}

impl ConvergenceTable {
    /// Eigenvalue indices (0-based) whose rate is below [`MIN_RATE`].
    pub fn slow(&self) -> Vec<usize> {
        self.rates
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_some_and(|r| r < MIN_RATE))
            .map(|(i, _)| i)
            .collect()
    }

    /// Smallest rate over eigenvalues that have one.
    pub fn min_rate(&self) -> Option<f64> {
        self.rates.iter().flatten().copied().reduce(f64::min)
    }

    /// CSV with one row per rung and eigenvalue, then a `rate` row per eigenvalue.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("resolution,vertices,h,k,sigma,exact,error\n");
        for rung in &self.rungs {
            for (i, (sig, err)) in rung.sigmas.iter().zip(&rung.errors).enumerate() {
                s.push_str(&format!(
                    "{},{},{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
                    rung.resolution,
                    rung.vertices,
                    rung.h,
                    i + 1,
                    sig,
                    self.exact[i],
                    err
                ));
            }
        }
        s.push_str("\nk,rate,flag\n");
        for (i, r) in self.rates.iter().enumerate() {
            match r {
                Some(r) => {
                    let flag = if *r < MIN_RATE { "slow" } else { "ok" };
                    s.push_str(&format!("{},{:.16e},{flag}\n", i + 1, r));
                }
                None => s.push_str(&format!("{},,exact\n", i + 1)),
            }
        }
        s
    }
}

/// Slope of the least-squares line through `(x, y)`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn convergence_study(geometry: Geometry, ladder: &[usize], k: usize) -> Result<ConvergenceTable> {
    if ladder.len() < 2 || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "resolution ladder {ladder:?} must have at least two strictly increasing rungs"
        )));
    }
    let exact = model_for(geometry, k)?.sigmas();
    let mut rungs = Vec::new();
    for &res in ladder {
        let mesh = generate(geometry, res)?;
        let pairs = steklov_spectrum(&mesh, k)?;
        let sigmas: Vec<f64> = pairs.iter().map(|p| p.sigma).collect();
        let errors = sigmas.iter().zip(&exact).map(|(s, e)| (s - e).abs()).collect();
        rungs.push(Rung {
            resolution: res,
            vertices: mesh.num_nodes(),
            h: mesh.max_edge_length(),
            sigmas,
            errors,
        });
    }
    let log_h: Vec<f64> = rungs.iter().map(|r| r.h.ln()).collect();
    let rates = (0..k)
        .map(|i| {
            let errs: Vec<f64> = rungs.iter().map(|r| r.errors[i]).collect();
            if errs.iter().any(|&e| e < EXACT_ERROR) {
                return None;
            }
            let log_e: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
            Some(regression_slope(&log_h, &log_e))
        })
        .collect();
    Ok(ConvergenceTable {
        geometry,
        exact,
        rungs,
        rates,
    })
}
