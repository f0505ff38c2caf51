//! Generators for the model geometries: disk, planar annulus and flat cylinder.

use std::f64::consts::PI;

use super::{signed_area, Metric, SurfaceMesh};
use crate::error::{Error, Result};

/// Smallest accepted number of samples around any boundary circle.
pub const MIN_ANGULAR_SAMPLES: usize = 8;

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < MIN_ANGULAR_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} is below the minimum of {MIN_ANGULAR_SAMPLES} angular samples"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

fn orient(vertices: &[[f64; 2]], triangles: &mut [[usize; 3]]) {
    for t in triangles.iter_mut() {
        if signed_area(vertices, t) < 0.0 {
            t.swap(1, 2);
        }
    }
}

/// Disk of the given radius centred at the origin.
///
/// Concentric rings `j = 1..=m` carry `6j` equally spaced vertices, so the
/// boundary has `6m` samples where `m = ceil(resolution / 6)`. The mesh is
/// invariant under rotation by `π/3`.
pub fn generate_disk(radius: f64, resolution: usize) -> Result<SurfaceMesh> {
    check_positive("radius", radius)?;
    check_resolution(resolution)?;
    let rings = resolution.div_ceil(6);
    let mut vertices = vec![[0.0, 0.0]];
    let offset = |j: usize| 1 + 3 * j * (j - 1);
    for j in 1..=rings {
        let count = 6 * j;
        let rj = radius * j as f64 / rings as f64;
        for i in 0..count {
            let a = 2.0 * PI * i as f64 / count as f64;
            vertices.push([rj * a.cos(), rj * a.sin()]);
        }
    }
    let mut triangles = Vec::new();
    for i in 0..6 {
        triangles.push([0, 1 + i, 1 + (i + 1) % 6]);
    }
    for j in 2..=rings {
        let ni = 6 * (j - 1);
        let no = 6 * j;
        let (oi, oo) = (offset(j - 1), offset(j));
        let (mut a, mut b) = (0usize, 0usize);
        while a < ni || b < no {
            // Advance along the outer ring when its next vertex comes first in angle.
            let outer_first = a == ni || (b < no && (b + 1) * ni <= (a + 1) * no);
            if outer_first {
                triangles.push([oi + a % ni, oo + b % no, oo + (b + 1) % no]);
                b += 1;
            } else {
                triangles.push([oi + a % ni, oo + b % no, oi + (a + 1) % ni]);
                a += 1;
            }
        }
    }
    orient(&vertices, &mut triangles);
    SurfaceMesh::new(vertices, triangles)
}

/// Planar annulus `r < |x| < R` with `resolution` vertices per ring.
///
/// Ring radii are geometric and alternate rings are rotated by half a step,
/// which makes the triangles images of near-equilateral triangles under the
/// conformal map `exp`. The mesh is invariant under rotation by `2π / resolution`.
pub fn generate_annulus(r: f64, big_r: f64, resolution: usize) -> Result<SurfaceMesh> {
    check_positive("inner radius", r)?;
    check_positive("outer radius", big_r)?;
    if r >= big_r {
        return Err(Error::InvalidParameter(format!(
            "inner radius {r} must be smaller than outer radius {big_r}"
        )));
    }
    check_resolution(resolution)?;
    let n = resolution;
    let step = 2.0 * PI / n as f64;
    let log_ratio = (big_r / r).ln();
    let intervals = ((log_ratio / (step * 3f64.sqrt() / 2.0)).round() as usize).max(2);
    let mut vertices = Vec::with_capacity(n * (intervals + 1));
    for j in 0..=intervals {
        let s = r * (log_ratio * j as f64 / intervals as f64).exp();
        let s = if j == intervals { big_r } else { s };
        let shift = if j % 2 == 0 { 0.0 } else { 0.5 };
        for i in 0..n {
            let a = (i as f64 + shift) * step;
            vertices.push([s * a.cos(), s * a.sin()]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * intervals);
    for j in 0..intervals {
        let lo = |i: usize| j * n + i % n;
        let hi = |i: usize| (j + 1) * n + i % n;
        for i in 0..n {
            if j % 2 == 0 {
                triangles.push([lo(i), lo(i + 1), hi(i)]);
                triangles.push([lo(i + 1), hi(i + 1), hi(i)]);
            } else {
                triangles.push([lo(i), hi(i + 1), hi(i)]);
                triangles.push([lo(i), lo(i + 1), hi(i + 1)]);
            }
        }
    }
    orient(&vertices, &mut triangles);
    SurfaceMesh::new(vertices, triangles)
}

/// Flat cylinder `S¹ × [-T, T]` meshed as the rectangle `[0, 2π] × [-T, T]`
/// with the columns `θ = 0` and `θ = 2π` identified.
///
/// `resolution` is the number of samples in `θ`; the number of `z` intervals is
/// chosen so the cells are close to square (at least two). Coordinates are
/// `(θ, z)` and the metric is the identity.
pub fn generate_cylinder(half_length: f64, resolution: usize) -> Result<SurfaceMesh> {
    check_positive("half length T", half_length)?;
    check_resolution(resolution)?;
    let n = resolution;
    let step = 2.0 * PI / n as f64;
    let rows = ((2.0 * half_length / step).round() as usize).max(2);
    let stride = n + 1;
    let mut vertices = Vec::with_capacity(stride * (rows + 1));
    for j in 0..=rows {
        let z = -half_length + 2.0 * half_length * j as f64 / rows as f64;
        let z = if j == rows { half_length } else { z };
        for i in 0..=n {
            let theta = if i == n { 2.0 * PI } else { i as f64 * step };
            vertices.push([theta, z]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * rows);
    for j in 0..rows {
        for i in 0..n {
            let a = j * stride + i;
            let b = a + 1;
            let c = b + stride;
            let d = a + stride;
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let identifications = (0..=rows).map(|j| [j * stride + n, j * stride]).collect();
    let nt = triangles.len();
    SurfaceMesh::with_all(
        vertices,
        triangles,
        vec![Metric::IDENTITY; nt],
        identifications,
        None,
    )
}
