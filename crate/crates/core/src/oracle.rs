//! Closed-form Steklov eigenpairs of the disk, the planar annulus and the flat
//! cylinder, together with their critical points.
//!
//! Nothing here touches the finite element code: eigenvalues come from
//! explicit formulas (a quadratic per angular frequency on the annulus), so
//! the module can serve as ground truth for it.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::identity::{ec_from_counts, Check};

/// Relative gap below which closed-form eigenvalues are one cluster.
pub const ORACLE_CLUSTER_TOL: f64 = 1e-12;

pub const ORACLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Disk { radius: f64 },
    Annulus { r: f64, big_r: f64 },
    Cylinder { half_length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Angular {
    One,
    Cos(u32),
    Sin(u32),
}

impl Angular {
    fn eval(self, theta: f64) -> (f64, f64) {
        match self {
            Angular::One => (1.0, 0.0),
            Angular::Cos(m) => {
                let m = f64::from(m);
                ((m * theta).cos(), -m * (m * theta).sin())
            }
            Angular::Sin(m) => {
                let m = f64::from(m);
                ((m * theta).sin(), m * (m * theta).cos())
            }
        }
    }

    fn order(self) -> (u32, u8) {
        match self {
            Angular::One => (0, 0),
            Angular::Cos(m) => (m, 0),
            Angular::Sin(m) => (m, 1),
        }
    }
}

/// Factor depending on the radius (planar domains) or on `z` (cylinder).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `a s^m + b s^{-m}`, or `a + b log s` when `m = 0`.
    Radial { m: u32, a: f64, b: f64 },
    Constant,
    /// `z`
    Linear,
    /// `cosh(m z)`
    Cosh { m: u32 },
    /// `sinh(m z)`
    Sinh { m: u32 },
}

impl Profile {
    fn eval(self, s: f64) -> (f64, f64) {
        match self {
            Profile::Radial { m: 0, a, b } => (a + b * s.ln(), b / s),
            Profile::Radial { m, a, b } => {
                let mi = m as i32;
                let mf = f64::from(m);
                (
                    a * s.powi(mi) + b * s.powi(-mi),
                    mf * (a * s.powi(mi - 1) - b * s.powi(-mi - 1)),
                )
            }
            Profile::Constant => (1.0, 0.0),
            Profile::Linear => (s, 1.0),
            Profile::Cosh { m } => {
                let m = f64::from(m);
                ((m * s).cosh(), m * (m * s).sinh())
            }
            Profile::Sinh { m } => {
                let m = f64::from(m);
                ((m * s).sinh(), m * (m * s).cosh())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticMode {
    pub sigma: f64,
    pub multiplicity: usize,
    pub angular: Angular,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticModel {
    pub geometry: Geometry,
    pub modes: Vec<AnalyticMode>,
}

impl Geometry {
    /// Value and gradient of `profile · angular` at a point in mesh
    /// coordinates (`(x, y)` for planar domains, `(θ, z)` for the cylinder).
    fn eval(self, mode: &AnalyticMode, p: [f64; 2]) -> (f64, [f64; 2]) {
        match self {
            Geometry::Cylinder { .. } => {
                let (g, dg) = mode.angular.eval(p[0]);
                let (h, dh) = mode.profile.eval(p[1]);
                (h * g, [h * dg, dh * g])
            }
            _ => {
                let s = p[0].hypot(p[1]);
                let theta = p[1].atan2(p[0]);
                let (g, dg) = mode.angular.eval(theta);
                let (f, df) = mode.profile.eval(s);
                let (c, sn) = (theta.cos(), theta.sin());
                let ds = df * g;
                // at the origin only constant and linear disk modes are smooth
                let dt = if s > 0.0 { f * dg / s } else { 0.0 };
                (f * g, [ds * c - dt * sn, ds * sn + dt * c])
            }
        }
    }

    /// `n` points per boundary circle with their outward unit normals.
    pub fn boundary_samples(self, n: usize) -> Vec<([f64; 2], [f64; 2])> {
        let angles = (0..n).map(move |i| 2.0 * PI * (i as f64 + 0.37) / n as f64);
        match self {
            Geometry::Disk { radius } => angles
                .map(|t| ([radius * t.cos(), radius * t.sin()], [t.cos(), t.sin()]))
                .collect(),
            Geometry::Annulus { r, big_r } => {
                let outer = angles
                    .clone()
                    .map(|t| ([big_r * t.cos(), big_r * t.sin()], [t.cos(), t.sin()]));
                let inner = angles.map(|t| ([r * t.cos(), r * t.sin()], [-t.cos(), -t.sin()]));
                outer.chain(inner).collect()
            }
            Geometry::Cylinder { half_length } => {
                let top = angles.clone().map(|t| ([t, half_length], [0.0, 1.0]));
                let bottom = angles.map(|t| ([t, -half_length], [0.0, -1.0]));
                top.chain(bottom).collect()
            }
        }
    }
}

impl AnalyticModel {
    pub fn value(&self, mode: usize, p: [f64; 2]) -> f64 {
        self.geometry.eval(&self.modes[mode], p).0
    }

    pub fn gradient(&self, mode: usize, p: [f64; 2]) -> [f64; 2] {
        self.geometry.eval(&self.modes[mode], p).1
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.sigma).collect()
    }

    /// `max |∂ν u − σ u| / max |u|` over `n` samples per boundary circle.
    pub fn steklov_residual(&self, mode: usize, n: usize) -> f64 {
        let m = &self.modes[mode];
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        for (p, nu) in self.geometry.boundary_samples(n) {
            let (u, g) = self.geometry.eval(m, p);
            worst = worst.max((g[0] * nu[0] + g[1] * nu[1] - m.sigma * u).abs());
            scale = scale.max(u.abs());
        }
        worst / scale
    }
}

fn finish(geometry: Geometry, mut modes: Vec<AnalyticMode>, k: usize) -> Result<AnalyticModel> {
    if k == 0 {
        return Err(Error::InvalidParameter("number of modes must be at least 1".into()));
    }
    modes.sort_by(|a, b| {
        a.sigma
            .total_cmp(&b.sigma)
            .then(a.angular.order().cmp(&b.angular.order()))
    });
    modes.truncate(k);
    let mut start = 0;
    for i in 1..=modes.len() {
        let split = i == modes.len()
            || modes[i].sigma - modes[i - 1].sigma > ORACLE_CLUSTER_TOL * (1.0 + modes[i].sigma);
        if split {
            for mode in &mut modes[start..i] {
                mode.multiplicity = i - start;
            }
            start = i;
        }
    }
    Ok(AnalyticModel { geometry, modes })
}

fn check_positive(what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive and finite, got {x}")))
    }
}

fn pair(sigma: f64, m: u32, profile: Profile) -> [AnalyticMode; 2] {
    let mode = |angular| AnalyticMode {
        sigma,
        multiplicity: 0,
        angular,
        profile,
    };
    [mode(Angular::Cos(m)), mode(Angular::Sin(m))]
}

/// `1, s^m cos mθ, s^m sin mθ` with `σ = m / radius`; the first `k` sorted.
/// Multiplicities count within the first `k`.
pub fn disk_modes_with_radius(radius: f64, k: usize) -> Result<AnalyticModel> {
    check_positive("radius", radius)?;
    let mut modes = vec![AnalyticMode {
        sigma: 0.0,
        multiplicity: 0,
        angular: Angular::One,
        profile: Profile::Radial { m: 0, a: 1.0, b: 0.0 },
    }];
    for m in 1..=(k as u32 + 4) {
        let a = radius.powi(-(m as i32));
        modes.extend(pair(f64::from(m) / radius, m, Profile::Radial { m, a, b: 0.0 }));
    }
    finish(Geometry::Disk { radius }, modes, k)
}

pub fn disk_modes(k: usize) -> Result<AnalyticModel> {
    disk_modes_with_radius(1.0, k)
}

/// Roots of `det(A − σB) = 0` for 2×2 matrices, ascending.
fn quadratic_pencil(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [f64; 2] {
    let c2 = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let c1 = -(a[0][0] * b[1][1] + a[1][1] * b[0][0] - a[0][1] * b[1][0] - a[1][0] * b[0][1]);
    let c0 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (c1 * c1 - 4.0 * c2 * c0).max(0.0);
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let (x, y) = if q == 0.0 { (0.0, 0.0) } else { (q / c2, c0 / q) };
    [x.min(y), x.max(y)]
}

/// Null vector of `A − σB`, normalized with a nonnegative first entry.
fn pencil_vector(a: [[f64; 2]; 2], b: [[f64; 2]; 2], sigma: f64) -> (f64, f64) {
    let m = |i: usize, j: usize| a[i][j] - sigma * b[i][j];
    let row = if m(0, 0).hypot(m(0, 1)) >= m(1, 0).hypot(m(1, 1)) { 0 } else { 1 };
    let (mut x, mut y) = (-m(row, 1), m(row, 0));
    if x == 0.0 && y == 0.0 {
        (x, y) = (1.0, 0.0);
    }
    let n = x.hypot(y);
    let s = if x < 0.0 || (x == 0.0 && y < 0.0) { -1.0 } else { 1.0 };
    (s * x / n, s * y / n)
}

/// The two Steklov modes of frequency `m` on the annulus `r < s < R`,
/// ascending in `σ`, as `(σ, a, b)`.
pub fn annulus_frequency(r: f64, big_r: f64, m: u32) -> [(f64, f64, f64); 2] {
    // ∂_s at s = R and −∂_s at s = r, applied to the two basis profiles
    let (a, b) = if m == 0 {
        (
            [[0.0, 1.0 / big_r], [0.0, -1.0 / r]],
            [[1.0, big_r.ln()], [1.0, r.ln()]],
        )
    } else {
        let mi = m as i32;
        let mf = f64::from(m);
        (
            [
                [mf * big_r.powi(mi - 1), -mf * big_r.powi(-mi - 1)],
                [-mf * r.powi(mi - 1), mf * r.powi(-mi - 1)],
            ],
            [[big_r.powi(mi), big_r.powi(-mi)], [r.powi(mi), r.powi(-mi)]],
        )
    };
    let roots = quadratic_pencil(a, b);
    roots.map(|s| {
        let (x, y) = pencil_vector(a, b, s);
        (s, x, y)
    })
}

pub fn annulus_modes(r: f64, big_r: f64, k: usize) -> Result<AnalyticModel> {
    check_positive("inner radius r", r)?;
    check_positive("outer radius R", big_r)?;
    if r >= big_r {
        return Err(Error::InvalidParameter(format!("inner radius {r} must be below outer radius {big_r}")));
    }
    let mut modes = Vec::new();
    for (i, (sigma, a, b)) in annulus_frequency(r, big_r, 0).into_iter().enumerate() {
        let (sigma, a, b) = if i == 0 { (0.0, 1.0, 0.0) } else { (sigma, a, b) };
        modes.push(AnalyticMode {
            sigma,
            multiplicity: 0,
            angular: Angular::One,
            profile: Profile::Radial { m: 0, a, b },
        });
    }
    for m in 1..=(k as u32 + 4) {
        for (sigma, a, b) in annulus_frequency(r, big_r, m) {
            modes.extend(pair(sigma, m, Profile::Radial { m, a, b }));
        }
    }
    finish(Geometry::Annulus { r, big_r }, modes, k)
}

/// Modes of `S¹ × [−T, T]`: `1`, `z`, `cosh(mz)·(cos, sin)(mθ)` with
/// `σ = m tanh(mT)` and `sinh(mz)·(cos, sin)(mθ)` with `σ = m coth(mT)`.
pub fn cylinder_modes(half_length: f64, k: usize) -> Result<AnalyticModel> {
    check_positive("half length T", half_length)?;
    let t = half_length;
    let single = |sigma, profile| AnalyticMode {
        sigma,
        multiplicity: 0,
        angular: Angular::One,
        profile,
    };
    let mut modes = vec![single(0.0, Profile::Constant), single(1.0 / t, Profile::Linear)];
    for m in 1..=(k as u32 + 4) {
        let mf = f64::from(m);
        modes.extend(pair(mf * (mf * t).tanh(), m, Profile::Cosh { m }));
        modes.extend(pair(mf / (mf * t).tanh(), m, Profile::Sinh { m }));
    }
    finish(Geometry::Cylinder { half_length }, modes, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TStar {
    pub value: f64,
    /// `T* tanh T* − 1`
    pub residual: f64,
    /// `sinh T* − cosh T* / T*`
    pub sinh_identity: f64,
}

/// Unique positive root of `T tanh T = 1`, by bisection on `[0.5, 2]`.
pub fn tstar() -> TStar {
    let f = |t: f64| t * t.tanh() - 1.0;
    let (mut lo, mut hi) = (0.5f64, 2.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    TStar {
        value: t,
        residual: f(t),
        sinh_identity: t.sinh() - t.cosh() / t,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleCriticalKind {
    InteriorSaddle,
    /// Gradient vanishes on the boundary where `u = 0`.
    BoundarySingularZero,
    /// Gradient vanishes on the boundary where `u ≠ 0`.
    BoundaryCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCriticalPoint {
    /// Mesh coordinates: `(x, y)` or `(θ, z)`.
    pub position: [f64; 2],
    pub kind: OracleCriticalKind,
    pub value: f64,
}

/// Saddles of `(a s + b/s) cos(θ − φ)` on the annulus. They sit on the line
/// through the origin at angle `φ`, at radius `√(b/a)` when that lies in `(r, R)`.
pub fn annulus_second_mode_saddles(r: f64, big_r: f64, phase: f64) -> Vec<OracleCriticalPoint> {
    let (_, a, b) = annulus_frequency(r, big_r, 1)[0];
    if a == 0.0 || b / a <= r * r || b / a >= big_r * big_r {
        return Vec::new();
    }
    let s = (b / a).sqrt();
    [phase, phase + PI]
        .iter()
        .map(|&t| OracleCriticalPoint {
            position: [s * t.cos(), s * t.sin()],
            kind: OracleCriticalKind::InteriorSaddle,
            value: (a * s + b / s) * (t - phase).cos(),
        })
        .collect()
}

/// Critical points of `cosh z cos θ + c z` on `S¹ × [−T, T]`, with `θ` in `[0, 2π)`.
///
/// `∂_θ u = −cosh z sin θ` forces `θ ∈ {0, π}`, then `∂_z u = 0` gives
/// `sinh z = −c` at `θ = 0` and `sinh z = c` at `θ = π`.
pub fn cylinder_critical_points(half_length: f64, c: f64) -> Vec<OracleCriticalPoint> {
    let t = half_length;
    let mut out = Vec::new();
    for (theta, z) in [(0.0, (-c).asinh()), (PI, c.asinh())] {
        let value = z.cosh() * theta.cos() + c * z;
        // compare in the sinh scale so that |c| = sinh T lands on the boundary
        let gap = (c.abs() - t.sinh()) / t.sinh();
        let kind = if gap < -1e-12 {
            OracleCriticalKind::InteriorSaddle
        } else if gap <= 1e-12 {
            if value.abs() <= 1e-12 * t.cosh() {
                OracleCriticalKind::BoundarySingularZero
            } else {
                OracleCriticalKind::BoundaryCritical
            }
        } else {
            continue;
        };
        let z = if kind == OracleCriticalKind::InteriorSaddle { z } else { t * z.signum() };
        let value = if kind == OracleCriticalKind::BoundarySingularZero { 0.0 } else { value };
        out.push(OracleCriticalPoint {
            position: [theta, z],
            kind,
            value,
        });
    }
    out
}

/// Critical points of `cosh z cos θ + c z` on the cylinder of half length `T*`.
pub fn cylinder_family_critical_points(c: f64) -> Vec<OracleCriticalPoint> {
    cylinder_critical_points(tstar().value, c)
}

/// `(Σ ℓ, singular zeros)` for the trace of `cosh z cos θ + c z` on `z = ±T`.
/// On each circle the trace is `cosh T cos θ ± cT`: it changes sign twice when
/// `|c| T < cosh T` and touches zero once when `|c| T = cosh T`.
pub fn cylinder_family_boundary_counts(half_length: f64, c: f64) -> (i64, usize) {
    let t = half_length;
    let rel = (c.abs() * t - t.cosh()) / t.cosh();
    if rel < -1e-12 {
        (2, 0)
    } else if rel <= 1e-12 {
        (0, 2)
    } else {
        (0, 0)
    }
}

/// Count identity on closed-form data for `cosh z cos θ + c z` on the
/// cylinder of half length `T*` (Euler characteristic 0).
pub fn cylinder_family_ec(c: f64) -> Check {
    let t = tstar().value;
    let interior = cylinder_critical_points(t, c)
        .iter()
        .filter(|p| p.kind == OracleCriticalKind::InteriorSaddle)
        .count() as i64;
    let (sum_ell, singular) = cylinder_family_boundary_counts(t, c);
    ec_from_counts(interior, sum_ell, 0, singular)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEigenvalue {
    pub k: usize,
    pub sigma: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyRegime {
    pub regime: &'static str,
    pub c: f64,
    pub critical_points: Vec<OracleCriticalPoint>,
    pub sum_ell: i64,
    pub singular_zeros: usize,
    pub ec: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyDump {
    pub tstar: TStar,
    pub threshold: f64,
    pub regimes: Vec<FamilyRegime>,
    /// The locations computed above differ from the commonly quoted
    /// `(π/2, ±T*)`, `(3π/2, ∓T*)`.
    pub quoted_locations: Vec<[f64; 2]>,
    pub location_discrepancy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleDump {
    pub version: u32,
    pub geometry: Geometry,
    pub eigenvalues: Vec<OracleEigenvalue>,
    /// Critical points of the second eigenfunction in its first listed form.
    pub second_mode_critical_points: Vec<OracleCriticalPoint>,
    pub family: Option<FamilyDump>,
}

/// Model for a geometry with its first `k` modes.
pub fn model_for(geometry: Geometry, k: usize) -> Result<AnalyticModel> {
    match geometry {
        Geometry::Disk { radius } => disk_modes_with_radius(radius, k),
        Geometry::Annulus { r, big_r } => annulus_modes(r, big_r, k),
        Geometry::Cylinder { half_length } => cylinder_modes(half_length, k),
    }
}

/// Critical points of the second mode of `model` rotated by `phase` within
/// its cluster (planar domains and the cosh branch of the cylinder).
pub fn second_mode_critical_points(model: &AnalyticModel, phase: f64) -> Vec<OracleCriticalPoint> {
    let Some(mode) = model.modes.get(1) else {
        return Vec::new();
    };
    match (model.geometry, mode.profile) {
        (Geometry::Annulus { r, big_r }, _) => annulus_second_mode_saddles(r, big_r, phase),
        (Geometry::Cylinder { half_length }, Profile::Cosh { .. }) => {
            cylinder_critical_points(half_length, 0.0)
                .into_iter()
                .map(|mut p| {
                    p.position[0] = (p.position[0] + phase).rem_euclid(2.0 * PI);
                    p
                })
                .collect()
        }
        _ => Vec::new(),
    }
}

pub fn oracle_dump(geometry: Geometry, k: usize) -> Result<OracleDump> {
    let model = model_for(geometry, k)?;
    let eigenvalues = model
        .modes
        .iter()
        .enumerate()
        .map(|(i, m)| OracleEigenvalue {
            k: i + 1,
            sigma: m.sigma,
            multiplicity: m.multiplicity,
        })
        .collect();
    let family = match geometry {
        Geometry::Cylinder { half_length } => {
            let ts = tstar();
            let near = (half_length - ts.value).abs() <= 1e-6 * ts.value;
            near.then(|| family_dump(ts))
        }
        _ => None,
    };
    Ok(OracleDump {
        version: ORACLE_FORMAT_VERSION,
        geometry,
        eigenvalues,
        second_mode_critical_points: second_mode_critical_points(&model, 0.0),
        family,
    })
}

fn family_dump(ts: TStar) -> FamilyDump {
    let t = ts.value;
    let threshold = t.cosh() / t;
    let regimes = [("below", 0.5 * threshold), ("at", threshold), ("above", 1.5 * threshold)]
        .into_iter()
        .map(|(regime, c)| {
            let (sum_ell, singular_zeros) = cylinder_family_boundary_counts(t, c);
            FamilyRegime {
                regime,
                c,
                critical_points: cylinder_critical_points(t, c),
                sum_ell,
                singular_zeros,
                ec: cylinder_family_ec(c),
            }
        })
        .collect::<Vec<_>>();
    let quoted_locations = vec![[PI / 2.0, t], [PI / 2.0, -t], [1.5 * PI, -t], [1.5 * PI, t]];
    let at = &regimes[1].critical_points;
    let location_discrepancy = at
        .iter()
        .any(|p| quoted_locations.iter().all(|q| (q[0] - p.position[0]).abs() > 1e-9));
    FamilyDump {
        tstar: ts,
        threshold,
        regimes,
        quoted_locations,
        location_discrepancy,
    }
}
