//! Integer index identities for harmonic fields and Steklov eigenfunctions.
//!
//! Each check compares two integers. Tolerances only enter through the
//! snapping rules of [`crate::critical`]; when an input violates the
//! hypotheses an identity needs, the verdict says so instead of failing.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::critical::{
    boundary_sign_changes, boundary_singular_zeros, boundary_trace_extrema,
    interior_critical_points_with, pl_index_sum_with, sup_norm, vertex_indices, BoundarySignData,
    CriticalPoint, TraceExtrema, VertexOrder,
};
use crate::error::{Error, Result};
use crate::mesh::{double_mesh, reflect_function, SurfaceMesh};
use crate::spectrum::{DtnOperator, SteklovEigenpair};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Eigenvalues at or below this are treated as the constant mode.
pub const SIGMA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    PassWithWarning,
    HypothesesNotMet,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub lhs: i64,
    pub rhs: i64,
    /// `lhs == rhs`.
    pub pass: bool,
    pub verdict: Verdict,
    pub margin_notes: Vec<String>,
}

impl Check {
    fn new(lhs: i64, rhs: i64) -> Self {
        let pass = lhs == rhs;
        Check {
            lhs,
            rhs,
            pass,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            margin_notes: Vec::new(),
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.margin_notes.push(note.into());
        self
    }

    fn hypotheses_not_met(mut self, why: impl Into<String>) -> Self {
        self.verdict = Verdict::HypothesesNotMet;
        self.margin_notes.push(why.into());
        self
    }

    /// Downgrades a pass to a pass with warning.
    fn warn(mut self, why: impl Into<String>) -> Self {
        if self.verdict == Verdict::Pass {
            self.verdict = Verdict::PassWithWarning;
        }
        self.margin_notes.push(why.into());
        self
    }
}

/// Everything the checks need about one field, computed once.
#[derive(Debug, Clone)]
pub struct FieldAnalysis {
    pub interior: Vec<CriticalPoint>,
    pub extrema: TraceExtrema,
    /// Sign data of `u` (its components form the negative set).
    pub negative: BoundarySignData,
    /// Sign data of `-u` (its components form the positive set).
    pub positive: BoundarySignData,
    pub singular_zeros: Vec<CriticalPoint>,
    pub chi_m: i64,
    pub boundary_count: usize,
    pub zero_tol: f64,
    /// Snapping threshold for trace values: `zero_tol · ‖trace‖∞`.
    pub trace_tol: f64,
    /// Constant trace value on every degenerate loop (by component).
    pub loop_values: BTreeMap<usize, f64>,
}

impl FieldAnalysis {
    pub fn interior_index_sum(&self) -> i64 {
        self.interior.iter().map(|c| c.index).sum()
    }

    fn zero_loops(&self) -> Vec<usize> {
        self.negative.degenerate_loops()
    }

    fn constant_loops(&self) -> Vec<(usize, f64)> {
        self.loop_values
            .iter()
            .filter(|(c, _)| !self.zero_loops().contains(c))
            .map(|(&c, &v)| (c, v))
            .collect()
    }

    /// `Σ index` over trace extrema selected by `select(node)`.
    fn boundary_term(&self, select: impl Fn(&CriticalPoint) -> bool) -> i64 {
        self.extrema.points.iter().filter(|p| select(p)).map(|p| p.index).sum()
    }

    fn snapped_extrema(&self) -> Vec<&CriticalPoint> {
        self.extrema
            .points
            .iter()
            .filter(|p| p.value.abs() <= self.trace_tol)
            .collect()
    }

    /// Applies the shared hypothesis rules to a check built on trace signs.
    fn sign_rules(&self, mut check: Check, singular_is_violation: bool) -> Check {
        let zero = self.zero_loops();
        if !zero.is_empty() {
            check = check.hypotheses_not_met(format!("trace vanishes on boundary loop(s) {zero:?}"));
        }
        for (c, v) in self.constant_loops() {
            check = check.note(format!(
                "trace is constant ({v:.6e}) on boundary loop {c}; the loop contributes 0"
            ));
        }
        if !self.singular_zeros.is_empty() {
            let nodes: Vec<usize> = self.singular_zeros.iter().map(|p| p.node).collect();
            let msg = format!("singular boundary zeros at nodes {nodes:?}, not counted as sign changes");
            check = if singular_is_violation {
                check.hypotheses_not_met(msg)
            } else {
                check.warn(msg)
            };
        }
        if self.negative.near_threshold() {
            check = check.warn(format!(
                "trace margin {:.3e} is within 10x the zero tolerance {:.1e}",
                self.negative.margin, self.zero_tol
            ));
        }
        check
    }
}

/// Interior critical points, trace extrema, sign data and singular zeros of `u`.
pub fn analyze(mesh: &SurfaceMesh, u: &[f64], zero_tol: f64) -> Result<FieldAnalysis> {
    mesh.check_field(u, "field values")?;
    if !mesh.has_boundary() {
        return Err(Error::ClosedMesh);
    }
    if !(zero_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("zero tolerance {zero_tol} must be positive")));
    }
    let order = VertexOrder::new(u, zero_tol);
    let interior = interior_critical_points_with(mesh, u, &order)?;
    let extrema = boundary_trace_extrema(mesh, u, zero_tol)?;
    let negative = boundary_sign_changes(mesh, u, zero_tol)?;
    let neg_u: Vec<f64> = u.iter().map(|x| -x).collect();
    let positive = boundary_sign_changes(mesh, &neg_u, zero_tol)?;
    let singular_zeros = boundary_singular_zeros(mesh, u, zero_tol)?;
    let trace_tol = zero_tol * sup_norm(mesh.boundary_nodes().iter().map(|&n| u[n]));
    let loop_values = extrema
        .degenerate_loops
        .iter()
        .map(|&c| (c, u[mesh.boundary_components()[c].nodes[0]]))
        .collect();
    Ok(FieldAnalysis {
        interior,
        extrema,
        negative,
        positive,
        singular_zeros,
        chi_m: mesh.euler_characteristic(),
        boundary_count: mesh.boundary_components().len(),
        zero_tol,
        trace_tol,
        loop_values,
    })
}

/// `Σ_interior ind = χ(M) − Σ ind` over trace extrema with negative conormal
/// flux. `flux` is `S · trace` in boundary traversal order.
pub fn verify_e0(mesh: &SurfaceMesh, u: &[f64], flux: &[f64], zero_tol: f64) -> Result<Check> {
    let a = analyze(mesh, u, zero_tol)?;
    verify_e0_with(mesh, &a, flux)
}

fn flux_by_node(mesh: &SurfaceMesh, flux: &[f64]) -> Result<Vec<f64>> {
    let boundary = mesh.boundary_nodes();
    if flux.len() != boundary.len() {
        return Err(Error::SizeMismatch {
            what: "boundary flux",
            expected: boundary.len(),
            found: flux.len(),
        });
    }
    let mut by_node = vec![f64::NAN; mesh.num_nodes()];
    for (&n, &f) in boundary.iter().zip(flux) {
        by_node[n] = f;
    }
    Ok(by_node)
}

pub fn verify_e0_with(mesh: &SurfaceMesh, a: &FieldAnalysis, flux: &[f64]) -> Result<Check> {
    let by_node = flux_by_node(mesh, flux)?;
    let flux_tol = a.zero_tol * sup_norm(flux.iter().copied());
    let term = a.boundary_term(|p| by_node[p.node] < -flux_tol);
    let mut check = Check::new(a.interior_index_sum(), a.chi_m - term);
    let zero = a.zero_loops();
    if !zero.is_empty() {
        check = check.hypotheses_not_met(format!("trace vanishes on boundary loop(s) {zero:?}"));
    }
    for (c, v) in a.constant_loops() {
        check = check.note(format!(
            "trace is constant ({v:.6e}) on boundary loop {c}; the loop contributes 0"
        ));
    }
    let flat: Vec<usize> = a
        .extrema
        .points
        .iter()
        .filter(|p| by_node[p.node].abs() <= flux_tol)
        .map(|p| p.node)
        .collect();
    if !flat.is_empty() {
        check = check.hypotheses_not_met(format!(
            "gradient vanishes on the boundary: trace extrema with zero flux at nodes {flat:?}"
        ));
    }
    if !a.singular_zeros.is_empty() {
        let nodes: Vec<usize> = a.singular_zeros.iter().map(|p| p.node).collect();
        check = check.hypotheses_not_met(format!("singular boundary zeros at nodes {nodes:?}"));
    }
    Ok(check)
}

/// Checks for `E2_1` (trace extrema with negative value), `E2_2` (negative
/// set) and `E2_4` (sign-change pairs), keyed by name.
pub fn verify_e2(
    mesh: &SurfaceMesh,
    pair: &SteklovEigenpair,
    zero_tol: f64,
    residual_tol: f64,
) -> Result<BTreeMap<String, Check>> {
    let a = analyze(mesh, &pair.u, zero_tol)?;
    Ok(verify_e2_with(&a, pair, residual_tol))
}

fn eigenpair_hypotheses(mut check: Check, pair: &SteklovEigenpair, residual_tol: f64) -> Check {
    if pair.sigma <= SIGMA_FLOOR {
        check = check.hypotheses_not_met(format!(
            "eigenvalue {:.3e} is the constant mode",
            pair.sigma
        ));
    }
    if !(pair.residual <= residual_tol) {
        check = check.hypotheses_not_met(format!(
            "eigenpair residual {:.3e} exceeds {:.1e}",
            pair.residual, residual_tol
        ));
    }
    check
}

pub fn verify_e2_with(
    a: &FieldAnalysis,
    pair: &SteklovEigenpair,
    residual_tol: f64,
) -> BTreeMap<String, Check> {
    let lhs = a.interior_index_sum();
    let tol = a.trace_tol;

    let term = a.boundary_term(|p| p.value < -tol);
    let mut e21 = a.sign_rules(Check::new(lhs, a.chi_m - term), true);
    let snapped: Vec<usize> = a.snapped_extrema().iter().map(|p| p.node).collect();
    if !snapped.is_empty() {
        e21 = e21.hypotheses_not_met(format!("trace extrema with zero value at nodes {snapped:?}"));
    }

    let mut e22 = a.sign_rules(Check::new(lhs, a.chi_m - a.negative.chi), false);
    let arcs = a
        .negative
        .components
        .iter()
        .filter(|c| c.kind == crate::critical::SetComponentKind::Arc)
        .count() as i64;
    if arcs != a.negative.chi || arcs != a.negative.sum_ell {
        e22.verdict = Verdict::Fail;
        e22 = e22.note(format!(
            "negative set inconsistent: chi {}, arcs {arcs}, sum of sign-change pairs {}",
            a.negative.chi, a.negative.sum_ell
        ));
    }
    let e24 = a.sign_rules(Check::new(lhs, a.chi_m - a.negative.sum_ell), false);

    let mut out = BTreeMap::new();
    out.insert("E2_1".to_string(), eigenpair_hypotheses(e21, pair, residual_tol));
    out.insert("E2_2".to_string(), eigenpair_hypotheses(e22, pair, residual_tol));
    out.insert("E2_4".to_string(), eigenpair_hypotheses(e24, pair, residual_tol));
    out
}

/// `#interior critical points = #negative trace minima − #negative trace maxima − χ(M)`,
/// which needs every interior critical point to be a simple saddle.
pub fn verify_corollary_count(mesh: &SurfaceMesh, pair: &SteklovEigenpair, zero_tol: f64) -> Result<Check> {
    let a = analyze(mesh, &pair.u, zero_tol)?;
    Ok(verify_corollary_with(&a))
}

fn negative_extrema_counts(a: &FieldAnalysis) -> (i64, i64) {
    let neg = a.extrema.points.iter().filter(|p| p.value < -a.trace_tol);
    neg.fold((0, 0), |(mn, mx), p| if p.index == 1 { (mn + 1, mx) } else { (mn, mx + 1) })
}

pub fn verify_corollary_with(a: &FieldAnalysis) -> Check {
    let (min_neg, max_neg) = negative_extrema_counts(a);
    let count = a.interior.len() as i64;
    let mut check = a.sign_rules(Check::new(count, min_neg - max_neg - a.chi_m), true);
    let bad: Vec<usize> = a.interior.iter().filter(|p| p.index != -1).map(|p| p.node).collect();
    if !bad.is_empty() {
        check = check.hypotheses_not_met(format!("interior critical points that are not simple saddles at nodes {bad:?}"));
    }
    let snapped: Vec<usize> = a.snapped_extrema().iter().map(|p| p.node).collect();
    if !snapped.is_empty() {
        check = check.hypotheses_not_met(format!("trace extrema with zero value at nodes {snapped:?}"));
    }
    check
}

/// Count identity for second eigenfunctions on genus-zero surfaces:
/// `#interior critical points = Σ ℓ_j − χ(M)`.
pub fn verify_ec(mesh: &SurfaceMesh, pair: &SteklovEigenpair, second: bool, zero_tol: f64) -> Result<Check> {
    let a = analyze(mesh, &pair.u, zero_tol)?;
    Ok(verify_ec_with(&a, second))
}

pub fn verify_ec_with(a: &FieldAnalysis, second: bool) -> Check {
    let mut check = a.sign_rules(
        Check::new(a.interior.len() as i64, a.negative.sum_ell - a.chi_m),
        false,
    );
    if !second {
        check = check.hypotheses_not_met("the count identity applies to second eigenfunctions only");
    }
    let genus_zero = a.chi_m == 2 - a.boundary_count as i64;
    if !genus_zero {
        check = check.hypotheses_not_met(format!(
            "surface is not genus zero (chi {}, {} boundary loops)",
            a.chi_m, a.boundary_count
        ));
    }
    check
}

/// Count identity from integer data, for fields known in closed form.
pub fn ec_from_counts(interior_count: i64, sum_ell: i64, chi_m: i64, singular_zeros: usize) -> Check {
    let check = Check::new(interior_count, sum_ell - chi_m);
    if singular_zeros > 0 {
        check.warn(format!("{singular_zeros} singular boundary zeros, not counted as sign changes"))
    } else {
        check
    }
}

/// `Σ_interior ind = χ(M) − χ(Q)` with `Q = {u > 0}` on the boundary, together
/// with `χ(Q) = χ(P)`.
pub fn verify_morse_theorem(mesh: &SurfaceMesh, u: &[f64], zero_tol: f64) -> Result<Check> {
    let a = analyze(mesh, u, zero_tol)?;
    Ok(verify_morse_with(&a))
}

pub fn verify_morse_with(a: &FieldAnalysis) -> Check {
    let chi_q = a.positive.chi;
    let mut check = a.sign_rules(Check::new(a.interior_index_sum(), a.chi_m - chi_q), false);
    if chi_q != a.negative.chi {
        check.verdict = Verdict::Fail;
        check = check.note(format!(
            "chi of the positive set {chi_q} differs from chi of the negative set {}",
            a.negative.chi
        ));
    }
    check
}

/// Index sum of the even reflection on the double, split into the glued
/// boundary (collar) and the two copies of the interior (bulk).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoubleDecomposition {
    pub total: i64,
    pub bulk: i64,
    pub collar: i64,
    pub chi_double: i64,
}

pub fn verify_double_ph(mesh: &SurfaceMesh, u: &[f64], zero_tol: f64) -> Result<(Check, Option<DoubleDecomposition>)> {
    mesh.check_field(u, "field values")?;
    let scale = sup_norm(u.iter().copied());
    let (lo, hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if hi - lo <= zero_tol * scale {
        let check = Check::new(0, 0).hypotheses_not_met("field is constant; every boundary loop is degenerate");
        return Ok((check, None));
    }
    let double = double_mesh(mesh)?;
    let ur = reflect_function(mesh, &double, u)?;
    let key: Vec<usize> = double
        .source_node
        .iter()
        .zip(&double.mirrored)
        .map(|(&s, &m)| 2 * s + usize::from(m))
        .collect();
    let order = VertexOrder::with_tie_key(&ur, zero_tol, &key);
    let total = pl_index_sum_with(&double.mesh, &order)?;
    let idx = vertex_indices(&double.mesh, &order);
    let collar: i64 = (0..idx.len()).filter(|&n| double.on_seam[n]).map(|n| idx[n]).sum();
    let bulk = total - collar;
    let interior_sum: i64 = interior_critical_points_with(mesh, u, &VertexOrder::new(u, zero_tol))?
        .iter()
        .map(|c| c.index)
        .sum();
    let chi_double = double.mesh.euler_characteristic();
    let mut check = Check::new(total, chi_double).note(format!(
        "bulk {bulk}, collar {collar}, interior index sum {interior_sum}"
    ));
    if bulk != 2 * interior_sum {
        check.verdict = Verdict::Fail;
        check = check.note("bulk contribution differs from twice the interior index sum");
    }
    Ok((
        check,
        Some(DoubleDecomposition {
            total,
            bulk,
            collar,
            chi_double,
        }),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub mesh_id: String,
    pub eigenpair_index: usize,
    pub sigma: f64,
    pub multiplicity: usize,
    pub residual: f64,
    pub zero_tol: f64,
    pub residual_tol: f64,
    /// Smallest unsnapped `|u| / ‖trace‖∞` on the boundary.
    pub trace_margin: f64,
    pub singular_zero_warnings: Vec<String>,
    /// Boundary nodes (above tolerance) where the flux sign disagrees with `σ · trace`.
    pub flux_sign_mismatches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub version: u32,
    pub interior_index_sum: i64,
    #[serde(rename = "chi_M")]
    pub chi_m: i64,
    pub chi_bd: i64,
    #[serde(rename = "chi_P")]
    pub chi_p: i64,
    #[serde(rename = "chi_Q")]
    pub chi_q: i64,
    #[serde(rename = "boundary_term_E0")]
    pub boundary_term_e0: i64,
    #[serde(rename = "boundary_term_E2")]
    pub boundary_term_e2: i64,
    pub sum_ell: i64,
    #[serde(rename = "L")]
    pub l: usize,
    pub count_min_neg: i64,
    pub count_max_neg: i64,
    pub interior_critical_count: i64,
    pub double: Option<DoubleDecomposition>,
    pub checks: BTreeMap<String, Check>,
    pub provenance: Provenance,
}

impl IdentityReport {
    /// Most severe verdict over all checks.
    pub fn worst(&self) -> Verdict {
        self.checks.values().map(|c| c.verdict).max().unwrap_or(Verdict::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub zero_tol: f64,
    pub residual_tol: f64,
    pub mesh_id: String,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            zero_tol: crate::critical::DEFAULT_ZERO_TOL,
            residual_tol: 1e-8,
            mesh_id: String::new(),
        }
    }
}

/// Full report for one eigenpair. `second` marks members of the cluster of
/// the second eigenvalue.
pub fn build_report(
    mesh: &SurfaceMesh,
    dtn: &DtnOperator,
    pair: &SteklovEigenpair,
    second: bool,
    opts: &ReportOptions,
) -> Result<IdentityReport> {
    let a = analyze(mesh, &pair.u, opts.zero_tol)?;
    let flux = dtn.flux(&pair.u)?;
    let by_node = flux_by_node(mesh, &flux)?;
    let flux_tol = opts.zero_tol * sup_norm(flux.iter().copied());

    let mut checks = BTreeMap::new();
    checks.insert("E0".to_string(), verify_e0_with(mesh, &a, &flux)?);
    checks.extend(verify_e2_with(&a, pair, opts.residual_tol));
    checks.insert(
        "COROLLARY".to_string(),
        eigenpair_hypotheses(verify_corollary_with(&a), pair, opts.residual_tol),
    );
    checks.insert(
        "E_c".to_string(),
        eigenpair_hypotheses(verify_ec_with(&a, second), pair, opts.residual_tol),
    );
    checks.insert("MORSE".to_string(), verify_morse_with(&a));
    let (ph, double) = verify_double_ph(mesh, &pair.u, opts.zero_tol)?;
    checks.insert("PH_double".to_string(), ph);

    let (count_min_neg, count_max_neg) = negative_extrema_counts(&a);
    let mismatches = mesh
        .boundary_nodes()
        .iter()
        .filter(|&&n| {
            let t = pair.u[n];
            t.abs() > a.trace_tol
                && by_node[n].abs() > flux_tol
                && (by_node[n] > 0.0) != (pair.sigma * t > 0.0)
        })
        .count();
    let singular_zero_warnings = a
        .singular_zeros
        .iter()
        .map(|p| {
            format!(
                "singular boundary zero at node {} ({:.6}, {:.6}), index {}",
                p.node, p.position[0], p.position[1], p.index
            )
        })
        .collect();

    Ok(IdentityReport {
        version: REPORT_FORMAT_VERSION,
        interior_index_sum: a.interior_index_sum(),
        chi_m: a.chi_m,
        chi_bd: 0,
        chi_p: a.negative.chi,
        chi_q: a.positive.chi,
        boundary_term_e0: a.boundary_term(|p| by_node[p.node] < -flux_tol),
        boundary_term_e2: a.boundary_term(|p| p.value < -a.trace_tol),
        sum_ell: a.negative.sum_ell,
        l: a.negative.changing_loops,
        count_min_neg,
        count_max_neg,
        interior_critical_count: a.interior.len() as i64,
        double,
        checks,
        provenance: Provenance {
            mesh_id: opts.mesh_id.clone(),
            eigenpair_index: pair.k,
            sigma: pair.sigma,
            multiplicity: pair.multiplicity,
            residual: pair.residual,
            zero_tol: opts.zero_tol,
            residual_tol: opts.residual_tol,
            trace_margin: a.negative.margin,
            singular_zero_warnings,
            flux_sign_mismatches: mismatches,
        },
    })
}
