//! Boundary trace: extrema, sign changes, the negative set and singular zeros.

use serde::Serialize;

use super::{sup_norm, Classification, CriticalKind, CriticalPoint};
use crate::error::Result;
use crate::mesh::SurfaceMesh;

fn trace_norm(mesh: &SurfaceMesh, u: &[f64]) -> f64 {
    sup_norm(mesh.boundary_nodes().iter().map(|&n| u[n]))
}

/// Extrema of the boundary trace plus loops on which the trace is constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceExtrema {
    pub points: Vec<CriticalPoint>,
    /// Boundary components whose trace is constant within tolerance.
    pub degenerate_loops: Vec<usize>,
}

/// Local maxima (index −1) and minima (index +1) of the trace on each loop.
/// Consecutive values within `zero_tol · ‖trace‖∞` form a plateau, reported
/// once at its first vertex in traversal order.
pub fn boundary_trace_extrema(mesh: &SurfaceMesh, u: &[f64], zero_tol: f64) -> Result<TraceExtrema> {
    mesh.check_field(u, "field values")?;
    let tol = zero_tol * trace_norm(mesh, u);
    let mut points = Vec::new();
    let mut degenerate_loops = Vec::new();
    for (c, comp) in mesh.boundary_components().iter().enumerate() {
        let h: Vec<f64> = comp.nodes.iter().map(|&v| u[v]).collect();
        let n = h.len();
        let same: Vec<bool> = (0..n).map(|i| (h[(i + 1) % n] - h[i]).abs() <= tol).collect();
        let Some(start) = (0..n).find(|&i| !same[(i + n - 1) % n]) else {
            degenerate_loops.push(c);
            continue;
        };
        // runs as (first, last) positions in cyclic order from `start`
        let mut runs = Vec::new();
        let mut i = start;
        loop {
            let first = i;
            while same[i] {
                i = (i + 1) % n;
            }
            runs.push((first, i));
            i = (i + 1) % n;
            if i == start {
                break;
            }
        }
        let r = runs.len();
        let step = |k: usize| {
            let (_, last) = runs[k];
            let (next_first, _) = runs[(k + 1) % r];
            h[next_first] - h[last]
        };
        let mut found: Vec<(usize, CriticalPoint)> = Vec::new();
        for k in 0..r {
            let d_in = step((k + r - 1) % r);
            let d_out = step(k);
            let (index, class) = if d_in > 0.0 && d_out < 0.0 {
                (-1, Classification::Maximum)
            } else if d_in < 0.0 && d_out > 0.0 {
                (1, Classification::Minimum)
            } else {
                continue;
            };
            let pos = runs[k].0;
            let node = comp.nodes[pos];
            found.push((
                pos,
                CriticalPoint {
                    node,
                    position: mesh.node_position(node),
                    kind: CriticalKind::BoundaryTrace,
                    index,
                    link_sign_changes: 0,
                    value: u[node],
                    classification: class,
                },
            ));
        }
        found.sort_by_key(|f| f.0);
        points.extend(found.into_iter().map(|f| f.1));
    }
    Ok(TraceExtrema {
        points,
        degenerate_loops,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetComponentKind {
    /// Proper arc of a boundary circle, Euler characteristic 1.
    Arc,
    /// Entire boundary circle, Euler characteristic 0.
    Loop,
}

/// Connected component of the part of the boundary where the trace is negative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetComponent {
    /// Boundary component index.
    pub component: usize,
    pub kind: SetComponentKind,
    pub nodes: Vec<usize>,
}

impl SetComponent {
    pub fn euler_characteristic(&self) -> i64 {
        match self.kind {
            SetComponentKind::Arc => 1,
            SetComponentKind::Loop => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoopSignData {
    pub component: usize,
    /// Transversal zero crossings along the loop (always even).
    pub crossings: usize,
    /// Sign-change pairs, i.e. negative arcs: `crossings / 2`.
    pub ell: usize,
    /// Trace snapped to zero on the whole loop.
    pub degenerate: bool,
    pub snapped_zeros: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySignData {
    pub loops: Vec<LoopSignData>,
    /// Components of the negative set.
    pub components: Vec<SetComponent>,
    /// Euler characteristic of the negative set (number of arcs).
    pub chi: i64,
    pub sum_ell: i64,
    /// Number of loops with at least one sign change.
    pub changing_loops: usize,
    /// Smallest `|u| / ‖trace‖∞` among values that were not snapped to zero.
    pub margin: f64,
    pub zero_tol: f64,
}

impl BoundarySignData {
    pub fn degenerate_loops(&self) -> Vec<usize> {
        self.loops.iter().filter(|l| l.degenerate).map(|l| l.component).collect()
    }

    /// Some unsnapped value lies within ten times the snapping tolerance.
    pub fn near_threshold(&self) -> bool {
        self.margin < 10.0 * self.zero_tol
    }
}

fn snapped_signs(h: &[f64], tol: f64) -> Vec<i8> {
    h.iter()
        .map(|&x| {
            if x.abs() <= tol {
                0
            } else if x > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// For each maximal cyclic zero run: `(positions, sign before, sign after)`.
/// Requires at least one nonzero sign.
fn zero_runs(s: &[i8]) -> Vec<(Vec<usize>, i8, i8)> {
    let n = s.len();
    let Some(anchor) = (0..n).find(|&i| s[i] != 0) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut k = 1;
    while k <= n {
        let i = (anchor + k) % n;
        if s[i] == 0 {
            let before = s[(i + n - 1) % n];
            let mut run = Vec::new();
            let mut j = i;
            while s[j] == 0 {
                run.push(j);
                j = (j + 1) % n;
                k += 1;
            }
            out.push((run, before, s[j]));
        } else {
            k += 1;
        }
    }
    out
}

/// Effective signs: zeros touching from one side take that side's sign,
/// zeros between opposite signs stay 0 (they are crossings).
fn effective_signs(s: &[i8]) -> Vec<i8> {
    let mut eff = s.to_vec();
    for (run, before, after) in zero_runs(s) {
        if before == after {
            for p in run {
                eff[p] = before;
            }
        }
    }
    eff
}

/// Sign structure of the trace on every boundary loop. Values with
/// `|u| <= zero_tol · ‖trace‖∞` are snapped to zero; a zero run between opposite
/// signs is one crossing and a zero run between equal signs is a touch that
/// neither crosses nor splits the negative set.
pub fn boundary_sign_changes(mesh: &SurfaceMesh, u: &[f64], zero_tol: f64) -> Result<BoundarySignData> {
    mesh.check_field(u, "field values")?;
    let norm = trace_norm(mesh, u);
    let tol = zero_tol * norm;
    let mut loops = Vec::new();
    let mut components = Vec::new();
    let mut margin: f64 = 1.0;
    for (c, comp) in mesh.boundary_components().iter().enumerate() {
        let h: Vec<f64> = comp.nodes.iter().map(|&v| u[v]).collect();
        for &x in &h {
            if x.abs() > tol {
                margin = margin.min(x.abs() / norm);
            }
        }
        let s = snapped_signs(&h, tol);
        let snapped_zeros = s.iter().filter(|&&x| x == 0).count();
        if snapped_zeros == s.len() {
            loops.push(LoopSignData {
                component: c,
                crossings: 0,
                ell: 0,
                degenerate: true,
                snapped_zeros,
            });
            continue;
        }
        let eff = effective_signs(&s);
        let n = eff.len();
        let mut crossings = zero_runs(&eff).len();
        crossings += (0..n).filter(|&i| eff[i] * eff[(i + 1) % n] == -1).count();
        debug_assert!(crossings % 2 == 0);

        if eff.iter().all(|&x| x == -1) {
            components.push(SetComponent {
                component: c,
                kind: SetComponentKind::Loop,
                nodes: comp.nodes.clone(),
            });
        } else if let Some(start) = (0..n).find(|&i| eff[i] == -1 && eff[(i + n - 1) % n] != -1) {
            let mut i = start;
            loop {
                if eff[i] == -1 && eff[(i + n - 1) % n] != -1 {
                    let mut nodes = Vec::new();
                    let mut j = i;
                    while eff[j] == -1 {
                        nodes.push(comp.nodes[j]);
                        j = (j + 1) % n;
                    }
                    components.push(SetComponent {
                        component: c,
                        kind: SetComponentKind::Arc,
                        nodes,
                    });
                }
                i = (i + 1) % n;
                if i == start {
                    break;
                }
            }
        }
        loops.push(LoopSignData {
            component: c,
            crossings,
            ell: crossings / 2,
            degenerate: false,
            snapped_zeros,
        });
    }
    let chi = components.iter().map(SetComponent::euler_characteristic).sum();
    let sum_ell = loops.iter().map(|l| l.ell as i64).sum();
    let changing_loops = loops.iter().filter(|l| l.ell > 0).count();
    Ok(BoundarySignData {
        loops,
        components,
        chi,
        sum_ell,
        changing_loops,
        margin,
        zero_tol,
    })
}

/// Boundary zeros where the trace touches zero without changing sign while a
/// nodal line of `u` leaves the boundary there: a snapped zero run bordered by
/// equal signs with a link neighbour of the opposite sign. One point per run,
/// at the node of smallest `|u|`.
///
/// The index is `1 - C` where `C` counts sign changes of `u` along the link path
/// (next boundary node, interior neighbours, previous boundary node); snapped
/// zeros are skipped.
pub fn boundary_singular_zeros(
    mesh: &SurfaceMesh,
    u: &[f64],
    zero_tol: f64,
) -> Result<Vec<CriticalPoint>> {
    mesh.check_field(u, "field values")?;
    let tol = zero_tol * trace_norm(mesh, u);
    let sign = |x: f64| -> i8 {
        if x.abs() <= tol {
            0
        } else if x > 0.0 {
            1
        } else {
            -1
        }
    };
    let mut out = Vec::new();
    for comp in mesh.boundary_components() {
        let h: Vec<f64> = comp.nodes.iter().map(|&v| u[v]).collect();
        let s = snapped_signs(&h, tol);
        for (run, before, after) in zero_runs(&s) {
            if before != after {
                continue;
            }
            let nodal_line = run.iter().any(|&p| {
                mesh.link(comp.nodes[p])
                    .nodes
                    .iter()
                    .any(|&w| !mesh.is_boundary_node(w) && sign(u[w]) == -before)
            });
            if !nodal_line {
                continue;
            }
            let &p = run
                .iter()
                .min_by(|&&a, &&b| h[a].abs().total_cmp(&h[b].abs()).then(a.cmp(&b)))
                .expect("non-empty run");
            let node = comp.nodes[p];
            let path: Vec<i8> = mesh
                .link(node)
                .nodes
                .iter()
                .map(|&w| sign(u[w]))
                .filter(|&x| x != 0)
                .collect();
            let changes = path.windows(2).filter(|w| w[0] != w[1]).count();
            let index = 1 - changes as i64;
            out.push(CriticalPoint {
                node,
                position: mesh.node_position(node),
                kind: CriticalKind::BoundarySingularZero,
                index,
                link_sign_changes: 2 * changes,
                value: u[node],
                classification: if index == -1 {
                    Classification::Saddle
                } else {
                    Classification::Degenerate
                },
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_annulus, generate_cylinder, generate_disk};

    fn angle(p: [f64; 2]) -> f64 {
        p[1].atan2(p[0])
    }

    #[test]
    fn cosine_trace() {
        let mesh = generate_disk(1.0, 48).unwrap();
        let u = mesh.sample(|p| angle(p).cos());
        let ex = boundary_trace_extrema(&mesh, &u, 1e-7).unwrap();
        let maxima = ex.points.iter().filter(|p| p.index == -1).count();
        let minima = ex.points.iter().filter(|p| p.index == 1).count();
        assert_eq!((maxima, minima), (1, 1));

        let data = boundary_sign_changes(&mesh, &u, 1e-7).unwrap();
        assert_eq!(data.loops[0].ell, 1);
        assert_eq!(data.chi, 1);
        assert_eq!(data.components[0].kind, SetComponentKind::Arc);
    }

    #[test]
    fn triple_cosine_trace() {
        let mesh = generate_disk(1.0, 60).unwrap();
        let u = mesh.sample(|p| (3.0 * angle(p)).cos());
        let ex = boundary_trace_extrema(&mesh, &u, 1e-7).unwrap();
        assert_eq!(ex.points.len(), 6);
        assert_eq!(ex.points.iter().map(|p| p.index).sum::<i64>(), 0);
        let data = boundary_sign_changes(&mesh, &u, 1e-7).unwrap();
        assert_eq!(data.sum_ell, 3);
    }

    #[test]
    fn constant_sign_loops() {
        let mesh = generate_annulus(0.5, 1.0, 24).unwrap();
        let u = mesh.sample(|p| if p[0].hypot(p[1]) > 0.75 { 1.0 } else { -1.0 });
        let data = boundary_sign_changes(&mesh, &u, 1e-7).unwrap();
        assert_eq!(data.sum_ell, 0);
        assert_eq!(data.components.len(), 1);
        assert_eq!(data.components[0].kind, SetComponentKind::Loop);
        assert_eq!(data.chi, 0);
        let ex = boundary_trace_extrema(&mesh, &u, 1e-7).unwrap();
        assert_eq!(ex.degenerate_loops, vec![0, 1]);
    }

    #[test]
    fn plateau_is_one_extremum() {
        let mesh = generate_disk(1.0, 48).unwrap();
        let u = mesh.sample(|p| angle(p).cos().min(0.5));
        let ex = boundary_trace_extrema(&mesh, &u, 1e-7).unwrap();
        assert_eq!(ex.points.len(), 2);
    }

    #[test]
    fn touching_zero_is_not_a_crossing() {
        // sin²-like trace touching zero at θ = 0 from above
        let mesh = generate_disk(1.0, 48).unwrap();
        let u = mesh.sample(|p| 1.0 - angle(p).cos());
        let data = boundary_sign_changes(&mesh, &u, 1e-7).unwrap();
        assert_eq!(data.sum_ell, 0);
        assert!(data.components.is_empty());
        // the interior neighbours are positive too, so no nodal line leaves the boundary
        assert!(boundary_singular_zeros(&mesh, &u, 1e-7).unwrap().is_empty());
    }

    #[test]
    fn zero_run_between_opposite_signs_is_one_crossing() {
        let mesh = generate_disk(1.0, 48).unwrap();
        let u = mesh.sample(|p| {
            let x = p[0];
            if x.abs() < 0.2 { 0.0 } else { x }
        });
        let data = boundary_sign_changes(&mesh, &u, 1e-7).unwrap();
        assert_eq!(data.loops[0].crossings, 2);
        assert_eq!(data.sum_ell, 1);
    }

    #[test]
    fn all_zero_loop_is_degenerate() {
        let mesh = generate_cylinder(1.0, 16).unwrap();
        let u = mesh.sample(|p| p[1] - 1.0);
        let data = boundary_sign_changes(&mesh, &u, 1e-7).unwrap();
        assert_eq!(data.degenerate_loops(), vec![1]);
    }

    #[test]
    fn singular_zero_where_a_nodal_line_leaves_the_boundary() {
        // u = y² - x² + (1 - x)... simpler: trace ≤ 0 touching zero at θ = 0,
        // interior positive just inside.
        let mesh = generate_disk(1.0, 48).unwrap();
        let u = mesh.sample(|p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            (angle(p).cos() - 1.0) + 4.0 * (1.0 - r2) * p[0].max(0.0).powi(4)
        });
        let zs = boundary_singular_zeros(&mesh, &u, 1e-7).unwrap();
        assert_eq!(zs.len(), 1);
        assert_eq!(zs[0].position, [1.0, 0.0]);
    }
}
