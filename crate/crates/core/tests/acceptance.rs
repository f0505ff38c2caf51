//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklov::convergence::{convergence_study, generate};
use steklov::critical::{interior_critical_points, pl_index_sum, DEFAULT_ZERO_TOL};
use steklov::identity::{
    analyze, build_report, verify_e2_with, verify_morse_theorem, IdentityReport, ReportOptions,
    Verdict,
};
use steklov::mesh::{double_mesh, generate_annulus, generate_cylinder, generate_disk, SurfaceMesh};
use steklov::oracle::{
    annulus_modes, cylinder_family_critical_points, cylinder_family_ec, second_mode_critical_points,
    tstar, Geometry, OracleCriticalKind,
};
use steklov::spectrum::{build_dtn, crosscheck_generalized, perturb_metric, SteklovEigenpair};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const DISK_RES: usize = 240;
const ANNULUS_RES: usize = 280;
const CYLINDER_RES: usize = 160;

const DISK: Geometry = Geometry::Disk { radius: 1.0 };
const ANNULUS: Geometry = Geometry::Annulus { r: 0.5, big_r: 1.0 };

fn cylinder(t: f64) -> Geometry {
    Geometry::Cylinder { half_length: t }
}

fn resolution(g: Geometry) -> usize {
    match g {
        Geometry::Disk { .. } => DISK_RES,
        Geometry::Annulus { .. } => ANNULUS_RES,
        Geometry::Cylinder { .. } => CYLINDER_RES,
    }
}

struct Solved {
    mesh: SurfaceMesh,
    pairs: Vec<SteklovEigenpair>,
    report: IdentityReport,
}

fn solve(mesh: SurfaceMesh, k: usize) -> Result<Solved, String> {
    let dtn = build_dtn(&mesh).map_err(|e| e.to_string())?;
    let pairs = dtn.spectrum(k).map_err(|e| e.to_string())?;
    let report = build_report(&mesh, &dtn, &pairs[1], true, &ReportOptions::default())
        .map_err(|e| e.to_string())?;
    Ok(Solved { mesh, pairs, report })
}

fn solve_geometry(g: Geometry, k: usize) -> Result<Solved, String> {
    solve(generate(g, resolution(g)).map_err(|e| e.to_string())?, k)
}

fn require_pass(report: &IdentityReport, names: &[&str]) -> Result<(), String> {
    for name in names {
        let c = &report.checks[*name];
        ensure!(
            c.verdict == Verdict::Pass,
            "{name}: {} vs {} verdict {:?} {:?}",
            c.lhs,
            c.rhs,
            c.verdict,
            c.margin_notes
        );
    }
    Ok(())
}

/// Angle `φ` with the outer-circle trace proportional to `cos(θ − φ)`.
fn planar_phase(mesh: &SurfaceMesh, u: &[f64]) -> f64 {
    let (mut a, mut b) = (0.0, 0.0);
    for &n in &mesh.boundary_components()[0].nodes {
        let p = mesh.node_position(n);
        let t = p[1].atan2(p[0]);
        a += u[n] * t.cos();
        b += u[n] * t.sin();
    }
    b.atan2(a)
}

fn cylinder_phase(mesh: &SurfaceMesh, u: &[f64]) -> f64 {
    let (mut a, mut b) = (0.0, 0.0);
    for &n in &mesh.boundary_components()[0].nodes {
        let t = mesh.node_position(n)[0];
        a += u[n] * t.cos();
        b += u[n] * t.sin();
    }
    b.atan2(a)
}

/// Each oracle point has an FEM critical vertex within `tol`, and vice versa.
fn match_points(fem: &[[f64; 2]], oracle: &[[f64; 2]], tol: f64, periodic_x: bool) -> Result<f64, String> {
    let dist = |p: [f64; 2], q: [f64; 2]| {
        let mut dx = (p[0] - q[0]).abs();
        if periodic_x {
            dx = dx.min(2.0 * PI - dx);
        }
        dx.hypot(p[1] - q[1])
    };
    let mut worst = 0.0f64;
    for (a, b) in [(fem, oracle), (oracle, fem)] {
        for &p in a {
            let d = b.iter().map(|&q| dist(p, q)).fold(f64::INFINITY, f64::min);
            ensure!(d <= tol, "critical point {p:?} is {d:.3e} from the nearest match (edge {tol:.3e})");
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

fn c1_poincare_hopf() -> Outcome {
    let start = Instant::now();
    let doubles = [
        double_mesh(&generate_disk(1.0, 30).unwrap()).unwrap(),
        double_mesh(&generate_annulus(0.5, 1.0, 32).unwrap()).unwrap(),
        double_mesh(&generate_cylinder(1.0, 24).unwrap()).unwrap(),
    ];
    let expected = [2, 0, 0];
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for trial in 0..100 {
        let d = &doubles[trial % 3];
        let u: Vec<f64> = (0..d.mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sum = pl_index_sum(&d.mesh, &u).map_err(|e| e.to_string())?;
        ensure!(sum == expected[trial % 3], "trial {trial}: index sum {sum}");
        ensure!(sum == d.mesh.euler_characteristic(), "trial {trial}: chi mismatch");
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 5.0, "took {secs:.2} s");
    Ok(format!("100 random fields, index sum = chi exactly, {secs:.2} s"))
}

fn c2_disk() -> Outcome {
    let s = solve_geometry(DISK, 5)?;
    let exact = [0.0, 1.0, 1.0, 2.0, 2.0];
    let worst = s.pairs.iter().zip(exact).map(|(p, e)| (p.sigma - e).abs()).fold(0.0, f64::max);
    ensure!(worst <= 2e-2, "eigenvalue error {worst:.3e}");
    let table = convergence_study(DISK, &[DISK_RES / 4, DISK_RES / 2, DISK_RES], 5).map_err(|e| e.to_string())?;
    let rate = table.min_rate().unwrap_or(0.0);
    ensure!(rate >= 1.8, "convergence rates {:?}", table.rates);
    ensure!(s.report.interior_critical_count == 0, "{} interior critical vertices", s.report.interior_critical_count);
    require_pass(&s.report, &["E2_1", "E2_2", "E2_4", "E_c", "COROLLARY"])?;
    Ok(format!(
        "{} vertices, max error {worst:.2e}, min rate {rate:.2}, no interior critical vertices",
        s.mesh.num_nodes()
    ))
}

fn c3_annulus() -> Outcome {
    let s = solve_geometry(ANNULUS, 3)?;
    let oracle = annulus_modes(0.5, 1.0, 3).map_err(|e| e.to_string())?;
    let err = (s.pairs[1].sigma - oracle.modes[1].sigma).abs();
    ensure!(err <= 2e-2, "sigma_2 error {err:.3e}");
    let u = &s.pairs[1].u;
    let cps = interior_critical_points(&s.mesh, u, DEFAULT_ZERO_TOL).map_err(|e| e.to_string())?;
    ensure!(cps.len() == 2, "{} interior critical vertices", cps.len());
    ensure!(cps.iter().all(|c| c.index == -1), "indices {:?}", cps.iter().map(|c| c.index).collect::<Vec<_>>());
    let ec = &s.report.checks["E_c"];
    ensure!((ec.lhs, ec.rhs, ec.pass) == (2, 2, true), "E_c {} vs {}", ec.lhs, ec.rhs);
    ensure!(s.report.sum_ell == 2 && s.report.chi_m == 0, "sum_ell {}", s.report.sum_ell);
    let phase = planar_phase(&s.mesh, u);
    let expected: Vec<[f64; 2]> = second_mode_critical_points(&oracle, phase).iter().map(|p| p.position).collect();
    let found: Vec<[f64; 2]> = cps.iter().map(|c| c.position).collect();
    let edge = s.mesh.max_edge_length();
    let worst = match_points(&found, &expected, edge, false)?;
    Ok(format!(
        "{} vertices, sigma_2 error {err:.2e}, 2 saddles within {worst:.2e} of the closed form (edge {edge:.2e}), E_c 2 = 2 - 0",
        s.mesh.num_nodes()
    ))
}

fn c4_cylinders() -> Outcome {
    let s = solve_geometry(cylinder(0.5), 4)?;
    let p = &s.pairs[1];
    let err = (p.sigma - 0.5f64.tanh()).abs();
    ensure!(err <= 2e-2, "T = 0.5: sigma_2 error {err:.3e}");
    ensure!(p.multiplicity == 2 && s.pairs[2].multiplicity == 2, "T = 0.5: multiplicity {}", p.multiplicity);
    let cps = interior_critical_points(&s.mesh, &p.u, DEFAULT_ZERO_TOL).map_err(|e| e.to_string())?;
    ensure!(cps.len() == 2 && cps.iter().all(|c| c.index == -1), "T = 0.5: interior critical vertices {cps:?}");
    let ec = &s.report.checks["E_c"];
    ensure!((ec.lhs, ec.rhs, ec.pass) == (2, 2, true), "T = 0.5: E_c {} vs {}", ec.lhs, ec.rhs);
    let oracle = steklov::oracle::cylinder_modes(0.5, 3).map_err(|e| e.to_string())?;
    let expected: Vec<[f64; 2]> = second_mode_critical_points(&oracle, cylinder_phase(&s.mesh, &p.u))
        .iter()
        .map(|p| p.position)
        .collect();
    let found: Vec<[f64; 2]> = cps.iter().map(|c| c.position).collect();
    match_points(&found, &expected, s.mesh.max_edge_length(), true)?;

    let s2 = solve_geometry(cylinder(2.0), 3)?;
    let p = &s2.pairs[1];
    let err2 = (p.sigma - 0.5).abs();
    ensure!(err2 <= 2e-2, "T = 2: sigma_2 error {err2:.3e}");
    ensure!(p.multiplicity == 1, "T = 2: multiplicity {}", p.multiplicity);
    let a = analyze(&s2.mesh, &p.u, DEFAULT_ZERO_TOL).map_err(|e| e.to_string())?;
    ensure!(
        a.negative.loops.iter().all(|l| l.crossings == 0 && !l.degenerate),
        "T = 2: trace changes sign on a boundary circle"
    );
    let ec = &s2.report.checks["E_c"];
    ensure!((ec.lhs, ec.rhs, ec.pass) == (0, 0, true), "T = 2: E_c {} vs {}", ec.lhs, ec.rhs);
    Ok(format!(
        "T = 0.5: sigma_2 error {err:.2e}, double, 2 saddles, E_c 2 = 2 - 0; T = 2: sigma_2 error {err2:.2e}, simple, E_c 0 = 0 - 0"
    ))
}

fn c5_tstar_family() -> Outcome {
    let ts = tstar();
    ensure!(ts.residual.abs() < 1e-13, "T* tanh T* - 1 = {:e}", ts.residual);
    let t = ts.value;
    let threshold = t.cosh() / t;
    let regimes = [
        (0.5 * threshold, OracleCriticalKind::InteriorSaddle, 2, (2, 2)),
        (threshold, OracleCriticalKind::BoundarySingularZero, 2, (0, 0)),
        (1.5 * threshold, OracleCriticalKind::InteriorSaddle, 0, (0, 0)),
    ];
    for (c, kind, count, (lhs, rhs)) in regimes {
        let pts = cylinder_family_critical_points(c);
        ensure!(pts.len() == count && pts.iter().all(|p| p.kind == kind), "c = {c}: {pts:?}");
        let ec = cylinder_family_ec(c);
        ensure!((ec.lhs, ec.rhs, ec.pass) == (lhs, rhs, true), "c = {c}: E_c {} vs {}", ec.lhs, ec.rhs);
    }
    Ok(format!("T* = {t:.15}, 2 interior / 2 singular boundary / 0 critical points, E_c holds in all three regimes"))
}

fn c6_routes() -> Outcome {
    let mut worst = 0.0f64;
    for (g, res) in [(DISK, 120), (ANNULUS, 128), (cylinder(0.5), 96), (cylinder(2.0), 64)] {
        let mesh = generate(g, res).map_err(|e| e.to_string())?;
        let a = build_dtn(&mesh).and_then(|d| d.spectrum(10)).map_err(|e| e.to_string())?;
        let b = crosscheck_generalized(&mesh, 10).map_err(|e| e.to_string())?;
        let top = a[9].sigma;
        for (x, y) in a.iter().zip(&b) {
            let rel = if x.k == 1 {
                (x.sigma - y.sigma).abs() / top
            } else {
                (x.sigma - y.sigma).abs() / x.sigma
            };
            ensure!(rel <= 1e-8, "{g:?}: eigenvalue {} differs by {rel:.3e}", x.k);
            worst = worst.max(rel);
        }
    }
    Ok(format!("first 10 eigenvalues agree on all geometries, worst relative gap {worst:.2e}"))
}

fn all_geometries() -> Vec<Geometry> {
    vec![DISK, ANNULUS, cylinder(0.5), cylinder(2.0)]
}

fn c7_sign_flip() -> Outcome {
    for g in all_geometries() {
        let s = solve_geometry(g, 3)?;
        let p = &s.pairs[1];
        let neg: Vec<f64> = p.u.iter().map(|x| -x).collect();
        let morse = verify_morse_theorem(&s.mesh, &neg, DEFAULT_ZERO_TOL).map_err(|e| e.to_string())?;
        let a = analyze(&s.mesh, &p.u, DEFAULT_ZERO_TOL).map_err(|e| e.to_string())?;
        let e22 = &verify_e2_with(&a, p, 1e-8)["E2_2"];
        ensure!(
            (morse.lhs, morse.rhs, morse.verdict) == (e22.lhs, e22.rhs, e22.verdict),
            "{g:?}: morse on -u {} = {} {:?}, E2_2 on u {} = {} {:?}",
            morse.lhs,
            morse.rhs,
            morse.verdict,
            e22.lhs,
            e22.rhs,
            e22.verdict
        );
    }
    Ok("Morse check on -u_2 matches E2_2 on u_2 for disk, annulus, cylinders T = 0.5 and T = 2".into())
}

fn c8_morse_property() -> Outcome {
    let mut total = 0;
    for g in all_geometries() {
        let s = solve_geometry(g, 3)?;
        let cps = interior_critical_points(&s.mesh, &s.pairs[1].u, DEFAULT_ZERO_TOL).map_err(|e| e.to_string())?;
        if let Some(c) = cps.iter().find(|c| c.link_sign_changes >= 6) {
            return Err(format!("{g:?}: node {} has {} link sign changes", c.node, c.link_sign_changes));
        }
        total += cps.len();
    }
    Ok(format!("{total} interior critical vertices of u_2, none with 6 or more link sign changes"))
}

fn perturbed_annulus() -> Outcome {
    let base = generate_annulus(0.5, 1.0, 128).map_err(|e| e.to_string())?;
    for seed in 0..10 {
        let mesh = perturb_metric(&base, 0.05, seed).map_err(|e| e.to_string())?;
        let s = solve(mesh, 3)?;
        for (name, c) in &s.report.checks {
            ensure!(
                matches!(c.verdict, Verdict::Pass | Verdict::PassWithWarning),
                "seed {seed}: {name} {} vs {} {:?} {:?}",
                c.lhs,
                c.rhs,
                c.verdict,
                c.margin_notes
            );
        }
    }
    Ok("all identity checks pass on 10 perturbed annuli (amplitude 0.05)".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 discrete Poincare-Hopf exactness", c1_poincare_hopf),
        ("2 disk spectrum, convergence and identities", c2_disk),
        ("3 annulus saddles and count identity", c3_annulus),
        ("4 flat cylinders T = 0.5 and T = 2", c4_cylinders),
        ("5 critical-threshold cylinder family", c5_tstar_family),
        ("6 Schur complement vs generalized route", c6_routes),
        ("7 sign-flip duality", c7_sign_flip),
        ("8 second eigenfunction has only simple saddles", c8_morse_property),
        ("smoke perturbed annulus metrics", perturbed_annulus),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1} s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
