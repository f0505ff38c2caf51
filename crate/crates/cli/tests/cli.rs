use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use steklov::mesh::SurfaceMesh;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_steklov"));
    c.env_remove("STEKLOV_OUT_DIR");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, file: &Path) {
    let instance: Value = serde_json::from_str(&fs::read_to_string(file).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema(schema_name)).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{} against {schema_name}: {errors:?}", file.display());
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: &Path, column: usize) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(column).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn mesh_files_have_the_expected_topology() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str, i64); 3] = [
        (&["mesh", "--geometry", "annulus", "--r", "0.5", "--R", "1", "--res", "64"], "annulus-r0.5-R1-res64", 0),
        (&["mesh", "--geometry", "cylinder", "--T", "1.19967864", "--res", "64"], "cylinder-T1.19967864-res64", 0),
        (&["mesh", "--geometry", "disk", "--res", "32"], "disk-radius1-res32", 1),
    ];
    for (args, id, chi) in cases {
        let o = run(args, dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains(&format!("euler characteristic {chi}")));
        let path = dir.path().join(format!("{id}.mesh.json"));
        assert_valid("mesh.v1.json", &path);
        let mesh = SurfaceMesh::load(&path).unwrap();
        assert_eq!(mesh.euler_characteristic(), chi);
    }
    let cyl = json(&dir.path().join("cylinder-T1.19967864-res64.mesh.json"));
    assert!(!cyl["identifications"].as_array().unwrap().is_empty());
}

#[test]
fn invalid_configuration_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["mesh", "--geometry", "annulus", "--r", "1.5", "--R", "1"][..],
        &["mesh", "--geometry", "disk", "--res", "4"],
        &["mesh", "--res", "32"],
        &["mesh", "--geometry", "sphere"],
        &["convergence", "--geometry", "disk", "--ladder", "48,24"],
        &["verify", "--geometry", "disk", "--zero-tol", "-1"],
        &["solve", "--mesh", "/nonexistent/mesh.json"],
    ] {
        let o = run(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn solve_writes_the_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--geometry", "disk", "--res", "64", "-k", "5"], dir.path());
    assert!(o.status.success());
    let csv = dir.path().join("disk-radius1-res64.spectrum.csv");
    assert!(fs::read_to_string(&csv).unwrap().starts_with("k,sigma,multiplicity,residual\n"));
    let sigma = csv_column(&csv, 1);
    for (s, e) in sigma.iter().zip([0.0, 1.0, 1.0, 2.0, 2.0]) {
        assert!((s - e).abs() < 2e-2, "{sigma:?}");
    }
    let fields = fs::read_to_string(dir.path().join("disk-radius1-res64.fields.csv")).unwrap();
    assert!(fields.starts_with("node,x,y,u1,u2,u3,u4,u5\n"));

    let o = run(&["solve", "--geometry", "cylinder", "--T", "0.5", "--res", "64", "-k", "3"], dir.path());
    assert!(o.status.success());
    let sigma = csv_column(&dir.path().join("cylinder-T0.5-res64.spectrum.csv"), 1);
    assert!((sigma[1] - 0.5f64.tanh()).abs() < 2e-2 && (sigma[2] - 0.5f64.tanh()).abs() < 2e-2);
    let mult = csv_column(&dir.path().join("cylinder-T0.5-res64.spectrum.csv"), 2);
    assert_eq!(mult[1], 2.0);
}

#[test]
fn solve_reads_a_mesh_file() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run(&["mesh", "--geometry", "annulus", "--res", "32"], a.path()).status.success());
    let mesh = a.path().join("annulus-r0.5-R1-res32.mesh.json");
    let o = run(&["solve", "--mesh", mesh.to_str().unwrap(), "-k", "3"], a.path());
    assert!(o.status.success());
    let direct = run(&["solve", "--geometry", "annulus", "--res", "32", "-k", "3"], b.path());
    assert!(direct.status.success());
    let name = "annulus-r0.5-R1-res32.spectrum.csv";
    assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    let sigma = csv_column(&a.path().join(name), 1);
    assert!((sigma[1] - 0.438_447_187).abs() < 2e-2);
}

fn check(report: &Value, name: &str) -> (i64, i64, String) {
    let c = &report["checks"][name];
    (
        c["lhs"].as_i64().unwrap(),
        c["rhs"].as_i64().unwrap(),
        c["verdict"].as_str().unwrap().to_string(),
    )
}

#[test]
fn verify_annulus_disk_and_long_cylinder() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--geometry", "annulus", "--res", "96"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let path = dir.path().join("annulus-r0.5-R1-res96.k2.report.json");
    assert_valid("report.v1.json", &path);
    let r = json(&path);
    assert_eq!(check(&r, "E2_4"), (-2, -2, "pass".into()));
    assert_eq!(check(&r, "E_c"), (2, 2, "pass".into()));
    assert_eq!(r["double"]["bulk"], -4);
    assert_eq!(r["double"]["collar"], 4);
    let svg = fs::read_to_string(dir.path().join("annulus-r0.5-R1-res96.k2.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline") && svg.contains("<circle"));

    let o = run(&["verify", "--geometry", "disk", "--res", "48"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = json(&dir.path().join("disk-radius1-res48.k2.report.json"));
    assert_eq!(check(&r, "E_c"), (0, 0, "pass".into()));
    assert_eq!(r["sum_ell"], 1);

    let o = run(&["verify", "--geometry", "cylinder", "--T", "2", "--res", "48"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = json(&dir.path().join("cylinder-T2-res48.k2.report.json"));
    assert_eq!(r["sum_ell"], 0);
    for (name, c) in r["checks"].as_object().unwrap() {
        assert_eq!(c["verdict"], "pass", "{name}");
    }
}

#[test]
fn strict_mode_turns_unmet_hypotheses_into_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    // the third eigenpair of the long cylinder is not a second eigenfunction
    let args = ["verify", "--geometry", "cylinder", "--T", "2", "--res", "48", "-k", "3"];
    assert_eq!(run(&args, dir.path()).status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(run(&strict, dir.path()).status.code(), Some(4));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        for args in [
            &["verify", "--geometry", "annulus", "--res", "48", "-k", "3", "--amplitude", "0.05", "--seed", "7"][..],
            &["solve", "--geometry", "cylinder", "--T", "0.5", "--res", "48", "-k", "4"],
            &["oracle", "--geometry", "annulus", "-k", "6"],
        ] {
            assert!(run(args, dir).status.success());
        }
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert_eq!(fa.len(), 7);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn output_directory_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["mesh", "--geometry", "disk", "--res", "12"])
        .env("STEKLOV_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("disk-radius1-res12.mesh.json").exists());
}

#[test]
fn convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["convergence", "--geometry", "disk", "--ladder", "24,48,96", "-k", "5"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("disk-radius1-res96.convergence.csv")).unwrap();
    assert!(csv.contains("\nk,rate,flag\n1,,exact\n"));
    assert!(!csv.contains("slow"));
    assert!(csv.contains("\n96,pass\n"));
}

#[test]
fn oracle_dump_for_the_critical_cylinder() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["oracle", "--geometry", "cylinder", "--T", "1.1996786402577337", "-k", "4"], dir.path());
    assert!(o.status.success());
    let path = dir.path().join("cylinder-T1.1996786402577337.oracle.json");
    assert_valid("oracle.v1.json", &path);
    let d = json(&path);
    assert_eq!(d["eigenvalues"][1]["multiplicity"], 3);
    assert_eq!(d["family"]["location_discrepancy"], true);
    let regimes: Vec<usize> = d["family"]["regimes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["critical_points"].as_array().unwrap().len())
        .collect();
    assert_eq!(regimes, vec![2, 2, 0]);

    for g in [&["--geometry", "disk"][..], &["--geometry", "annulus"]] {
        let mut args = vec!["oracle"];
        args.extend_from_slice(g);
        assert!(run(&args, dir.path()).status.success());
    }
    for f in files(dir.path()) {
        assert_valid("oracle.v1.json", &f);
    }
}
