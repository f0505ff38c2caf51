//! `steklov`: mesh generation, Steklov spectra, index identity reports,
//! convergence tables and closed-form reference data.

mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use steklov::convergence::{convergence_study, generate, MIN_RATE};
use steklov::critical::DEFAULT_ZERO_TOL;
use steklov::identity::{analyze, build_report, IdentityReport, ReportOptions, Verdict};
use steklov::mesh::SurfaceMesh;
use steklov::oracle::{oracle_dump, Geometry};
use steklov::spectrum::{build_dtn, cluster_ranges, perturb_metric, spectrum_csv, SteklovEigenpair};
use steklov::Error;

#[derive(Parser, Debug)]
#[command(name = "steklov", version, about = "Steklov eigenpairs and critical point identities on surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a mesh and write it as JSON.
    Mesh(MeshArgs),
    /// Solve for the first k eigenpairs and write the spectrum and fields as CSV.
    Solve(SolveArgs),
    /// Write identity reports and SVG overlays for eigenpairs 2..=k.
    Verify(VerifyArgs),
    /// Eigenvalue errors against the closed-form spectrum over a resolution ladder.
    Convergence(ConvergenceArgs),
    /// Closed-form eigenvalues and critical points as JSON.
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Disk,
    Annulus,
    Cylinder,
}

#[derive(Args, Debug)]
struct GeometryArgs {
    #[arg(long, value_enum)]
    geometry: Option<Kind>,
    /// Disk radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Annulus inner radius.
    #[arg(long = "r", default_value_t = 0.5)]
    r: f64,
    /// Annulus outer radius.
    #[arg(long = "R", default_value_t = 1.0)]
    big_r: f64,
    /// Cylinder half length.
    #[arg(long = "T", default_value_t = 1.0)]
    t: f64,
}

impl GeometryArgs {
    fn geometry(&self) -> Result<Geometry, Failure> {
        match self.geometry {
            Some(Kind::Disk) => Ok(Geometry::Disk { radius: self.radius }),
            Some(Kind::Annulus) => Ok(Geometry::Annulus { r: self.r, big_r: self.big_r }),
            Some(Kind::Cylinder) => Ok(Geometry::Cylinder { half_length: self.t }),
            None => Err(Failure::config("--geometry is required")),
        }
    }
}

#[derive(Args, Debug)]
struct Output {
    /// Output directory.
    #[arg(long, env = "STEKLOV_OUT_DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Source {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Resolution passed to the generator.
    #[arg(long, default_value_t = 64)]
    res: usize,
    /// Load a mesh file instead of generating one.
    #[arg(long, conflicts_with = "geometry")]
    mesh: Option<PathBuf>,
    /// Relative amplitude of a random per-triangle metric scaling.
    #[arg(long, default_value_t = 0.0)]
    amplitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct MeshArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(long, default_value_t = 64)]
    res: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    #[arg(short, default_value_t = 5)]
    k: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    #[arg(short, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    residual_tol: f64,
    /// Exit 3 on warnings and 4 on unmet hypotheses as well as on failures.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Comma-separated, strictly increasing resolutions.
    #[arg(long, value_delimiter = ',', default_value = "24,48,96")]
    ladder: Vec<usize>,
    #[arg(short, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[arg(short, default_value_t = 8)]
    k: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Factorization { .. }) { 1 } else { 2 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn mesh_id(g: Geometry, res: usize) -> String {
    match g {
        Geometry::Disk { radius } => format!("disk-radius{}-res{res}", num(radius)),
        Geometry::Annulus { r, big_r } => format!("annulus-r{}-R{}-res{res}", num(r), num(big_r)),
        Geometry::Cylinder { half_length } => format!("cylinder-T{}-res{res}", num(half_length)),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(Error::from)?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(Error::from)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn load(source: &Source) -> Result<(SurfaceMesh, String), Failure> {
    let (mut mesh, mut id) = match &source.mesh {
        Some(path) => {
            let stem = path
                .file_name()
                .and_then(|s| s.to_str())
                .map(|s| s.trim_end_matches(".json").trim_end_matches(".mesh").to_string())
                .unwrap_or_else(|| "mesh".into());
            (SurfaceMesh::load(path)?, stem)
        }
        None => {
            let g = source.geometry.geometry()?;
            (generate(g, source.res)?, mesh_id(g, source.res))
        }
    };
    if source.amplitude != 0.0 {
        mesh = perturb_metric(&mesh, source.amplitude, source.seed)?;
        id.push_str(&format!("-amp{}-seed{}", num(source.amplitude), source.seed));
    }
    Ok((mesh, id))
}

fn cmd_mesh(a: &MeshArgs) -> Result<u8, Failure> {
    let g = a.geometry.geometry()?;
    let mesh = generate(g, a.res)?;
    println!(
        "{} nodes, {} triangles, euler characteristic {}, {} boundary loops",
        mesh.num_nodes(),
        mesh.num_triangles(),
        mesh.euler_characteristic(),
        mesh.boundary_components().len()
    );
    write(&a.output.out, &format!("{}.mesh.json", mesh_id(g, a.res)), &mesh.to_json())?;
    Ok(0)
}

fn fields_csv(mesh: &SurfaceMesh, pairs: &[SteklovEigenpair]) -> String {
    let mut s = String::from("node,x,y");
    for p in pairs {
        let _ = write!(s, ",u{}", p.k);
    }
    s.push('\n');
    for n in 0..mesh.num_nodes() {
        let q = mesh.node_position(n);
        let _ = write!(s, "{n},{:.16e},{:.16e}", q[0], q[1]);
        for p in pairs {
            let _ = write!(s, ",{:.16e}", p.u[n]);
        }
        s.push('\n');
    }
    s
}

fn cmd_solve(a: &SolveArgs) -> Result<u8, Failure> {
    let (mesh, id) = load(&a.source)?;
    let dtn = build_dtn(&mesh)?;
    let pairs = dtn.spectrum(a.k)?;
    for p in &pairs {
        println!(
            "k {} sigma {:.16e} multiplicity {} residual {:.3e}",
            p.k, p.sigma, p.multiplicity, p.residual
        );
    }
    write(&a.output.out, &format!("{id}.spectrum.csv"), &spectrum_csv(&pairs))?;
    write(&a.output.out, &format!("{id}.fields.csv"), &fields_csv(&mesh, &pairs))?;
    Ok(0)
}

/// Exit code for the most severe verdict of a run.
fn exit_code(worst: Verdict, strict: bool) -> u8 {
    match worst {
        Verdict::Fail => 3,
        Verdict::HypothesesNotMet if strict => 4,
        Verdict::PassWithWarning if strict => 3,
        _ => 0,
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8, Failure> {
    if !(a.zero_tol > 0.0) || !(a.residual_tol > 0.0) {
        return Err(Failure::config("tolerances must be positive"));
    }
    if a.k < 2 {
        return Err(Failure::config("-k must be at least 2; eigenpair 1 is the constant mode"));
    }
    let (mesh, id) = load(&a.source)?;
    let dtn = build_dtn(&mesh)?;
    let pairs = dtn.spectrum(a.k)?;
    let sigmas: Vec<f64> = pairs.iter().map(|p| p.sigma).collect();
    let second = cluster_ranges(&sigmas)
        .into_iter()
        .find(|&(s, e)| s <= 1 && 1 < e)
        .expect("every index lies in a cluster");
    let opts = ReportOptions {
        zero_tol: a.zero_tol,
        residual_tol: a.residual_tol,
        mesh_id: id.clone(),
    };
    let mut reports = Vec::new();
    for pair in &pairs[1..] {
        let in_second = (second.0..second.1).contains(&(pair.k - 1));
        let report = build_report(&mesh, &dtn, pair, in_second, &opts)?;
        println!("eigenpair {} sigma {:.16e}", pair.k, pair.sigma);
        for (name, c) in &report.checks {
            println!("  {name:<10} {:>4} = {:<4} {:?}", c.lhs, c.rhs, c.verdict);
        }
        write(&a.output.out, &format!("{id}.k{}.report.json", pair.k), &report.to_json())?;
        let analysis = analyze(&mesh, &pair.u, a.zero_tol)?;
        let picture = svg::render(&mesh, &pair.u, &analysis)?;
        write(&a.output.out, &format!("{id}.k{}.svg", pair.k), &picture)?;
        reports.push(report);
    }
    let worst = reports.iter().map(IdentityReport::worst).max().unwrap_or(Verdict::Pass);
    Ok(exit_code(worst, a.strict))
}

fn cmd_convergence(a: &ConvergenceArgs) -> Result<u8, Failure> {
    let g = a.geometry.geometry()?;
    if !(a.zero_tol > 0.0) {
        return Err(Failure::config("tolerances must be positive"));
    }
    let table = convergence_study(g, &a.ladder, a.k)?;
    let mut csv = table.to_csv();
    csv.push_str("\nresolution,worst_verdict_u2\n");
    let opts = ReportOptions {
        zero_tol: a.zero_tol,
        ..ReportOptions::default()
    };
    for &res in &a.ladder {
        let mesh = generate(g, res)?;
        let dtn = build_dtn(&mesh)?;
        let pairs = dtn.spectrum(2)?;
        let report = build_report(&mesh, &dtn, &pairs[1], true, &opts)?;
        let verdict = serde_json::to_value(report.worst()).expect("verdict serializes");
        let _ = writeln!(csv, "{res},{}", verdict.as_str().unwrap_or_default());
    }
    for (i, r) in table.rates.iter().enumerate() {
        match r {
            Some(r) => println!("k {} rate {r:.3}", i + 1),
            None => println!("k {} exact", i + 1),
        }
    }
    write(&a.output.out, &format!("{}.convergence.csv", mesh_id(g, *a.ladder.last().unwrap())), &csv)?;
    let slow = table.slow();
    if slow.is_empty() {
        Ok(0)
    } else {
        eprintln!(
            "observed rate below {MIN_RATE} for eigenvalues {:?}",
            slow.iter().map(|i| i + 1).collect::<Vec<_>>()
        );
        Ok(3)
    }
}

fn cmd_oracle(a: &OracleArgs) -> Result<u8, Failure> {
    let g = a.geometry.geometry()?;
    let dump = oracle_dump(g, a.k)?;
    for e in &dump.eigenvalues {
        println!("k {} sigma {:.16e} multiplicity {}", e.k, e.sigma, e.multiplicity);
    }
    let json = serde_json::to_string_pretty(&dump).expect("oracle data serializes");
    let name = mesh_id(g, 0);
    let name = name.trim_end_matches("-res0");
    write(&a.output.out, &format!("{name}.oracle.json"), &json)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Mesh(a) => cmd_mesh(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Convergence(a) => cmd_convergence(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
