//! `vem`: mesh generation, single solves, error-equation checks and
//! convergence studies for the conforming virtual element method.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage, 3 solver, 4 identity
//! threshold, 5 rate threshold.

mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vem::analysis::{
    compute_errors, convergence_study, identity_quad_order, solve_problem, verify_error_equation, ManufacturedProblem,
    SolveConfig,
};
use vem::local::StabilizationVariant;
use vem::mesh::{io, EpsRule, MeshFamily, MeshFamilyConfig, PolyMesh};
use vem::VemError;

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_IDENTITY: u8 = 4;
const EXIT_RATE: u8 = 5;

#[derive(Parser)]
#[command(name = "vem", version, about = "Conforming virtual elements for the 3D Poisson problem")]
#[command(args_override_self = true)]
struct Cli {
    /// Worker threads for assembly and error evaluation (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// key = value file mirroring the long flags; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a structured mesh of the unit cube.
    GenMesh(GenMeshArgs),
    /// Solve a manufactured problem and report the errors.
    Solve(SolveArgs),
    /// Check the error equation with random test functions.
    VerifyIdentity(IdentityArgs),
    /// Convergence study over refinement levels.
    Study(StudyArgs),
}

#[derive(Args)]
struct GenMeshArgs {
    family: MeshFamily,
    #[command(flatten)]
    grid: GridArgs,
    /// Output file (default: <family><n>.pm).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Cells per axis.
    #[arg(long)]
    n: Option<usize>,
    /// Slit aperture.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Vertex perturbation relative to h.
    #[arg(long, default_value_t = 0.1)]
    magnitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct MeshSource {
    /// Mesh file.
    #[arg(long, conflicts_with = "family")]
    mesh: Option<PathBuf>,
    /// Generate the mesh instead of reading it.
    #[arg(long)]
    family: Option<MeshFamily>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct Discretization {
    /// Polynomial order.
    #[arg(long, default_value_t = 1, value_parser = parse_order)]
    k: usize,
    /// Built-in problem: poly1, poly2, quadratic, cubic, sinsinsin.
    #[arg(long, default_value = "sinsinsin")]
    problem: String,
    #[arg(long, default_value_t = StabilizationVariant::New)]
    stab: StabilizationVariant,
    /// Face weight factor of the boundary stabilization.
    #[arg(long, default_value_t = 1.0)]
    c_eps: f64,
    /// Relative residual tolerance of CG.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    /// Quadrature order (default 2k + 4; 2k + 8 for verify-identity).
    #[arg(long)]
    quad_order: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: MeshSource,
    #[command(flatten)]
    disc: Discretization,
    /// DOF vector output.
    #[arg(short, long, default_value = "solution.dofs")]
    output: PathBuf,
    /// Write the assembled matrix in Matrix Market format.
    #[arg(long, value_name = "FILE")]
    dump_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct IdentityArgs {
    #[command(flatten)]
    source: MeshSource,
    #[command(flatten)]
    disc: Discretization,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Seed of the random test functions.
    #[arg(long, default_value_t = 0)]
    trial_seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    threshold: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum EpsRuleArg {
    /// eps = scale * h
    H,
    /// eps = scale * h^2
    H2,
    /// eps fixed by --eps
    Fixed,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    family: MeshFamily,
    /// Comma-separated grid resolutions.
    #[arg(long, value_parser = parse_levels)]
    levels: Levels,
    #[arg(long, value_enum, default_value = "h")]
    eps_rule: EpsRuleArg,
    /// Scale of the aperture rule (default 0.5 for h, 1 for h2).
    #[arg(long)]
    eps_scale: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    magnitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    disc: Discretization,
    /// Report directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Debug)]
struct Levels(Vec<usize>);

fn parse_levels(s: &str) -> Result<Levels, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("invalid level '{t}'")))
        .collect::<Result<Vec<_>, _>>()
        .map(Levels)
}

fn parse_order(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k @ 1..=3) => Ok(k),
        _ => Err(format!("order must be 1, 2 or 3, got '{s}'")),
    }
}

enum Failure {
    Vem(VemError),
    Usage(String),
    Other(String),
    Threshold(u8, String),
}

impl From<VemError> for Failure {
    fn from(e: VemError) -> Self {
        Failure::Vem(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Vem(e.into())
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(EXIT_OTHER);
        }
    }
    let result = match cli.command {
        Command::GenMesh(a) => gen_mesh(a),
        Command::Solve(a) => solve(a),
        Command::VerifyIdentity(a) => verify_identity(a),
        Command::Study(a) => study(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_OTHER)
        }
        Err(Failure::Threshold(code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
        Err(Failure::Vem(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.root() {
                VemError::Parameter(_) => EXIT_USAGE,
                VemError::SolverDiverged { .. } => EXIT_SOLVER,
                _ => EXIT_OTHER,
            })
        }
    }
}

fn build_mesh(family: MeshFamily, grid: &GridArgs) -> Result<(PolyMesh, usize), Failure> {
    let n = grid
        .n
        .ok_or_else(|| Failure::Usage(format!("--n is required to generate a {family} mesh")))?;
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let mut cfg = MeshFamilyConfig::new(family, vec![n]);
    cfg.eps_rule = EpsRule::Fixed(grid.eps);
    cfg.magnitude = grid.magnitude;
    cfg.seed = grid.seed;
    cfg.validate()?;
    Ok((cfg.build(n)?, n))
}

fn load(source: &MeshSource) -> Result<PolyMesh, Failure> {
    match (&source.mesh, source.family) {
        (Some(path), _) => io::load_mesh(path).map_err(|e| match e {
            VemError::Io(err) => Failure::Other(format!("cannot read mesh '{}': {err}", path.display())),
            other => Failure::Vem(other),
        }),
        (None, Some(f)) => Ok(build_mesh(f, &source.grid)?.0),
        (None, None) => Err(Failure::Usage("give either --mesh <file> or --family <name> --n <n>".into())),
    }
}

fn solve_config(d: &Discretization) -> Result<SolveConfig, Failure> {
    if d.c_eps.is_nan() || d.c_eps <= 0.0 {
        return Err(Failure::Usage(format!("--c-eps must be positive, got {}", d.c_eps)));
    }
    if d.tol.is_nan() || d.tol <= 0.0 {
        return Err(Failure::Usage(format!("--tol must be positive, got {}", d.tol)));
    }
    let mut cfg = SolveConfig::new(d.k);
    cfg.local.variant = d.stab;
    cfg.local.c_eps = d.c_eps;
    cfg.solver.tol = d.tol;
    cfg.solver.max_iter = d.max_iter;
    cfg.quad_order = d.quad_order;
    Ok(cfg)
}

fn gen_mesh(a: GenMeshArgs) -> CliResult {
    let (mesh, n) = build_mesh(a.family, &a.grid)?;
    let path = a.output.unwrap_or_else(|| PathBuf::from(format!("{}{n}.pm", a.family)));
    std::fs::write(&path, io::write_mesh(&mesh))?;
    let s = mesh.stats();
    println!("wrote {}", path.display());
    println!(
        "vertices={} edges={} faces={} cells={} boundary_faces={} neumann_faces={} max_faces_per_cell={}",
        s.vertices, s.edges, s.faces, s.cells, s.boundary_faces, s.neumann_faces, s.max_faces_per_cell
    );
    println!(
        "h_max={:.6e} min_rho_F={:.6e} min_rho_K={:.6e}",
        s.h_max, s.min_rho_face, s.min_rho_cell
    );
    Ok(())
}

fn write_dofs(path: &Path, k: usize, u: &[f64]) -> std::io::Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# k={k} ndof={}", u.len());
    for v in u {
        let _ = writeln!(s, "{v:e}");
    }
    std::fs::write(path, s)
}

fn solve(a: SolveArgs) -> CliResult {
    let mesh = load(&a.source)?;
    let cfg = solve_config(&a.disc)?;
    let problem = ManufacturedProblem::builtin(&a.disc.problem)?;
    let sol = solve_problem(&mesh, &cfg, &problem)?;
    let err = compute_errors(&mesh, &sol, &problem, cfg.quad_order())?;
    write_dofs(&a.output, cfg.k, &sol.u_h)?;
    if let Some(p) = &a.dump_matrix {
        let file = std::io::BufWriter::new(std::fs::File::create(p)?);
        sol.system.matrix.write_matrix_market(file)?;
    }
    println!(
        "energy_err={:.6e} h1_err={:.6e} l2_err={:.6e} ndof={} free={} cg_iters={} residual={:.3e} max_faces_per_cell={}",
        err.energy,
        err.h1,
        err.l2,
        sol.system.len(),
        sol.system.free_dofs().len(),
        sol.stats.iterations,
        sol.stats.relative_residual,
        mesh.stats().max_faces_per_cell
    );
    Ok(())
}

fn verify_identity(a: IdentityArgs) -> CliResult {
    let mesh = load(&a.source)?;
    let mut cfg = solve_config(&a.disc)?;
    cfg.quad_order = Some(a.disc.quad_order.unwrap_or(identity_quad_order(cfg.k)));
    let problem = ManufacturedProblem::builtin(&a.disc.problem)?;
    let sol = solve_problem(&mesh, &cfg, &problem)?;
    let r = verify_error_equation(&mesh, &sol, &problem, a.trials, a.trial_seed, cfg.quad_order())?;
    println!(
        "residual={:.6e} max_relative={:.6e} max_absolute={:.6e} max_side={:.6e} trials={} quad_order={}",
        r.residual(),
        r.max_relative,
        r.max_absolute,
        r.max_side,
        r.trials,
        cfg.quad_order()
    );
    if r.residual().is_nan() || r.residual() > a.threshold {
        return Err(Failure::Threshold(
            EXIT_IDENTITY,
            format!("identity residual {:.3e} exceeds threshold {:.3e}", r.residual(), a.threshold),
        ));
    }
    Ok(())
}

fn study(a: StudyArgs) -> CliResult {
    let cfg = solve_config(&a.disc)?;
    let problem = ManufacturedProblem::builtin(&a.disc.problem)?;
    let mut fam = MeshFamilyConfig::new(a.family, a.levels.0.clone());
    fam.eps_rule = match a.eps_rule {
        EpsRuleArg::H => EpsRule::Linear(a.eps_scale.unwrap_or(0.5)),
        EpsRuleArg::H2 => EpsRule::Quadratic(a.eps_scale.unwrap_or(1.0)),
        EpsRuleArg::Fixed => EpsRule::Fixed(a.eps),
    };
    fam.magnitude = a.magnitude;
    fam.seed = a.seed;
    let rep = convergence_study(&fam, &cfg, &problem)?;

    std::fs::create_dir_all(&a.out)?;
    let stem = format!("study_{}_k{}_{}", a.family, cfg.k, problem.name);
    let csv = a.out.join(format!("{stem}.csv"));
    let md = a.out.join(format!("{stem}.md"));
    std::fs::write(&csv, rep.to_csv())?;
    std::fs::write(&md, rep.to_markdown())?;
    println!("wrote {} {}", csv.display(), md.display());
    for (name, fit) in [("energy", rep.energy_rate), ("h1", rep.h1_rate), ("l2", rep.l2_rate)] {
        println!(
            "{name}_rate={:.4} r2={:.4} last_pair={:.4}{}",
            fit.slope,
            fit.r_squared,
            fit.last_pair,
            if fit.is_asymptotic() { "" } else { " non-asymptotic" }
        );
    }
    let gate = 0.9 * cfg.k as f64;
    if rep.energy_rate.slope.is_nan() || rep.energy_rate.slope < gate {
        return Err(Failure::Threshold(
            EXIT_RATE,
            format!("energy rate {:.3} below {gate:.2}", rep.energy_rate.slope),
        ));
    }
    Ok(())
}
