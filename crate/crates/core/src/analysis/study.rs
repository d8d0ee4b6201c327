//! Convergence studies over refinement levels of a mesh family.

use super::{compute_errors, solve_problem, ManufacturedProblem, SolveConfig};
use crate::error::{Result, VemError};
use crate::mesh::{MeshFamily, MeshFamilyConfig};
use std::fmt::Write;

/// R² below which a fit is flagged as pre-asymptotic.
pub const ASYMPTOTIC_R2: f64 = 0.98;

#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    /// Grid resolution `n`.
    pub level: usize,
    pub h_max: f64,
    pub ndof: usize,
    pub energy_err: f64,
    pub h1_err: f64,
    pub l2_err: f64,
    pub min_rho_f: f64,
    pub min_rho_k: f64,
    pub cg_iters: usize,
}

/// Least-squares fit `log e = a + slope · log h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Slope between the two finest levels.
    pub last_pair: f64,
}

impl RateFit {
    pub fn is_asymptotic(&self) -> bool {
        self.r_squared >= ASYMPTOTIC_R2
    }
}

pub fn fit_rate(h: &[f64], e: &[f64]) -> RateFit {
    let n = h.len() as f64;
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let m = x.len();
    let last_pair = (y[m - 1] - y[m - 2]) / (x[m - 1] - x[m - 2]);
    RateFit {
        slope,
        intercept,
        r_squared,
        last_pair,
    }
}

#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub family: MeshFamilyConfig,
    pub k: usize,
    pub problem: &'static str,
    pub config: SolveConfig,
    /// Sorted by decreasing `h_max`.
    pub levels: Vec<LevelRecord>,
    pub energy_rate: RateFit,
    pub h1_rate: RateFit,
    pub l2_rate: RateFit,
}

pub const CSV_HEADER: &str = "level,h_max,ndof,energy_err,h1_err,l2_err,min_rho_F,min_rho_K,cg_iters";

impl ErrorReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.levels {
            writeln!(
                s,
                "{},{:.12e},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
                r.level, r.h_max, r.ndof, r.energy_err, r.h1_err, r.l2_err, r.min_rho_f, r.min_rho_k, r.cg_iters
            )
            .unwrap();
        }
        s
    }

    pub fn family_label(&self) -> String {
        let f = &self.family;
        match f.family {
            MeshFamily::Slit => format!("slit ({:?})", f.eps_rule),
            MeshFamily::Perturbed => format!("perturbed (magnitude {}, seed {})", f.magnitude, f.seed),
            MeshFamily::Cube => "cube".into(),
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "## {} family, k = {}, problem {}, {} stabilization (c_eps = {})\n",
            self.family_label(),
            self.k,
            self.problem,
            self.config.local.variant,
            self.config.local.c_eps
        )
        .unwrap();
        s.push_str("| n | h_max | DOFs | energy | broken H1 | L2 | min rho_F | min rho_K | CG its |\n");
        s.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for r in &self.levels {
            writeln!(
                s,
                "| {} | {:.4e} | {} | {:.4e} | {:.4e} | {:.4e} | {:.4e} | {:.4e} | {} |",
                r.level, r.h_max, r.ndof, r.energy_err, r.h1_err, r.l2_err, r.min_rho_f, r.min_rho_k, r.cg_iters
            )
            .unwrap();
        }
        s.push_str("\n| error | rate (LSQ) | R² | last pair | |\n|---|---|---|---|---|\n");
        for (name, fit) in [("energy", &self.energy_rate), ("broken H1", &self.h1_rate), ("L2", &self.l2_rate)] {
            let flag = if fit.is_asymptotic() { "" } else { "non-asymptotic" };
            writeln!(
                s,
                "| {name} | {:.3} | {:.4} | {:.3} | {flag} |",
                fit.slope, fit.r_squared, fit.last_pair
            )
            .unwrap();
        }
        s
    }
}

/// Runs assemble → solve → errors on every level of the family.
pub fn convergence_study(
    family: &MeshFamilyConfig,
    cfg: &SolveConfig,
    problem: &ManufacturedProblem,
) -> Result<ErrorReport> {
    family.validate()?;
    if family.levels.len() < 3 {
        return Err(VemError::Parameter(format!(
            "a convergence study needs at least 3 levels, got {}",
            family.levels.len()
        )));
    }
    let mut levels = Vec::with_capacity(family.levels.len());
    for (i, &n) in family.levels.iter().enumerate() {
        let rec = run_level(family, cfg, problem, n).map_err(|e| VemError::InLevel {
            level: i,
            source: Box::new(e),
        })?;
        levels.push(rec);
    }
    let h: Vec<f64> = levels.iter().map(|r| r.h_max).collect();
    let fit = |f: fn(&LevelRecord) -> f64| fit_rate(&h, &levels.iter().map(f).collect::<Vec<_>>());
    Ok(ErrorReport {
        family: family.clone(),
        k: cfg.k,
        problem: problem.name,
        config: *cfg,
        energy_rate: fit(|r| r.energy_err),
        h1_rate: fit(|r| r.h1_err),
        l2_rate: fit(|r| r.l2_err),
        levels,
    })
}

fn run_level(family: &MeshFamilyConfig, cfg: &SolveConfig, problem: &ManufacturedProblem, n: usize) -> Result<LevelRecord> {
    let mesh = family.build(n)?;
    let stats = mesh.stats();
    let sol = solve_problem(&mesh, cfg, problem)?;
    let err = compute_errors(&mesh, &sol, problem, cfg.quad_order())?;
    Ok(LevelRecord {
        level: n,
        h_max: stats.h_max,
        ndof: sol.system.len(),
        energy_err: err.energy,
        h1_err: err.h1,
        l2_err: err.l2,
        min_rho_f: stats.min_rho_face,
        min_rho_k: stats.min_rho_cell,
        cg_iters: sol.stats.iterations,
    })
}
