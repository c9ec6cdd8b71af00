//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::solve_cauchy;
use crate::io;
use crate::mesh::GraphMesh;
use crate::problem::ValidatedProblem;
use crate::variational::{extract_control, solve_damping};
use crate::verify::{convergence_study, interval_reduction_check, verify_trajectory, ConvergenceRow, MatchedEdges, VerificationReport};

/// Random perturbations tried by the optimality probe.
pub const PROBE_COUNT: usize = 100;

#[derive(Clone, Debug, Parser)]
#[command(name = "stardamp", version, about = "Minimal-energy damping on a star graph with pantograph delay")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Problem JSON.
    #[arg(long, global = true)]
    pub problem: Option<PathBuf>,
    /// Mesh spacing / integration step (coarsest level for `converge`).
    #[arg(long, global = true, default_value_t = 0.05)]
    pub h: f64,
    /// Tolerance for the pass/fail checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed of the optimality probes.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Also require alpha_1 = 1 and outgoing weights summing to 1.
    #[arg(long, global = true)]
    pub normalized_weights: bool,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Integrate the state equations for given controls; writes trajectory.csv.
    Simulate {
        /// Control CSV with columns edge,t,u.
        #[arg(long)]
        controls: PathBuf,
    },
    /// Compute the minimal-energy damping; writes trajectory.csv, control.csv, report.json.
    Damp,
    /// Check a trajectory; writes report.json.
    Verify {
        /// Trajectory CSV with columns edge,t,y.
        #[arg(long)]
        trajectory: PathBuf,
    },
    /// Solve on successively halved meshes; writes convergence.csv.
    Converge {
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Compare a matched two-edge problem with the single-interval problem; writes reduce.json.
    Reduce,
}

/// One pass/fail comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `"<="` or `">="`.
    pub relation: &'static str,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, relation: "<=", passed: value <= bound }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, relation: ">=", passed: value >= bound }
    }
}

#[derive(Serialize)]
struct DampReport<'a> {
    #[serde(rename = "J")]
    energy: f64,
    vertex_value: f64,
    h: f64,
    nodes: usize,
    residuals: &'a VerificationReport,
    checks: &'a [Check],
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    #[serde(flatten)]
    report: &'a VerificationReport,
    checks: &'a [Check],
}

#[derive(Serialize)]
struct ReduceReport<'a> {
    h: f64,
    interval_mismatch: f64,
    unmatched_interval_h: f64,
    unmatched_mismatch: f64,
    checks: &'a [Check],
}

/// Checks that hold exactly (up to roundoff) for a discrete minimiser at any mesh size.
fn discrete_checks(report: &VerificationReport, tol: f64) -> Vec<Check> {
    let mut checks = vec![
        Check::at_most("weak_residual_own", report.weak_residual_own, tol),
        Check::at_most("roundtrip_max_error", report.roundtrip_max_error, tol),
        Check::at_most("rest_violation", report.rest_violation, tol),
        Check::at_most("orthogonality", report.orthogonality, tol),
        Check::at_least("optimality_margin", report.optimality_margin, -tol),
    ];
    if let Some(m) = report.interval_mismatch {
        checks.push(Check::at_most("interval_mismatch", m, tol));
    }
    checks
}

fn converge_checks(rows: &[ConvergenceRow], tol: f64) -> Vec<Check> {
    let mut checks = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let label = |what: &str| format!("{what} h={} -> h={}", a.h, b.h);
        checks.push(Check::at_most(&label("J nonincreasing"), b.energy - a.energy, tol));
        checks.push(Check::at_most(&label("kirchhoff decreasing"), b.kirchhoff - a.kirchhoff, 0.0));
        checks.push(Check::at_most(&label("flux decreasing"), b.flux - a.flux, 0.0));
        checks.push(Check::at_most(&label("weak_residual decreasing"), b.weak_residual - a.weak_residual, 0.0));
    }
    checks
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("{} {}: {:e} {} {:e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.relation, c.bound);
    }
}

fn load_problem(config: &RunConfig) -> Result<ValidatedProblem> {
    let path = config.problem.as_deref().ok_or_else(|| Error::InvalidInput("--problem is required".into()))?;
    io::read_problem(path).map_err(|e| match e {
        Error::Io(err) => Error::InvalidInput(format!("--problem {}: {err}", path.display())),
        other => other,
    })
}

fn existing(flag: &str, path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{flag} {}: no such file", path.display())))
    }
}

/// Executes one subcommand. Returns `Ok(true)` when every check passed.
pub fn run(config: &RunConfig) -> Result<bool> {
    if !(config.h > 0.0 && config.h.is_finite()) {
        return Err(Error::InvalidInput(format!("--h must be positive, got {}", config.h)));
    }
    if config.tol.is_nan() || config.tol < 0.0 {
        return Err(Error::InvalidInput(format!("--tol must be nonnegative, got {}", config.tol)));
    }
    let problem = load_problem(config)?;
    fs::create_dir_all(&config.out)?;
    let out = |name: &str| config.out.join(name);
    let (h, tol) = (config.h, config.tol);

    let checks = match &config.command {
        Command::Simulate { controls } => {
            existing("--controls", controls)?;
            let u = io::read_controls_file(controls, problem.edge_count())?;
            io::write_trajectory_file(&out("trajectory.csv"), &solve_cauchy(&problem, &u, h)?)?;
            Vec::new()
        }
        Command::Damp => {
            let sol = solve_damping(&problem, &GraphMesh::build(&problem, h)?)?;
            let report = verify_trajectory(&problem, &sol.y, h, PROBE_COUNT, config.seed)?;
            let mut checks = vec![Check::at_most("linear_residual", sol.linear_residual, tol * sol.rhs_norm.max(1.0))];
            checks.extend(discrete_checks(&report, tol));
            io::write_trajectory_file(&out("trajectory.csv"), &sol.y)?;
            io::write_controls_file(&out("control.csv"), &extract_control(&problem, &sol.y)?)?;
            io::write_json(
                &out("report.json"),
                &DampReport {
                    energy: sol.energy,
                    vertex_value: sol.vertex_value,
                    h,
                    nodes: sol.y.mesh().node_count(),
                    residuals: &report,
                    checks: &checks,
                },
            )?;
            println!("J = {}\nvertex_value = {}", sol.energy, sol.vertex_value);
            checks
        }
        Command::Verify { trajectory } => {
            existing("--trajectory", trajectory)?;
            let y = io::read_trajectory_file(trajectory)?;
            let report = verify_trajectory(&problem, &y, h, PROBE_COUNT, config.seed)?;
            let checks = discrete_checks(&report, tol);
            io::write_json(&out("report.json"), &VerifyReport { report: &report, checks: &checks })?;
            checks
        }
        Command::Converge { levels } => {
            let hs: Vec<f64> = (0..*levels).map(|k| h / f64::from(1u32 << k.min(30))).collect();
            let rows = convergence_study(&problem, &hs)?;
            io::write_table(fs::File::create(out("convergence.csv"))?, &rows)?;
            io::write_table(std::io::stdout(), &rows)?;
            converge_checks(&rows, tol)
        }
        Command::Reduce => {
            let case = MatchedEdges::from_problem(&problem).ok_or_else(|| {
                Error::InvalidInput("reduce needs two edges with equal b, c and alpha".into())
            })?;
            let matched = interval_reduction_check(&case, h, None)?;
            let interval_h = 0.7 * h;
            let unmatched = interval_reduction_check(&case, h, Some(interval_h))?;
            let checks = vec![Check::at_most("interval_mismatch", matched, tol)];
            io::write_json(
                &out("reduce.json"),
                &ReduceReport {
                    h,
                    interval_mismatch: matched,
                    unmatched_interval_h: interval_h,
                    unmatched_mismatch: unmatched,
                    checks: &checks,
                },
            )?;
            println!("interval_mismatch = {matched:e}\nunmatched_mismatch = {unmatched:e} (interval h = {interval_h})");
            checks
        }
    };
    let mut checks = checks;
    if config.normalized_weights {
        let ok = problem.weights_are_normalized(1e-12);
        checks.push(Check::at_most("weights_normalized", if ok { 0.0 } else { 1.0 }, 0.0));
    }
    print_checks(&checks);
    Ok(checks.iter().all(|c| c.passed))
}
