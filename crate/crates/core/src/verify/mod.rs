//! Checks that a trajectory is the optimal damping trajectory.
//!
//! The variational solver works with the form `B` as written. The checks here use other
//! routes to the same facts: the vertex condition in derivative form and in flux form, the
//! weak form after the change of variables in the delayed terms, a forward simulation of the
//! extracted controls, and an independent interval solver for the two-edge matched case.

pub mod interval;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{ell_stencil, solve_cauchy, ControlProfile};
use crate::mesh::{gauss_points, kink_points, merge_points, tol_for, GraphGridFunction, GraphMesh, Side};
use crate::problem::{EdgeSpec, StarProblem, ValidatedProblem};
use crate::variational::{bilinear, energy, extract_control, solve_damping, SpaceW};

pub use interval::{IntervalProblem, IntervalSolution};

/// `|alpha_1 ell_1 y(T1-) - sum_j alpha_j ell_j y(0+)|`.
pub fn flux_balance_residual(problem: &ValidatedProblem, y: &GraphGridFunction) -> f64 {
    let mesh = y.mesh();
    let t1 = problem.vertex_time();
    let incoming = problem.edge(0).weight * ell_stencil(problem, mesh, 0, t1, Side::Left).apply(y);
    let outgoing: f64 = (1..problem.edge_count())
        .map(|j| problem.edge(j).weight * ell_stencil(problem, mesh, j, 0.0, Side::Right).apply(y))
        .sum();
    (incoming - outgoing).abs()
}

/// `|alpha_1 y_1'(T1-) - sum_j alpha_j y_j'(0+) + beta y_1(T1) + gamma y_1(T1/q)|`, with
/// one-sided derivatives taken from the cells adjacent to the vertex.
pub fn kirchhoff_residual(problem: &ValidatedProblem, y: &GraphGridFunction) -> f64 {
    let t1 = problem.vertex_time();
    let (beta, gamma) = problem.beta_gamma();
    let mut total = problem.edge(0).weight * y.slope(0, t1, Side::Left);
    for j in 1..problem.edge_count() {
        total -= problem.edge(j).weight * y.slope(j, 0.0, Side::Right);
    }
    total += beta * y.eval(0, t1) + gamma * y.eval(0, problem.compressed_vertex_time());
    total.abs()
}

/// Outcome of simulating the extracted controls forward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RoundTrip {
    /// Largest `|y_sim - y|` over both node sets.
    pub max_error: f64,
    /// Largest `|y_sim|` on the rest intervals `[l_j, T_j]` of the outgoing edges.
    pub rest_violation: f64,
}

pub fn roundtrip_check(
    problem: &ValidatedProblem,
    y: &GraphGridFunction,
    controls: &ControlProfile,
    h: f64,
) -> Result<RoundTrip> {
    let sim = solve_cauchy(problem, controls, h)?;
    let max_error = y.max_abs_diff(&sim)?;
    let mut rest_violation: f64 = 0.0;
    for j in 1..problem.edge_count() {
        let onset = problem.rest_onset(j);
        rest_violation = rest_violation.max(sim.eval(j, onset).abs());
        for &t in sim.mesh().nodes(j).iter().filter(|&&t| t >= onset) {
            rest_violation = rest_violation.max(sim.eval(j, t).abs());
        }
    }
    Ok(RoundTrip { max_error, rest_violation })
}

/// Breakpoints on edge `e` between which every integrand of the transformed weak form is a
/// polynomial of degree at most two.
fn transformed_breaks(problem: &ValidatedProblem, y: &GraphGridFunction, test: &GraphMesh, e: usize) -> Vec<f64> {
    let q = problem.q();
    let t1 = problem.vertex_time();
    let horizon = problem.horizon(e);
    let own = kink_points(problem, y.mesh(), e);
    let mut pts = own.clone();
    pts.extend_from_slice(test.nodes(e));
    if e == 0 {
        let corner = problem.compressed_vertex_time();
        pts.push(corner);
        pts.extend(own.iter().map(|&s| s / q));
        for k in 1..problem.edge_count() {
            pts.extend(
                kink_points(problem, y.mesh(), k)
                    .into_iter()
                    .map(|s| (s + t1) / q)
                    .filter(|&t| t >= corner && t <= t1),
            );
        }
    } else {
        let onset = problem.rest_onset(e);
        let handover = problem.handover_time();
        pts.push(onset);
        pts.extend(own.iter().map(|&s| (s - handover) / q).filter(|&t| t >= 0.0 && t <= onset));
    }
    merge_points(pts, tol_for(horizon))
}

/// Weak-form residuals of `y` against every hat of `W` on `test`, evaluated through the
/// transformed form
///
/// `sum_j int alpha_j ell_j y w_j' + (alpha_j b_j ell_j y + ell~_j y) w_j`,
///
/// where the delayed test values have been moved onto `y` by a change of variables:
/// `ell~_1 y(t) = q alpha_1 c_1 ell_1 y(qt)` before `T1/q` and
/// `q sum_k alpha_k c_k ell_k y(qt - T1)` after it;
/// `ell~_j y(t) = q alpha_j c_j ell_j y(qt + (q-1)T1)` before `l_j` and zero after.
pub fn weak_residual_tilde_vector(problem: &ValidatedProblem, y: &GraphGridFunction, test: &GraphMesh) -> Result<Vec<f64>> {
    y.mesh().check_matches(problem)?;
    let space = SpaceW::new(problem, test)?;
    let q = problem.q();
    let t1 = problem.vertex_time();
    let handover = problem.handover_time();
    let ell = |e: usize, t: f64| ell_stencil(problem, y.mesh(), e, t, Side::Right).apply(y);
    let tilde = |e: usize, t: f64| -> f64 {
        if e == 0 {
            if t < problem.compressed_vertex_time() {
                let s = problem.edge(0);
                q * s.weight * s.delay_coeff * ell(0, q * t)
            } else {
                (1..problem.edge_count())
                    .map(|k| {
                        let s = problem.edge(k);
                        q * s.weight * s.delay_coeff * ell(k, q * t - t1)
                    })
                    .sum()
            }
        } else if t < problem.rest_onset(e) {
            let s = problem.edge(e);
            q * s.weight * s.delay_coeff * ell(e, q * t + handover)
        } else {
            0.0
        }
    };
    let breaks: Vec<Vec<f64>> = (0..problem.edge_count()).map(|e| transformed_breaks(problem, y, test, e)).collect();

    let mut out = Vec::with_capacity(space.dim());
    for d in 0..space.dim() {
        let mut total = 0.0;
        for &(e, i) in space.support(d) {
            let spec = problem.edge(e);
            let nodes = test.nodes(e);
            let tol = tol_for(problem.horizon(e));
            let cells = [(i > 0).then(|| (nodes[i - 1], nodes[i], true)), (i + 1 < nodes.len()).then(|| (nodes[i], nodes[i + 1], false))];
            for (a, b, rising) in cells.into_iter().flatten() {
                let len = b - a;
                let slope = if rising { 1.0 / len } else { -1.0 / len };
                let hat = |t: f64| if rising { (t - a) / len } else { (b - t) / len };
                let br = &breaks[e];
                let lo = br.partition_point(|&x| x <= a + tol);
                let hi = br.partition_point(|&x| x < b - tol);
                let mut pts = Vec::with_capacity(hi.saturating_sub(lo) + 2);
                pts.push(a);
                pts.extend_from_slice(&br[lo..hi.max(lo)]);
                pts.push(b);
                for w in pts.windows(2) {
                    for (t, wt) in gauss_points(w[0], w[1]) {
                        let g = ell(e, t);
                        total += wt * (spec.weight * g * slope + (spec.weight * spec.drift * g + tilde(e, t)) * hat(t));
                    }
                }
            }
        }
        out.push(total);
    }
    Ok(out)
}

/// Largest weak-form residual over the hats of `W` on `test`; see [`weak_residual_tilde_vector`].
pub fn weak_residual_tilde(problem: &ValidatedProblem, y: &GraphGridFunction, test: &GraphMesh) -> Result<f64> {
    Ok(weak_residual_tilde_vector(problem, y, test)?.into_iter().fold(0.0, |m, r| m.max(r.abs())))
}

/// Two-edge star whose edges share `b` and `c`: its trajectory concatenates into the
/// solution of the single-interval problem on `[0, T1 + T2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchedEdges {
    pub q: f64,
    pub t1: f64,
    pub t2: f64,
    pub drift: f64,
    pub delay_coeff: f64,
    pub y0: f64,
}

impl MatchedEdges {
    /// Recognises a two-edge problem with equal coefficients and equal weights.
    pub fn from_problem(problem: &ValidatedProblem) -> Option<Self> {
        let e = problem.edges();
        (e.len() == 2 && e[0].drift == e[1].drift && e[0].delay_coeff == e[1].delay_coeff && e[0].weight == e[1].weight)
            .then(|| Self {
                q: problem.q(),
                t1: e[0].horizon,
                t2: e[1].horizon,
                drift: e[0].drift,
                delay_coeff: e[0].delay_coeff,
                y0: problem.y0(),
            })
    }

    pub fn problem(&self) -> Result<ValidatedProblem> {
        StarProblem {
            q: self.q,
            y0: self.y0,
            edges: vec![
                EdgeSpec::new(self.t1, self.drift, self.delay_coeff, 1.0),
                EdgeSpec::new(self.t2, self.drift, self.delay_coeff, 1.0),
            ],
        }
        .validate()
    }

    pub fn interval(&self) -> IntervalProblem {
        IntervalProblem {
            q: self.q,
            horizon: self.t1 + self.t2,
            drift: self.drift,
            delay_coeff: self.delay_coeff,
            y0: self.y0,
        }
    }

    /// Interval nodes obtained by concatenating the two edge meshes.
    pub fn concatenated_nodes(&self, mesh: &GraphMesh) -> Vec<f64> {
        let mut nodes = mesh.nodes(0).to_vec();
        nodes.extend(mesh.nodes(1)[1..].iter().map(|&t| self.t1 + t));
        let horizon = self.t1 + self.t2;
        let mut nodes = merge_points(nodes, tol_for(horizon));
        *nodes.last_mut().unwrap() = horizon;
        nodes
    }

    /// Largest difference between the concatenated graph trajectory and an interval solution.
    pub fn mismatch(&self, y: &GraphGridFunction, reference: &IntervalSolution) -> f64 {
        let graph = |t: f64| if t <= self.t1 { y.eval(0, t) } else { y.eval(1, t - self.t1) };
        let mut pts = self.concatenated_nodes(y.mesh());
        pts.extend_from_slice(&reference.nodes);
        pts.iter().map(|&t| (graph(t) - reference.eval(t)).abs()).fold(0.0, f64::max)
    }
}

/// Solves the matched two-edge star on a mesh of spacing `h` and the interval problem either
/// on the concatenated mesh (`interval_h = None`) or on its own mesh of spacing `interval_h`,
/// and returns the largest pointwise mismatch.
pub fn interval_reduction_check(case: &MatchedEdges, h: f64, interval_h: Option<f64>) -> Result<f64> {
    let problem = case.problem()?;
    let mesh = GraphMesh::build(&problem, h)?;
    let graph = solve_damping(&problem, &mesh)?;
    let interval = case.interval();
    let nodes = match interval_h {
        None => case.concatenated_nodes(&mesh),
        Some(ih) if ih > 0.0 && ih.is_finite() => interval.mesh(ih),
        Some(ih) => return Err(Error::InvalidStep(ih)),
    };
    let reference = interval.solve(&nodes)?;
    Ok(case.mismatch(&graph.y, &reference))
}

/// Random perturbations `w` of a trajectory inside the discrete space `W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalityProbe {
    pub probes: usize,
    /// Largest `|B(y, w)| / |w|_{W^1_2}`.
    pub max_orthogonality: f64,
    /// Smallest `J(y + w) - J(y)`.
    pub min_margin: f64,
}

pub fn probe_optimality(problem: &ValidatedProblem, y: &GraphGridFunction, probes: usize, seed: u64) -> Result<OptimalityProbe> {
    let space = SpaceW::new(problem, y.mesh())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = energy(problem, y)?;
    let mut max_orthogonality: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for _ in 0..probes {
        let coeffs: Vec<f64> = (0..space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = space.reconstruct(&coeffs)?;
        let norm = w.sobolev_norm();
        if norm == 0.0 {
            continue;
        }
        max_orthogonality = max_orthogonality.max(bilinear(problem, y, &w)?.abs() / norm);
        min_margin = min_margin.min(energy(problem, &y.add_scaled(1.0, &w)?)? - base);
    }
    Ok(OptimalityProbe { probes, max_orthogonality, min_margin })
}

/// One refinement level of [`convergence_study`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub energy: f64,
    pub vertex_value: f64,
    pub kirchhoff: f64,
    pub flux: f64,
    pub roundtrip_max_error: f64,
    pub rest_violation: f64,
    pub weak_residual: f64,
}

/// Solves on `GraphMesh::build(problem, h)` for each `h` and records energy and residuals.
/// The weak residual is tested against hats of the once-bisected mesh; the round trip uses
/// step `h`.
pub fn convergence_study(problem: &ValidatedProblem, h_list: &[f64]) -> Result<Vec<ConvergenceRow>> {
    h_list
        .iter()
        .map(|&h| {
            let mesh = GraphMesh::build(problem, h)?;
            let sol = solve_damping(problem, &mesh)?;
            let controls = extract_control(problem, &sol.y)?;
            let rt = roundtrip_check(problem, &sol.y, &controls, h)?;
            Ok(ConvergenceRow {
                h,
                energy: sol.energy,
                vertex_value: sol.vertex_value,
                kirchhoff: kirchhoff_residual(problem, &sol.y),
                flux: flux_balance_residual(problem, &sol.y),
                roundtrip_max_error: rt.max_error,
                rest_violation: rt.rest_violation,
                weak_residual: weak_residual_tilde(problem, &sol.y, &mesh.refine())?,
            })
        })
        .collect()
}

/// Everything [`verify_trajectory`] measures about a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub energy: f64,
    pub control_energy: f64,
    pub kirchhoff_residual: f64,
    pub flux_residual: f64,
    pub roundtrip_max_error: f64,
    pub rest_violation: f64,
    /// Smallest energy increase over the random probes (negative means `y` is not optimal).
    pub optimality_margin: f64,
    pub orthogonality: f64,
    /// Transformed weak residual against the trajectory's own hats.
    pub weak_residual_own: f64,
    /// Transformed weak residual against the hats of the bisected mesh.
    pub weak_residual_fine: f64,
    pub interval_mismatch: Option<f64>,
}

/// Runs every check on `y`; `h` is the forward-simulation step, `probes` and `seed` drive the
/// optimality probes.
pub fn verify_trajectory(problem: &ValidatedProblem, y: &GraphGridFunction, h: f64, probes: usize, seed: u64) -> Result<VerificationReport> {
    let controls = extract_control(problem, y)?;
    let rt = roundtrip_check(problem, y, &controls, h)?;
    let probe = probe_optimality(problem, y, probes, seed)?;
    let interval_mismatch = match MatchedEdges::from_problem(problem) {
        Some(case) => {
            let reference = case.interval().solve(&case.concatenated_nodes(y.mesh()))?;
            Some(case.mismatch(y, &reference))
        }
        None => None,
    };
    Ok(VerificationReport {
        energy: energy(problem, y)?,
        control_energy: controls.weighted_energy(problem),
        kirchhoff_residual: kirchhoff_residual(problem, y),
        flux_residual: flux_balance_residual(problem, y),
        roundtrip_max_error: rt.max_error,
        rest_violation: rt.rest_violation,
        optimality_margin: if probe.min_margin.is_finite() { probe.min_margin } else { 0.0 },
        orthogonality: probe.max_orthogonality,
        weak_residual_own: weak_residual_tilde(problem, y, y.mesh())?,
        weak_residual_fine: weak_residual_tilde(problem, y, &y.mesh().refine())?,
        interval_mismatch,
    })
}
