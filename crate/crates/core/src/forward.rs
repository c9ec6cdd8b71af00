//! Forward (Cauchy) solver for given controls, the operators `ell_j`, and the analytic
//! pantograph series used as an oracle.

use crate::error::{Error, Result};
use crate::mesh::{integrate_pw, locate_in, merge_points, tol_for, GraphGridFunction, GraphMesh, Side};
use crate::problem::ValidatedProblem;

/// `ell_j y(t)` as a linear combination of four nodal values of `y`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EllStencil {
    /// `(edge, node, coefficient)`.
    pub terms: [(usize, usize, f64); 4],
}

impl EllStencil {
    pub fn apply(&self, y: &GraphGridFunction) -> f64 {
        self.terms.iter().map(|&(e, i, w)| w * y.values(e)[i]).sum()
    }
}

/// Builds the stencil of `ell_j` at local time `t`; `side` picks the cell for the derivative.
pub(crate) fn ell_stencil(problem: &ValidatedProblem, mesh: &GraphMesh, j: usize, t: f64, side: Side) -> EllStencil {
    let spec = problem.edge(j);
    let (cell, theta) = mesh.locate(j, t, side);
    let nodes = mesh.nodes(j);
    let inv_h = 1.0 / (nodes[cell + 1] - nodes[cell]);
    let target = problem.delay_argument_unchecked(j, t);
    let (dcell, dtheta) = mesh.locate(target.edge, target.local_time, Side::Right);
    let c = spec.delay_coeff;
    EllStencil {
        terms: [
            (j, cell, -inv_h + spec.drift * (1.0 - theta)),
            (j, cell + 1, inv_h + spec.drift * theta),
            (target.edge, dcell, c * (1.0 - dtheta)),
            (target.edge, dcell + 1, c * dtheta),
        ],
    }
}

fn check_time(problem: &ValidatedProblem, j: usize, t: f64) -> Result<f64> {
    let horizon = problem.horizon(j);
    let tol = tol_for(horizon);
    if !(t >= -tol && t <= horizon + tol) {
        return Err(Error::TimeOutOfRange { edge: j, t, horizon });
    }
    Ok(t.clamp(0.0, horizon))
}

/// `ell_j y(t) = y_j'(t) + b_j y_j(t) + c_j y_j(tau_j(t))`.
///
/// Fails at interior mesh nodes of edge `j`, where `y_j'` jumps; use [`apply_ell_sided`] there.
pub fn apply_ell(problem: &ValidatedProblem, y: &GraphGridFunction, j: usize, t: f64) -> Result<f64> {
    let t = check_time(problem, j, t)?;
    if let Some(i) = y.mesh().node_index(j, t) {
        if i > 0 && i + 1 < y.mesh().nodes(j).len() {
            return Err(Error::EvaluationAtKinkWithoutSideSelector { edge: j, t });
        }
    }
    Ok(ell_stencil(problem, y.mesh(), j, t, Side::Right).apply(y))
}

/// One-sided `ell_j y(t)`.
pub fn apply_ell_sided(problem: &ValidatedProblem, y: &GraphGridFunction, j: usize, t: f64, side: Side) -> Result<f64> {
    let t = check_time(problem, j, t)?;
    Ok(ell_stencil(problem, y.mesh(), j, t, side).apply(y))
}

/// Piecewise-linear, possibly discontinuous, control on one edge.
///
/// Piece `k` runs from `knots[k]` to `knots[k + 1]` and is linear between `starts[k]` and
/// `ends[k]`; a jump sits at every knot where `ends[k-1] != starts[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeControl {
    knots: Vec<f64>,
    starts: Vec<f64>,
    ends: Vec<f64>,
}

impl EdgeControl {
    pub fn new(knots: Vec<f64>, starts: Vec<f64>, ends: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidControl("need at least two knots".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) || knots.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidControl("knots must be strictly increasing".into()));
        }
        if starts.len() != knots.len() - 1 || ends.len() != knots.len() - 1 {
            return Err(Error::InvalidControl("one start and one end value per piece".into()));
        }
        if starts.iter().chain(&ends).any(|v| !v.is_finite()) {
            return Err(Error::InvalidControl("non-finite control value".into()));
        }
        Ok(Self { knots, starts, ends })
    }

    pub fn zero(horizon: f64) -> Self {
        Self { knots: vec![0.0, horizon], starts: vec![0.0], ends: vec![0.0] }
    }

    /// Builds a control from `(t, u)` samples with nondecreasing `t`; two consecutive samples
    /// at the same time encode a jump (left limit first).
    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self> {
        let mut knots = Vec::new();
        let mut starts = Vec::new();
        let mut ends = Vec::new();
        for w in samples.windows(2) {
            let ((ta, ua), (tb, ub)) = (w[0], w[1]);
            if tb < ta {
                return Err(Error::InvalidControl(format!("sample time {tb} follows {ta}")));
            }
            if tb > ta {
                if knots.is_empty() {
                    knots.push(ta);
                }
                knots.push(tb);
                starts.push(ua);
                ends.push(ub);
            }
        }
        let repeated = samples.windows(3).any(|w| w[0].0 == w[1].0 && w[1].0 == w[2].0);
        if repeated {
            return Err(Error::InvalidControl("more than two samples share one time".into()));
        }
        Self::new(knots, starts, ends)
    }

    /// Samples suitable for [`EdgeControl::from_samples`]; jumps produce repeated times.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(2 * self.starts.len());
        for k in 0..self.starts.len() {
            let head = (self.knots[k], self.starts[k]);
            if out.last() != Some(&head) {
                out.push(head);
            }
            out.push((self.knots[k + 1], self.ends[k]));
        }
        out
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn eval(&self, t: f64, side: Side) -> f64 {
        let (k, theta) = locate_in(&self.knots, t, side);
        (1.0 - theta) * self.starts[k] + theta * self.ends[k]
    }

    /// Exact `int_0^t u`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for k in 0..self.starts.len() {
            let (a, b) = (self.knots[k], self.knots[k + 1]);
            if a >= t {
                break;
            }
            let end = b.min(t);
            let frac = (end - a) / (b - a);
            let u_end = (1.0 - frac) * self.starts[k] + frac * self.ends[k];
            total += 0.5 * (end - a) * (self.starts[k] + u_end);
        }
        total
    }

    /// Exact `int u^2` over the whole edge.
    pub fn l2_norm_sq(&self) -> f64 {
        (0..self.starts.len())
            .map(|k| {
                let (a, b) = (self.starts[k], self.ends[k]);
                (self.knots[k + 1] - self.knots[k]) * (a * a + a * b + b * b) / 3.0
            })
            .sum()
    }
}

/// Controls `u_j` for every edge.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlProfile {
    edges: Vec<EdgeControl>,
}

impl ControlProfile {
    pub fn new(edges: Vec<EdgeControl>) -> Self {
        Self { edges }
    }

    pub fn zero(problem: &ValidatedProblem) -> Self {
        Self { edges: problem.edges().iter().map(|e| EdgeControl::zero(e.horizon)).collect() }
    }

    /// Samples `f(edge, t, side)` on the given knots: right limits at piece starts, left
    /// limits at piece ends.
    pub fn from_fn(knots: Vec<Vec<f64>>, f: impl Fn(usize, f64, Side) -> f64) -> Result<Self> {
        let edges = knots
            .into_iter()
            .enumerate()
            .map(|(j, k)| {
                let starts = k[..k.len() - 1].iter().map(|&t| f(j, t, Side::Right)).collect();
                let ends = k[1..].iter().map(|&t| f(j, t, Side::Left)).collect();
                EdgeControl::new(k, starts, ends)
            })
            .collect::<Result<_>>()?;
        Ok(Self { edges })
    }

    pub fn edge(&self, j: usize) -> &EdgeControl {
        &self.edges[j]
    }

    pub fn edges(&self) -> &[EdgeControl] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `sum_j alpha_j ||u_j||^2`.
    pub fn weighted_energy(&self, problem: &ValidatedProblem) -> f64 {
        self.edges.iter().zip(problem.edges()).map(|(u, e)| e.weight * u.l2_norm_sq()).sum()
    }

    fn check_against(&self, problem: &ValidatedProblem) -> Result<()> {
        if self.edges.len() != problem.edge_count() {
            return Err(Error::InvalidControl(format!(
                "{} edge controls for {} edges",
                self.edges.len(),
                problem.edge_count()
            )));
        }
        for (j, u) in self.edges.iter().enumerate() {
            let horizon = problem.horizon(j);
            let tol = tol_for(horizon);
            let (first, last) = (u.knots[0], *u.knots.last().unwrap());
            if first.abs() > tol || last < horizon - tol {
                return Err(Error::InvalidControl(format!(
                    "edge {j}: control covers [{first}, {last}], needs [0, {horizon}]"
                )));
            }
        }
        Ok(())
    }
}

/// Piecewise-constant kernel of the Volterra form of the incoming-edge equation:
/// `K(t, s) = -(b1 + q c1)` for `s <= t/q` and `-b1` otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolterraKernel {
    pub drift: f64,
    pub delay_coeff: f64,
    pub q: f64,
}

impl VolterraKernel {
    pub fn for_problem(problem: &ValidatedProblem) -> Self {
        let e = problem.edge(0);
        Self { drift: e.drift, delay_coeff: e.delay_coeff, q: problem.q() }
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        if s <= t / self.q {
            -(self.drift + self.q * self.delay_coeff)
        } else {
            -self.drift
        }
    }

    /// `int_0^t K(t, s) y_0(s) ds` for the incoming-edge component of a piecewise-linear `y`.
    pub fn integrate(&self, y: &GraphGridFunction, t: f64) -> f64 {
        let corner = t / self.q;
        let mut breaks: Vec<f64> = y.mesh().nodes(0).iter().copied().filter(|&s| s < t).collect();
        breaks.push(corner);
        breaks.push(t);
        let breaks = merge_points(breaks, tol_for(t));
        // kernel is constant on each piece because the corner is a breakpoint
        breaks
            .windows(2)
            .map(|w| {
                let k = self.eval(t, 0.5 * (w[0] + w[1]));
                k * integrate_pw(|s| y.eval(0, s), w)
            })
            .sum()
    }
}

/// Largest violation of `y_1(t) = y0 + int_0^t u_1 + int_0^t K(t,s) y_1(s) ds` over the
/// incoming-edge nodes of `y`.
pub fn volterra_residual(problem: &ValidatedProblem, y: &GraphGridFunction, controls: &ControlProfile) -> f64 {
    let kernel = VolterraKernel::for_problem(problem);
    let u = controls.edge(0);
    y.mesh()
        .nodes(0)
        .iter()
        .map(|&t| {
            let rhs = problem.y0() + u.integral_to(t) + kernel.integrate(y, t);
            (y.eval(0, t) - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Partial sum of the series solution of `y'(t) = -c y(t/q)`, `y(0) = y0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Magnitude of the first omitted term.
    pub truncation_bound: f64,
}

/// `sum_{n < n_terms} y0 (-c)^n q^{-n(n-1)/2} t^n / n!`.
pub fn pantograph_series(y0: f64, c: f64, q: f64, t: f64, n_terms: usize) -> SeriesValue {
    let mut term = y0;
    let mut value = 0.0;
    for n in 0..n_terms {
        value += term;
        term *= -c * t / (q.powi(n as i32) * (n + 1) as f64);
    }
    SeriesValue { value, truncation_bound: term.abs() }
}

enum DelaySource {
    Known(f64),
    Own(f64),
}

/// Marches one edge with the trapezoidal rule.
///
/// The delayed value at a step end either comes from already computed history or, when the
/// delayed argument falls inside the current step, from linear interpolation across the step;
/// the latter makes the step implicit but still linear, so it is solved in closed form.
fn march_edge(
    edge: usize,
    times: &[f64],
    control: &EdgeControl,
    drift: f64,
    delay_coeff: f64,
    start: f64,
    source: impl Fn(f64) -> DelaySource,
) -> Result<Vec<f64>> {
    let mut vals = Vec::with_capacity(times.len());
    vals.push(start);
    let history = |vals: &[f64], tau: f64| -> f64 {
        if vals.len() == 1 {
            return vals[0];
        }
        let (k, theta) = locate_in(&times[..vals.len()], tau, Side::Right);
        (1.0 - theta) * vals[k] + theta * vals[k + 1]
    };
    for n in 0..times.len() - 1 {
        let (t0, t1) = (times[n], times[n + 1]);
        let dt = t1 - t0;
        let y_n = vals[n];
        let d0 = match source(t0) {
            DelaySource::Known(v) => v,
            DelaySource::Own(tau) => history(&vals, tau.min(t0)),
        };
        let f0 = control.eval(t0, Side::Right) - drift * y_n - delay_coeff * d0;
        let u1 = control.eval(t1, Side::Left);
        let (num, den) = match source(t1) {
            DelaySource::Known(v) => (y_n + 0.5 * dt * (f0 + u1 - delay_coeff * v), 1.0 + 0.5 * dt * drift),
            DelaySource::Own(tau) if tau <= t0 => {
                let v = history(&vals, tau);
                (y_n + 0.5 * dt * (f0 + u1 - delay_coeff * v), 1.0 + 0.5 * dt * drift)
            }
            DelaySource::Own(tau) => {
                let theta = (tau - t0) / dt;
                (
                    y_n + 0.5 * dt * (f0 + u1 - delay_coeff * (1.0 - theta) * y_n),
                    1.0 + 0.5 * dt * (drift + delay_coeff * theta),
                )
            }
        };
        if den.abs() < 1e-12 {
            return Err(Error::SingularStep { edge, t: t1 });
        }
        vals.push(num / den);
    }
    Ok(vals)
}

/// Solves the Cauchy problem for the given controls with step at most `h`.
///
/// Each edge is marched on a grid of spacing at most `h` refined by the control knots (and,
/// on outgoing edges, the handover point). The incoming edge is solved first; it supplies the
/// initial value and the delayed history of every outgoing edge.
pub fn solve_cauchy(problem: &ValidatedProblem, controls: &ControlProfile, h: f64) -> Result<GraphGridFunction> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidStep(h));
    }
    let shortest = problem.edges().iter().map(|e| e.horizon).fold(f64::INFINITY, f64::min);
    if h > shortest {
        return Err(Error::StepTooLarge { h, max: shortest });
    }
    controls.check_against(problem)?;

    let base = GraphMesh::uniform(problem, h)?;
    let grids: Vec<Vec<f64>> = (0..problem.edge_count())
        .map(|j| {
            let horizon = problem.horizon(j);
            let mut pts = base.nodes(j).to_vec();
            pts.extend(controls.edge(j).knots().iter().copied().filter(|&t| t > 0.0 && t < horizon));
            if j > 0 {
                pts.push(problem.handover_time());
            }
            let mut g = merge_points(pts, tol_for(horizon));
            *g.last_mut().unwrap() = horizon;
            g
        })
        .collect();

    let q = problem.q();
    let head = problem.edge(0);
    let incoming = march_edge(0, &grids[0], controls.edge(0), head.drift, head.delay_coeff, problem.y0(), |t| {
        DelaySource::Own(t / q)
    })?;
    let t1 = problem.vertex_time();
    let vertex_value = *incoming.last().unwrap();
    let incoming_grid = &grids[0];
    let incoming_at = |s: f64| {
        let (k, theta) = locate_in(incoming_grid, s, Side::Right);
        (1.0 - theta) * incoming[k] + theta * incoming[k + 1]
    };

    let handover = problem.handover_time();
    let mut values = vec![incoming.clone()];
    for j in 1..problem.edge_count() {
        let spec = problem.edge(j);
        let vals = march_edge(j, &grids[j], controls.edge(j), spec.drift, spec.delay_coeff, vertex_value, |t| {
            let tau = (t - handover) / q;
            if tau < 0.0 {
                DelaySource::Known(incoming_at((tau + t1).clamp(0.0, t1)))
            } else {
                DelaySource::Own(tau)
            }
        })?;
        values.push(vals);
    }
    GraphGridFunction::new(GraphMesh::from_nodes(grids)?, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{EdgeSpec, StarProblem};

    fn problem(q: f64, t: &[f64], b: &[f64], c: &[f64]) -> ValidatedProblem {
        StarProblem {
            q,
            y0: 1.0,
            edges: (0..t.len()).map(|j| EdgeSpec::new(t[j], b[j], c[j], 1.0)).collect(),
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn series_basics() {
        assert_eq!(pantograph_series(1.3, 0.0, 2.0, 5.0, 10).value, 1.3);
        assert_eq!(pantograph_series(1.3, 2.0, 2.0, 0.0, 10).value, 1.3);
        let s = pantograph_series(1.0, 1.0, 2.0, 1.0, 12);
        // terms (-1)^n 2^{-n(n-1)/2} / n!
        let manual = 1.0 - 1.0 + 0.25 - 1.0 / 48.0 + 1.0 / 1536.0 - 1.0 / 122_880.0 + 1.0 / 23_592_960.0
            - 1.0 / 10_569_646_080.0;
        assert!((s.value - manual).abs() < 1e-12);
        assert!((s.value - 0.2298).abs() < 5e-5);
        assert!(s.truncation_bound < 1e-12);
    }

    #[test]
    fn series_satisfies_the_equation() {
        // differentiate the series term by term and compare with -c y(t/q)
        let (y0, c, q): (f64, f64, f64) = (0.7, 1.3, 2.5);
        for t in [0.1f64, 0.6, 1.4] {
            let mut deriv = 0.0;
            let mut coeff = y0;
            for n in 0..40 {
                let next = coeff * -c / (q.powi(n) * (n + 1) as f64);
                deriv += (n + 1) as f64 * next * t.powi(n);
                coeff = next;
            }
            let rhs = -c * pantograph_series(y0, c, q, t / q, 40).value;
            assert!((deriv - rhs).abs() < 1e-13, "t={t}: {deriv} vs {rhs}");
        }
    }

    #[test]
    fn ell_of_constant() {
        let p = problem(2.0, &[1.0, 3.0], &[0.3, -0.4], &[0.5, 1.5]);
        let m = GraphMesh::build(&p, 0.25).unwrap();
        let y = GraphGridFunction::from_fn(&m, |_, _| 2.0);
        assert!((apply_ell(&p, &y, 0, 0.1).unwrap() - 2.0 * 0.8).abs() < 1e-14);
        assert!((apply_ell(&p, &y, 1, 0.1).unwrap() - 2.0 * 1.1).abs() < 1e-14);
        assert!(matches!(apply_ell(&p, &y, 0, 0.5), Err(Error::EvaluationAtKinkWithoutSideSelector { .. })));
        assert!(apply_ell_sided(&p, &y, 0, 0.5, Side::Left).is_ok());
        assert!(matches!(apply_ell(&p, &y, 1, 3.5), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn ell_of_phi_on_second_piece() {
        let c1 = 0.8;
        let p = problem(2.0, &[1.0, 3.0], &[0.4, 0.0], &[c1, 0.0]);
        let m = GraphMesh::build(&p, 0.1).unwrap();
        let phi = p.lift_phi(&m).unwrap();
        for t in [0.55, 0.73, 0.91] {
            let expected = c1 * (1.0 - t);
            assert!((apply_ell(&p, &phi, 0, t).unwrap() - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn ell_on_outgoing_edge_reads_history() {
        let p = problem(2.0, &[1.0, 3.0], &[0.0, 0.0], &[0.0, 1.0]);
        let m = GraphMesh::build(&p, 0.1).unwrap();
        let y = GraphGridFunction::from_fn(&m, |j, t| if j == 0 { t * t } else { 1.0 });
        // edge 1 is constant, so ell = y(tau); at t = 0.4, tau = -0.3 reads edge 0 at 0.7
        let got = apply_ell(&p, &y, 1, 0.45).unwrap();
        assert!((got - y.eval(0, 0.725)).abs() < 1e-14);
    }

    #[test]
    fn control_samples_round_trip() {
        let u = EdgeControl::new(vec![0.0, 0.5, 1.0], vec![1.0, -2.0], vec![3.0, 4.0]).unwrap();
        let s = u.samples();
        assert_eq!(s, vec![(0.0, 1.0), (0.5, 3.0), (0.5, -2.0), (1.0, 4.0)]);
        assert_eq!(EdgeControl::from_samples(&s).unwrap(), u);
        assert_eq!(u.eval(0.5, Side::Left), 3.0);
        assert_eq!(u.eval(0.5, Side::Right), -2.0);
        assert!((u.integral_to(1.0) - (0.5 * 2.0 + 0.5)).abs() < 1e-15);
        assert!((u.integral_to(0.25) - 0.25 * 1.5).abs() < 1e-15);
        assert!(EdgeControl::from_samples(&[(0.0, 1.0), (0.5, 1.0), (0.5, 1.0), (0.5, 1.0)]).is_err());
        assert!(EdgeControl::from_samples(&[(0.0, 1.0), (0.5, 1.0), (0.4, 1.0)]).is_err());
    }

    #[test]
    fn no_delay_matches_exponential() {
        let b = 0.7;
        let p = problem(2.0, &[1.0, 3.0, 2.5], &[b, b, b], &[0.0; 3]);
        let u = ControlProfile::zero(&p);
        let y = solve_cauchy(&p, &u, 0.01).unwrap();
        let mut err: f64 = 0.0;
        for j in 0..3 {
            for &t in y.mesh().nodes(j) {
                let exact = (-b * p.global_time(j, t)).exp();
                err = err.max((y.eval(j, t) - exact).abs());
            }
        }
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn cauchy_rejects_bad_steps() {
        let p = problem(2.0, &[1.0, 3.0], &[0.0; 2], &[0.0; 2]);
        let u = ControlProfile::zero(&p);
        assert!(matches!(solve_cauchy(&p, &u, 1.5), Err(Error::StepTooLarge { .. })));
        assert!(matches!(solve_cauchy(&p, &u, -1.0), Err(Error::InvalidStep(_))));
        let short = ControlProfile::new(vec![EdgeControl::zero(1.0)]);
        assert!(matches!(solve_cauchy(&p, &short, 0.1), Err(Error::InvalidControl(_))));
    }

    #[test]
    fn causality() {
        let p = problem(2.0, &[1.0, 3.0], &[0.2, 0.1], &[0.9, -0.5]);
        let base = ControlProfile::new(vec![
            EdgeControl::new(vec![0.0, 1.0], vec![0.3], vec![-0.2]).unwrap(),
            EdgeControl::zero(3.0),
        ]);
        let changed = ControlProfile::new(vec![
            EdgeControl::new(vec![0.0, 0.6, 0.6 + 1e-3, 1.0], vec![0.3, 0.3 - 0.5 * 0.6, 5.0], vec![0.3 - 0.5 * 0.6, 5.0, -3.0])
                .unwrap(),
            EdgeControl::zero(3.0),
        ]);
        let a = solve_cauchy(&p, &base, 0.05).unwrap();
        let b = solve_cauchy(&p, &changed, 0.05).unwrap();
        for &t in a.mesh().nodes(0).iter().filter(|&&t| t <= 0.6) {
            assert!((a.eval(0, t) - b.eval(0, t)).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn volterra_form_holds() {
        // q = 2.3 keeps q * nodes off the uniform grid, so the identity is not exact
        let p = problem(2.3, &[1.0, 3.0], &[0.4, 0.1], &[1.2, -0.5]);
        let u = ControlProfile::new(vec![
            EdgeControl::new(vec![0.0, 0.3, 1.0], vec![0.5, -1.0], vec![0.2, 0.7]).unwrap(),
            EdgeControl::zero(3.0),
        ]);
        let mut prev = f64::INFINITY;
        for h in [0.1, 0.05, 0.025] {
            let y = solve_cauchy(&p, &u, h).unwrap();
            let r = volterra_residual(&p, &y, &u);
            assert!(r < 0.1 * h * h, "h={h}: {r}");
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn kernel_pieces() {
        let k = VolterraKernel { drift: 0.5, delay_coeff: 2.0, q: 2.0 };
        assert_eq!(k.eval(1.0, 0.4), -4.5);
        assert_eq!(k.eval(1.0, 0.6), -0.5);
    }
}
