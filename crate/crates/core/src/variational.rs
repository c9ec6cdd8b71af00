//! Galerkin minimisation of the weighted control energy over admissible trajectories.
//!
//! Trajectories are written as `y = Phi + x` with `Phi` the lifting function and `x` in the
//! homogeneous space `W` (zero at the origin of edge 0, continuous through the vertex, zero on
//! every rest interval `[l_j, T_j]`). The discrete `x` is a combination of hat functions and
//! solves `B(x, w) = -B(Phi, w)` for every hat `w`, where
//! `B(y, w) = sum_j alpha_j int ell_j y ell_j w`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forward::{ell_stencil, ControlProfile};
use crate::mesh::{gauss_points, integrate_pw, kink_points, GraphGridFunction, GraphMesh, Side};
use crate::problem::ValidatedProblem;

/// Degree-of-freedom map of the discrete homogeneous space `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceW {
    mesh: GraphMesh,
    dof: Vec<Vec<Option<usize>>>,
    supports: Vec<Vec<(usize, usize)>>,
    vertex: usize,
}

impl SpaceW {
    pub fn new(problem: &ValidatedProblem, mesh: &GraphMesh) -> Result<Self> {
        mesh.check_mandatory_nodes(problem)?;
        let mut dof: Vec<Vec<Option<usize>>> = (0..mesh.edge_count()).map(|j| vec![None; mesh.nodes(j).len()]).collect();
        let mut next = 0;
        let last0 = mesh.nodes(0).len() - 1;
        for slot in dof[0].iter_mut().take(last0).skip(1) {
            *slot = Some(next);
            next += 1;
        }
        let vertex = next;
        next += 1;
        dof[0][last0] = Some(vertex);
        for j in 1..mesh.edge_count() {
            let onset = problem.rest_onset(j);
            let tol = problem.time_tol(j);
            dof[j][0] = Some(vertex);
            for (i, &t) in mesh.nodes(j).iter().enumerate().skip(1) {
                if t < onset - tol {
                    dof[j][i] = Some(next);
                    next += 1;
                }
            }
        }
        let mut supports = vec![Vec::new(); next];
        for (j, edge) in dof.iter().enumerate() {
            for (i, d) in edge.iter().enumerate() {
                if let Some(d) = d {
                    supports[*d].push((j, i));
                }
            }
        }
        Ok(Self { mesh: mesh.clone(), dof, supports, vertex })
    }

    pub fn mesh(&self) -> &GraphMesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.supports.len()
    }

    /// Index of the shared vertex unknown.
    pub fn vertex_dof(&self) -> usize {
        self.vertex
    }

    pub fn dof(&self, edge: usize, node: usize) -> Option<usize> {
        self.dof[edge][node]
    }

    /// `(edge, node)` pairs carrying the value of unknown `d`; more than one only at the vertex.
    pub fn support(&self, d: usize) -> &[(usize, usize)] {
        &self.supports[d]
    }

    /// The function of `W` with the given coefficients (zero at every constrained node).
    pub fn reconstruct(&self, coeffs: &[f64]) -> Result<GraphGridFunction> {
        if coeffs.len() != self.dim() {
            return Err(Error::InvalidInput(format!("{} coefficients for dimension {}", coeffs.len(), self.dim())));
        }
        let values = self
            .dof
            .iter()
            .map(|edge| edge.iter().map(|d| d.map_or(0.0, |d| coeffs[d])).collect())
            .collect();
        GraphGridFunction::new(self.mesh.clone(), values)
    }

    pub fn basis(&self, d: usize) -> GraphGridFunction {
        let mut y = GraphGridFunction::zeros(&self.mesh);
        for &(j, i) in self.support(d) {
            y.values_mut(j)[i] = 1.0;
        }
        y
    }
}

/// Assembled Galerkin system `K x = rhs` together with its space and lifting.
#[derive(Clone, Debug)]
pub struct EnergyForm {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub space: SpaceW,
    pub phi: GraphGridFunction,
}

/// Visits every Gauss point of the kink-split quadrature of edge `j` with its weight.
fn for_each_gauss_point(problem: &ValidatedProblem, mesh: &GraphMesh, j: usize, mut f: impl FnMut(f64, f64)) {
    let kinks = kink_points(problem, mesh, j);
    for w in kinks.windows(2) {
        for (t, wt) in gauss_points(w[0], w[1]) {
            f(t, wt);
        }
    }
}

/// Assembles `B` on the hat basis of `W` and the right-hand side `-B(Phi, .)`.
///
/// Every integrand is a product of two functions that are affine between kink points, so the
/// two-point Gauss rule on the kink partition is exact.
pub fn assemble(problem: &ValidatedProblem, mesh: &GraphMesh) -> Result<EnergyForm> {
    let space = SpaceW::new(problem, mesh)?;
    let phi = problem.lift_phi(mesh)?;
    let n = space.dim();
    let mut matrix = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let mut active: Vec<(usize, f64)> = Vec::with_capacity(4);
    for j in 0..problem.edge_count() {
        let alpha = problem.edge(j).weight;
        for_each_gauss_point(problem, mesh, j, |t, wt| {
            let st = ell_stencil(problem, mesh, j, t, Side::Right);
            let scale = alpha * wt;
            let phi_val = st.apply(&phi);
            active.clear();
            active.extend(st.terms.iter().filter_map(|&(e, i, c)| space.dof(e, i).map(|d| (d, c))));
            for &(a, ca) in &active {
                rhs[a] -= scale * (phi_val * ca);
                for &(b, cb) in &active {
                    matrix[(a, b)] += scale * (ca * cb);
                }
            }
        });
    }
    Ok(EnergyForm { matrix, rhs, space, phi })
}

/// Discrete minimiser of the energy.
#[derive(Clone, Debug)]
pub struct DampingSolution {
    pub y: GraphGridFunction,
    pub energy: f64,
    pub vertex_value: f64,
    pub coefficients: DVector<f64>,
    /// `|K x - rhs|_inf` after the solve.
    pub linear_residual: f64,
    /// `|rhs|_inf`, the scale of the linear residual.
    pub rhs_norm: f64,
}

impl EnergyForm {
    pub fn solve(&self, problem: &ValidatedProblem) -> Result<DampingSolution> {
        let chol = Cholesky::new(self.matrix.clone())
            .ok_or_else(|| Error::NotPositiveDefinite(format!("Cholesky failed on a {0}x{0} system", self.space.dim())))?;
        let coefficients = chol.solve(&self.rhs);
        let linear_residual = (&self.matrix * &coefficients - &self.rhs).amax();
        let x = self.space.reconstruct(coefficients.as_slice())?;
        let y = self.phi.add_scaled(1.0, &x)?;
        let energy = energy(problem, &y)?;
        Ok(DampingSolution {
            vertex_value: y.eval(0, problem.vertex_time()),
            y,
            energy,
            coefficients,
            linear_residual,
            rhs_norm: self.rhs.amax(),
        })
    }

    /// Largest `|B_ik - B_ki|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }
}

/// Assembles and solves the discrete damping problem on `mesh`.
pub fn solve_damping(problem: &ValidatedProblem, mesh: &GraphMesh) -> Result<DampingSolution> {
    assemble(problem, mesh)?.solve(problem)
}

/// `B(y, w)` by exact quadrature; both functions must share one mesh.
pub fn bilinear(problem: &ValidatedProblem, y: &GraphGridFunction, w: &GraphGridFunction) -> Result<f64> {
    if y.mesh() != w.mesh() {
        return Err(Error::MeshMismatch);
    }
    y.mesh().check_matches(problem)?;
    let mesh = y.mesh();
    Ok((0..problem.edge_count())
        .map(|j| {
            let alpha = problem.edge(j).weight;
            let kinks = kink_points(problem, mesh, j);
            alpha
                * integrate_pw(
                    |t| {
                        let st = ell_stencil(problem, mesh, j, t, Side::Right);
                        st.apply(y) * st.apply(w)
                    },
                    &kinks,
                )
        })
        .sum())
}

/// Weighted energy `sum_j alpha_j int (ell_j y)^2`.
pub fn energy(problem: &ValidatedProblem, y: &GraphGridFunction) -> Result<f64> {
    bilinear(problem, y, y)
}

/// `B(y, phi_d)` for every hat `phi_d` of `space`, in one quadrature pass over the form as
/// written (untransformed).
pub fn galerkin_residual(problem: &ValidatedProblem, space: &SpaceW, y: &GraphGridFunction) -> Result<DVector<f64>> {
    if y.mesh() != space.mesh() {
        return Err(Error::MeshMismatch);
    }
    let mesh = space.mesh();
    let mut out = DVector::zeros(space.dim());
    for j in 0..problem.edge_count() {
        let alpha = problem.edge(j).weight;
        for_each_gauss_point(problem, mesh, j, |t, wt| {
            let st = ell_stencil(problem, mesh, j, t, Side::Right);
            let g = alpha * wt * st.apply(y);
            for &(e, i, c) in &st.terms {
                if let Some(d) = space.dof(e, i) {
                    out[d] += g * c;
                }
            }
        });
    }
    Ok(out)
}

/// Controls `u_j = ell_j y`, piecewise linear between kink points with one-sided values at
/// each kink.
pub fn extract_control(problem: &ValidatedProblem, y: &GraphGridFunction) -> Result<ControlProfile> {
    y.mesh().check_matches(problem)?;
    let knots = (0..problem.edge_count()).map(|j| kink_points(problem, y.mesh(), j)).collect();
    ControlProfile::from_fn(knots, |j, t, side| ell_stencil(problem, y.mesh(), j, t, side).apply(y))
}
