//! Independent single-interval damping solver for the pantograph equation
//! `y' + b y + c y(t/q) = u` on `[0, T]` with `y(0) = y0` and `y = 0` on `[T/q, T]`.
//!
//! It has no vertex and its own unknown numbering and lifting, and serves as a reference for
//! the two-edge star with matched coefficients, whose concatenated trajectory solves the same
//! problem on `[0, T1 + T2]`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{gauss_points, locate_in, merge_points, tol_for, Side};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalProblem {
    pub q: f64,
    pub horizon: f64,
    pub drift: f64,
    pub delay_coeff: f64,
    pub y0: f64,
}

/// Nodal values of the piecewise-linear interval minimiser.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSolution {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl IntervalSolution {
    pub fn eval(&self, t: f64) -> f64 {
        let (k, theta) = locate_in(&self.nodes, t, Side::Right);
        (1.0 - theta) * self.values[k] + theta * self.values[k + 1]
    }
}

impl IntervalProblem {
    pub fn rest_onset(&self) -> f64 {
        self.horizon / self.q
    }

    /// Nodes of spacing at most `h` including `T/q`.
    pub fn mesh(&self, h: f64) -> Vec<f64> {
        let onset = self.rest_onset();
        let mut nodes = vec![0.0];
        for (a, b) in [(0.0, onset), (onset, self.horizon)] {
            let pieces = ((b - a) / h - 1e-9).ceil().max(1.0) as usize;
            nodes.extend((1..=pieces).map(|k| a + (b - a) * k as f64 / pieces as f64));
        }
        nodes
    }

    pub fn solve(&self, nodes: &[f64]) -> Result<IntervalSolution> {
        let tol = tol_for(self.horizon);
        if nodes.len() < 2 || nodes[0] != 0.0 || (nodes[nodes.len() - 1] - self.horizon).abs() > tol {
            return Err(Error::InvalidMesh("interval nodes must run from 0 to T".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMesh("interval nodes must be strictly increasing".into()));
        }
        let onset = self.rest_onset();
        if !nodes.iter().any(|&t| (t - onset).abs() <= tol) {
            return Err(Error::MissingMandatoryNode { edge: 0, t: onset });
        }

        // unknowns: interior nodes before the rest interval
        let unknown: Vec<Option<usize>> = {
            let mut next = 0;
            nodes
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    (i > 0 && t < onset - tol).then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let n = unknown.iter().flatten().count();
        // lifting: y0 times the hat of the first node
        let fixed = |i: usize| if i == 0 { self.y0 } else { 0.0 };

        let mut breaks: Vec<f64> = nodes.to_vec();
        breaks.extend(nodes.iter().map(|&s| self.q * s).filter(|&t| t < self.horizon));
        let breaks = merge_points(breaks, tol);

        let mut matrix = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for w in breaks.windows(2) {
            for (t, wt) in gauss_points(w[0], w[1]) {
                let (k, theta) = locate_in(nodes, t, Side::Right);
                let inv_h = 1.0 / (nodes[k + 1] - nodes[k]);
                let (kd, thetad) = locate_in(nodes, t / self.q, Side::Right);
                let terms = [
                    (k, -inv_h + self.drift * (1.0 - theta)),
                    (k + 1, inv_h + self.drift * theta),
                    (kd, self.delay_coeff * (1.0 - thetad)),
                    (kd + 1, self.delay_coeff * thetad),
                ];
                let lifted: f64 = terms.iter().map(|&(i, c)| c * fixed(i)).sum();
                for &(a, ca) in &terms {
                    let Some(ra) = unknown[a] else { continue };
                    rhs[ra] -= wt * (lifted * ca);
                    for &(b, cb) in &terms {
                        if let Some(rb) = unknown[b] {
                            matrix[(ra, rb)] += wt * (ca * cb);
                        }
                    }
                }
            }
        }
        let chol = Cholesky::new(matrix)
            .ok_or_else(|| Error::NotPositiveDefinite("interval system".into()))?;
        let x = chol.solve(&rhs);
        let values = (0..nodes.len()).map(|i| unknown[i].map_or(fixed(i), |r| x[r])).collect();
        Ok(IntervalSolution { nodes: nodes.to_vec(), values })
    }
}
