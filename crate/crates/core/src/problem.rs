//! Problem instances for the star-graph damping problem.
//!
//! Edge 0 is the incoming edge `[0, T1]`; edges `1..m` leave the internal vertex and are each
//! parameterised from their own local time 0, which is identified with the endpoint `T1` of
//! edge 0. On edge `j` the state obeys
//!
//! ```text
//! y_j'(t) + b_j y_j(t) + c_j y_j(tau_j(t)) = u_j(t)
//! ```
//!
//! with `tau_0(t) = t / q` and `tau_j(t) = (t - (q-1) T1) / q` for outgoing edges. Negative
//! delayed arguments on an outgoing edge are read from the incoming edge through
//! `y_j(s) = y_0(s + T1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{GraphGridFunction, GraphMesh};

/// Relative tolerance used when comparing times against mesh nodes and breakpoints.
pub(crate) const TIME_TOL: f64 = 1e-12;

/// Parameters of one edge of the star.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    /// Time horizon `T_j` of the edge.
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Instantaneous feedback coefficient `b_j`.
    #[serde(rename = "b")]
    pub drift: f64,
    /// Coefficient `c_j` of the compressed (delayed) state.
    #[serde(rename = "c")]
    pub delay_coeff: f64,
    /// Weight `alpha_j` of the edge's control effort in the energy.
    #[serde(rename = "alpha")]
    pub weight: f64,
}

impl EdgeSpec {
    pub fn new(horizon: f64, drift: f64, delay_coeff: f64, weight: f64) -> Self {
        Self { horizon, drift, delay_coeff, weight }
    }
}

/// Raw, unvalidated problem as read from JSON: `{"q", "y0", "edges": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarProblem {
    pub q: f64,
    pub y0: f64,
    pub edges: Vec<EdgeSpec>,
}

/// Location of a (possibly history-resolved) delayed argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayTarget {
    /// Zero-based edge index.
    pub edge: usize,
    /// Local time on that edge.
    pub local_time: f64,
}

impl StarProblem {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks the standing assumptions and caches derived constants.
    pub fn validate(self) -> Result<ValidatedProblem> {
        if !self.q.is_finite() {
            return Err(Error::NonFiniteParameter("q".into()));
        }
        if !self.y0.is_finite() {
            return Err(Error::NonFiniteParameter("y0".into()));
        }
        if self.q <= 1.0 {
            return Err(Error::CompressionNotGreaterThanOne(self.q));
        }
        if self.edges.len() < 2 {
            return Err(Error::TooFewEdges(self.edges.len()));
        }
        for (j, e) in self.edges.iter().enumerate() {
            for (name, v) in [("T", e.horizon), ("b", e.drift), ("c", e.delay_coeff), ("alpha", e.weight)] {
                if !v.is_finite() {
                    return Err(Error::NonFiniteParameter(format!("edges[{j}].{name}")));
                }
            }
            if e.horizon <= 0.0 {
                return Err(Error::NonPositiveHorizon { edge: j, horizon: e.horizon });
            }
            if e.weight <= 0.0 {
                return Err(Error::NonPositiveWeight { edge: j, alpha: e.weight });
            }
        }
        let q = self.q;
        let t1 = self.edges[0].horizon;
        let minimum = (q - 1.0) * t1;
        for (j, e) in self.edges.iter().enumerate().skip(1) {
            if e.horizon <= minimum {
                return Err(Error::HorizonTooShort { edge: j, horizon: e.horizon, minimum });
            }
        }

        let rest_onsets = self
            .edges
            .iter()
            .enumerate()
            .map(|(j, e)| if j == 0 { t1 } else { (e.horizon - minimum) / q })
            .collect();

        let head = &self.edges[0];
        let (mut beta, mut gamma) = (head.weight * head.drift, head.weight * head.delay_coeff);
        for e in &self.edges[1..] {
            beta -= e.weight * e.drift;
            gamma -= e.weight * e.delay_coeff;
        }

        Ok(ValidatedProblem { raw: self, rest_onsets, beta, gamma })
    }
}

/// A problem that satisfies all standing assumptions, with `l_j`, `beta`, `gamma` cached.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedProblem {
    raw: StarProblem,
    rest_onsets: Vec<f64>,
    beta: f64,
    gamma: f64,
}

impl ValidatedProblem {
    pub fn raw(&self) -> &StarProblem {
        &self.raw
    }

    pub fn q(&self) -> f64 {
        self.raw.q
    }

    pub fn y0(&self) -> f64 {
        self.raw.y0
    }

    pub fn edge_count(&self) -> usize {
        self.raw.edges.len()
    }

    pub fn edge(&self, j: usize) -> &EdgeSpec {
        &self.raw.edges[j]
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.raw.edges
    }

    pub fn horizon(&self, j: usize) -> f64 {
        self.raw.edges[j].horizon
    }

    /// `T1`, the time of the internal vertex.
    pub fn vertex_time(&self) -> f64 {
        self.raw.edges[0].horizon
    }

    /// `q^{-1} T1`, where the lifting function reaches zero.
    pub fn compressed_vertex_time(&self) -> f64 {
        self.vertex_time() / self.q()
    }

    /// Local time `(q-1) T1` on an outgoing edge at which the delayed argument leaves the
    /// incoming edge's history and starts reading the edge itself.
    pub fn handover_time(&self) -> f64 {
        (self.q() - 1.0) * self.vertex_time()
    }

    /// Rest onset `l_j`: `T1` on edge 0, `q^{-1}(T_j - (q-1)T1)` on outgoing edges.
    pub fn rest_onset(&self, j: usize) -> f64 {
        self.rest_onsets[j]
    }

    pub fn rest_onsets(&self) -> &[f64] {
        &self.rest_onsets
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `(beta, gamma)` of the vertex condition.
    pub fn beta_gamma(&self) -> (f64, f64) {
        (self.beta, self.gamma)
    }

    /// Returns a copy with a different initial state; all cached constants stay valid.
    pub fn with_initial_state(&self, y0: f64) -> Self {
        let mut out = self.clone();
        out.raw.y0 = y0;
        out
    }

    pub(crate) fn time_tol(&self, j: usize) -> f64 {
        TIME_TOL * self.horizon(j).max(1.0)
    }

    /// Resolves the delayed argument of `ell_j` at local time `t`.
    ///
    /// Arguments that fall before the start of an outgoing edge are routed to the incoming
    /// edge, landing in `[T1/q, T1]`.
    pub fn delay_argument(&self, j: usize, t: f64) -> Result<DelayTarget> {
        let horizon = self.horizon(j);
        let tol = self.time_tol(j);
        if !(t >= -tol && t <= horizon + tol) {
            return Err(Error::TimeOutOfRange { edge: j, t, horizon });
        }
        Ok(self.delay_argument_unchecked(j, t.clamp(0.0, horizon)))
    }

    pub(crate) fn delay_argument_unchecked(&self, j: usize, t: f64) -> DelayTarget {
        let q = self.q();
        if j == 0 {
            return DelayTarget { edge: 0, local_time: t / q };
        }
        let tau = (t - self.handover_time()) / q;
        if tau >= 0.0 {
            DelayTarget { edge: j, local_time: tau }
        } else {
            let t1 = self.vertex_time();
            DelayTarget { edge: 0, local_time: (tau + t1).clamp(0.0, t1) }
        }
    }

    /// Global (tree) time of a local edge time: edge-0 times as-is, outgoing edges shifted by T1.
    pub fn global_time(&self, j: usize, t: f64) -> f64 {
        if j == 0 {
            t
        } else {
            self.vertex_time() + t
        }
    }

    /// Lifting function `Phi`: `y0 (1 - q t / T1)` on `[0, T1/q]` of edge 0, zero elsewhere.
    pub fn lift_phi(&self, mesh: &GraphMesh) -> Result<GraphGridFunction> {
        mesh.check_matches(self)?;
        let corner = self.compressed_vertex_time();
        if mesh.node_index(0, corner).is_none() {
            return Err(Error::MissingMandatoryNode { edge: 0, t: corner });
        }
        let t1 = self.vertex_time();
        let (q, y0) = (self.q(), self.y0());
        let tol = self.time_tol(0);
        let values = (0..mesh.edge_count())
            .map(|j| {
                mesh.nodes(j)
                    .iter()
                    .map(|&t| {
                        if j == 0 && t < corner - tol {
                            y0 * (1.0 - q * t / t1)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        GraphGridFunction::new(mesh.clone(), values)
    }

    /// Closed-form squared `W^1_2` norm of the lifting function, `(T1^2 + 3q^2) / (3 q T1) y0^2`.
    pub fn lift_phi_norm_sq(&self) -> f64 {
        let (q, t1, y0) = (self.q(), self.vertex_time(), self.y0());
        (t1 * t1 + 3.0 * q * q) / (3.0 * q * t1) * y0 * y0
    }

    /// Whether the weights follow the probabilistic convention `alpha_1 = 1`,
    /// `sum_{j>=2} alpha_j = 1`, within `tol`.
    pub fn weights_are_normalized(&self, tol: f64) -> bool {
        let tail: f64 = self.raw.edges[1..].iter().map(|e| e.weight).sum();
        (self.raw.edges[0].weight - 1.0).abs() <= tol && (tail - 1.0).abs() <= tol
    }
}
