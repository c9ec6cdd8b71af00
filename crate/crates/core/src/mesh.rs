//! Per-edge meshes, piecewise-linear graph functions and breakpoint-exact quadrature.

use crate::error::{Error, Result};
use crate::problem::{ValidatedProblem, TIME_TOL};

/// Which neighbouring cell to use when a derivative is taken exactly at a mesh node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Strictly increasing node lists, one per edge, each covering `[0, T_j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphMesh {
    nodes: Vec<Vec<f64>>,
}

pub(crate) fn tol_for(horizon: f64) -> f64 {
    TIME_TOL * horizon.abs().max(1.0)
}

/// Sorts `points` and merges entries closer than `tol`, keeping the first of each cluster.
pub(crate) fn merge_points(mut points: Vec<f64>, tol: f64) -> Vec<f64> {
    points.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(points.len());
    for p in points {
        match out.last() {
            Some(&last) if p - last <= tol => {}
            _ => out.push(p),
        }
    }
    out
}

/// Cell of a strictly increasing node list (at least two nodes) containing `t`; see
/// [`GraphMesh::locate`].
pub(crate) fn locate_in(nodes: &[f64], t: f64, side: Side) -> (usize, f64) {
    let tol = tol_for(*nodes.last().unwrap());
    let last_cell = nodes.len() - 2;
    let cell = match side {
        Side::Right => nodes.partition_point(|&x| x <= t + tol).saturating_sub(1),
        Side::Left => nodes.partition_point(|&x| x < t - tol).saturating_sub(1),
    }
    .min(last_cell);
    let (a, b) = (nodes[cell], nodes[cell + 1]);
    (cell, ((t - a) / (b - a)).clamp(0.0, 1.0))
}

/// Mandatory breakpoints of edge `j`: `{0, T1/q, T1}` on edge 0 and
/// `{0, (q-1)T1, l_j, T_j}` on outgoing edges.
pub fn mandatory_nodes(problem: &ValidatedProblem, j: usize) -> Vec<f64> {
    let horizon = problem.horizon(j);
    let points = if j == 0 {
        vec![0.0, problem.compressed_vertex_time(), horizon]
    } else {
        vec![0.0, problem.handover_time(), problem.rest_onset(j), horizon]
    };
    merge_points(points, tol_for(horizon))
}

fn subdivide(anchors: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![anchors[0]];
    for w in anchors.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = ((b - a) / h - 1e-9).ceil().max(1.0) as usize;
        for k in 1..pieces {
            out.push(a + (b - a) * k as f64 / pieces as f64);
        }
        out.push(b);
    }
    out
}

impl GraphMesh {
    /// Builds a mesh with spacing at most `h` that contains every mandatory breakpoint.
    ///
    /// Each stretch between consecutive mandatory nodes is split uniformly into
    /// `ceil(len / h)` cells, so the result depends only on `(problem, h)`.
    pub fn build(problem: &ValidatedProblem, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidStep(h));
        }
        let nodes = (0..problem.edge_count())
            .map(|j| subdivide(&mandatory_nodes(problem, j), h))
            .collect();
        Ok(Self { nodes })
    }

    /// Uniform-ish mesh without mandatory interior nodes, `ceil(T_j / h)` cells per edge.
    pub fn uniform(problem: &ValidatedProblem, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidStep(h));
        }
        let nodes = (0..problem.edge_count()).map(|j| subdivide(&[0.0, problem.horizon(j)], h)).collect();
        Ok(Self { nodes })
    }

    pub fn from_nodes(nodes: Vec<Vec<f64>>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidMesh("no edges".into()));
        }
        for (j, edge) in nodes.iter().enumerate() {
            if edge.len() < 2 {
                return Err(Error::InvalidMesh(format!("edge {j} has fewer than two nodes")));
            }
            if edge[0] != 0.0 {
                return Err(Error::InvalidMesh(format!("edge {j} does not start at 0")));
            }
            if edge.iter().any(|t| !t.is_finite()) || edge.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidMesh(format!("edge {j} nodes are not strictly increasing")));
            }
        }
        Ok(Self { nodes })
    }

    /// Adds `extra` points to edge `j` (merged within tolerance, clipped to the edge).
    pub fn with_extra_nodes(&self, j: usize, extra: &[f64]) -> Self {
        let horizon = self.horizon(j);
        let mut pts = self.nodes[j].clone();
        pts.extend(extra.iter().copied().filter(|&t| t > 0.0 && t < horizon));
        let mut nodes = self.nodes.clone();
        nodes[j] = merge_points(pts, tol_for(horizon));
        // merging keeps the first of a cluster; make sure the endpoint survives exactly
        *nodes[j].last_mut().unwrap() = horizon;
        Self { nodes }
    }

    /// Bisects every cell. The result is nested in `self`.
    pub fn refine(&self) -> Self {
        let nodes = self
            .nodes
            .iter()
            .map(|edge| {
                let mut out = Vec::with_capacity(2 * edge.len() - 1);
                for w in edge.windows(2) {
                    out.push(w[0]);
                    out.push(0.5 * (w[0] + w[1]));
                }
                out.push(*edge.last().unwrap());
                out
            })
            .collect();
        Self { nodes }
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self, j: usize) -> &[f64] {
        &self.nodes[j]
    }

    pub fn horizon(&self, j: usize) -> f64 {
        *self.nodes[j].last().unwrap()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.iter().map(Vec::len).sum()
    }

    /// Largest cell length over all edges.
    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .iter()
            .flat_map(|e| e.windows(2).map(|w| w[1] - w[0]))
            .fold(0.0, f64::max)
    }

    /// Index of the node at `t` on edge `j`, if any (within a relative tolerance).
    pub fn node_index(&self, j: usize, t: f64) -> Option<usize> {
        let edge = &self.nodes[j];
        let tol = tol_for(self.horizon(j));
        let i = edge.partition_point(|&x| x < t - tol);
        (i < edge.len() && (edge[i] - t).abs() <= tol).then_some(i)
    }

    /// Cell `i` (between nodes `i` and `i+1`) containing `t`, and the local coordinate in `[0, 1]`.
    ///
    /// At a node the cell to the requested side is returned; at the edge ends the only
    /// adjacent cell is used.
    pub fn locate(&self, j: usize, t: f64, side: Side) -> (usize, f64) {
        locate_in(&self.nodes[j], t, side)
    }

    pub(crate) fn check_matches(&self, problem: &ValidatedProblem) -> Result<()> {
        if self.edge_count() != problem.edge_count() {
            return Err(Error::InvalidMesh(format!(
                "mesh has {} edges, problem has {}",
                self.edge_count(),
                problem.edge_count()
            )));
        }
        for j in 0..self.edge_count() {
            let horizon = problem.horizon(j);
            if (self.horizon(j) - horizon).abs() > tol_for(horizon) {
                return Err(Error::InvalidMesh(format!(
                    "edge {j} ends at {} instead of T = {horizon}",
                    self.horizon(j)
                )));
            }
        }
        Ok(())
    }

    /// Checks that every mandatory breakpoint of `problem` is a node.
    pub fn check_mandatory_nodes(&self, problem: &ValidatedProblem) -> Result<()> {
        self.check_matches(problem)?;
        for j in 0..self.edge_count() {
            for t in mandatory_nodes(problem, j) {
                if self.node_index(j, t).is_none() {
                    return Err(Error::MissingMandatoryNode { edge: j, t });
                }
            }
        }
        Ok(())
    }
}

/// Piecewise-linear function on every edge of the star.
///
/// Evaluation of an outgoing edge at a negative local time reads the incoming edge at
/// `t + T1`, so delayed arguments can be evaluated without special cases.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphGridFunction {
    mesh: GraphMesh,
    values: Vec<Vec<f64>>,
}

impl GraphGridFunction {
    pub fn new(mesh: GraphMesh, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != mesh.edge_count()
            || values.iter().zip(&mesh.nodes).any(|(v, n)| v.len() != n.len())
        {
            return Err(Error::InvalidMesh("value lists do not match node counts".into()));
        }
        Ok(Self { mesh, values })
    }

    pub fn zeros(mesh: &GraphMesh) -> Self {
        let values = mesh.nodes.iter().map(|n| vec![0.0; n.len()]).collect();
        Self { mesh: mesh.clone(), values }
    }

    /// Nodal interpolant of `f(edge, t)`.
    pub fn from_fn(mesh: &GraphMesh, f: impl Fn(usize, f64) -> f64) -> Self {
        let values = mesh
            .nodes
            .iter()
            .enumerate()
            .map(|(j, n)| n.iter().map(|&t| f(j, t)).collect())
            .collect();
        Self { mesh: mesh.clone(), values }
    }

    pub fn mesh(&self) -> &GraphMesh {
        &self.mesh
    }

    pub fn values(&self, j: usize) -> &[f64] {
        &self.values[j]
    }

    pub fn values_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j]
    }

    pub fn eval(&self, j: usize, t: f64) -> f64 {
        if j > 0 && t < 0.0 {
            return self.eval(0, t + self.mesh.horizon(0));
        }
        let (cell, theta) = self.mesh.locate(j, t, Side::Right);
        let v = &self.values[j];
        (1.0 - theta) * v[cell] + theta * v[cell + 1]
    }

    /// One-sided derivative; only the side matters at mesh nodes.
    pub fn slope(&self, j: usize, t: f64, side: Side) -> f64 {
        let (cell, _) = self.mesh.locate(j, t, side);
        let n = &self.mesh.nodes[j];
        let v = &self.values[j];
        (v[cell + 1] - v[cell]) / (n[cell + 1] - n[cell])
    }

    pub fn scaled(&self, s: f64) -> Self {
        let values = self.values.iter().map(|v| v.iter().map(|x| s * x).collect()).collect();
        Self { mesh: self.mesh.clone(), values }
    }

    /// `self + s * other`, both on the same mesh.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Result<Self> {
        if self.mesh != other.mesh {
            return Err(Error::MeshMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + s * y).collect())
            .collect();
        Ok(Self { mesh: self.mesh.clone(), values })
    }

    /// Squared `W^1_2` norm summed over edges, by exact quadrature.
    pub fn sobolev_norm_sq(&self) -> f64 {
        (0..self.mesh.edge_count())
            .map(|j| {
                let f = |t: f64| {
                    let v = self.eval(j, t);
                    let d = self.slope(j, t, Side::Right);
                    v * v + d * d
                };
                integrate_pw(f, self.mesh.nodes(j))
            })
            .sum()
    }

    pub fn sobolev_norm(&self) -> f64 {
        self.sobolev_norm_sq().sqrt()
    }

    /// Maximum absolute difference over all edges; exact for piecewise-linear functions since it
    /// samples the union of both node sets.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.mesh.edge_count() != other.mesh.edge_count() {
            return Err(Error::MeshMismatch);
        }
        let mut worst: f64 = 0.0;
        for j in 0..self.mesh.edge_count() {
            for &t in self.mesh.nodes(j).iter().chain(other.mesh.nodes(j)) {
                worst = worst.max((self.eval(j, t) - other.eval(j, t)).abs());
            }
        }
        Ok(worst)
    }

    /// Largest absolute value over nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Points on edge `j` where `ell_j y` can lose smoothness for `y` piecewise linear on `mesh`.
///
/// That is the edge's own nodes, the handover point `(q-1)T1` on outgoing edges, and every
/// time whose delayed argument lands on a node of the edge it reads from. Between two
/// consecutive points `ell_j y` is affine.
pub fn kink_points(problem: &ValidatedProblem, mesh: &GraphMesh, j: usize) -> Vec<f64> {
    let q = problem.q();
    let horizon = problem.horizon(j);
    let t1 = problem.vertex_time();
    let mut pts: Vec<f64> = mesh.nodes(j).to_vec();
    if j == 0 {
        pts.extend(mesh.nodes(0).iter().map(|&s| q * s));
    } else {
        let handover = problem.handover_time();
        pts.push(handover);
        pts.extend(mesh.nodes(j).iter().map(|&s| q * s + handover));
        pts.extend(
            mesh.nodes(0)
                .iter()
                .filter(|&&s| s >= problem.compressed_vertex_time() - problem.time_tol(0))
                .map(|&s| q * s - t1),
        );
    }
    pts.retain(|&t| t >= 0.0 && t <= horizon);
    pts.push(0.0);
    pts.push(horizon);
    let mut out = merge_points(pts, tol_for(horizon));
    *out.last_mut().unwrap() = horizon;
    out
}

const GAUSS2: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

/// Two-point Gauss rule on every piece between consecutive breakpoints.
///
/// Exact (up to roundoff) when `f` is a polynomial of degree at most 3 on each open piece.
pub fn integrate_pw(f: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    breaks
        .windows(2)
        .map(|w| {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[1] + w[0]);
            half * (f(mid - half * GAUSS2) + f(mid + half * GAUSS2))
        })
        .sum()
}

/// Gauss points and weights of [`integrate_pw`] for one piece.
pub(crate) fn gauss_points(a: f64, b: f64) -> [(f64, f64); 2] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    [(mid - half * GAUSS2, half), (mid + half * GAUSS2, half)]
}
