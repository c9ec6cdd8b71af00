//! File formats: problem and report JSON, trajectory and control CSV.
//!
//! CSV files number edges from 1 (the incoming edge); in memory edges are numbered from 0.
//! Floats are written with Rust's shortest round-trip formatting, so reading a file back
//! reproduces the values bit for bit.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{ControlProfile, EdgeControl};
use crate::mesh::{GraphGridFunction, GraphMesh};
use crate::problem::{StarProblem, ValidatedProblem};

pub fn read_problem(path: &Path) -> Result<ValidatedProblem> {
    StarProblem::from_json(&fs::read_to_string(path)?)?.validate()
}

pub fn write_problem(path: &Path, problem: &StarProblem) -> Result<()> {
    fs::write(path, problem.to_json()? + "\n")?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct TrajectoryRow {
    edge: usize,
    t: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct ControlRow {
    edge: usize,
    t: f64,
    u: f64,
}

fn edge_index(edge: usize, edge_count: Option<usize>) -> Result<usize> {
    match edge_count {
        _ if edge == 0 => Err(Error::InvalidInput("edge numbers start at 1".into())),
        Some(m) if edge > m => Err(Error::InvalidInput(format!("edge {edge} does not exist (problem has {m} edges)"))),
        _ => Ok(edge - 1),
    }
}

/// Writes `edge,t,y` rows, edge by edge in node order.
pub fn write_trajectory<W: Write>(out: W, y: &GraphGridFunction) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for j in 0..y.mesh().edge_count() {
        for (&t, &v) in y.mesh().nodes(j).iter().zip(y.values(j)) {
            w.serialize(TrajectoryRow { edge: j + 1, t, y: v })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `edge,t,y` rows into a grid function whose mesh is the set of listed times.
/// Rows may come in any order; every edge from 1 to the largest listed edge must appear.
pub fn read_trajectory<R: Read>(input: R) -> Result<GraphGridFunction> {
    let mut rows: Vec<Vec<(f64, f64)>> = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: TrajectoryRow = row?;
        let j = edge_index(row.edge, None)?;
        if rows.len() <= j {
            rows.resize(j + 1, Vec::new());
        }
        rows[j].push((row.t, row.y));
    }
    for (j, edge) in rows.iter_mut().enumerate() {
        if edge.is_empty() {
            return Err(Error::InvalidInput(format!("no rows for edge {}", j + 1)));
        }
        edge.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let mesh = GraphMesh::from_nodes(rows.iter().map(|e| e.iter().map(|r| r.0).collect()).collect())?;
    GraphGridFunction::new(mesh, rows.iter().map(|e| e.iter().map(|r| r.1).collect()).collect())
}

pub fn read_trajectory_file(path: &Path) -> Result<GraphGridFunction> {
    read_trajectory(fs::File::open(path)?)
}

pub fn write_trajectory_file(path: &Path, y: &GraphGridFunction) -> Result<()> {
    write_trajectory(fs::File::create(path)?, y)
}

/// Writes `edge,t,u` rows; a jump appears as two rows with the same time, left limit first.
pub fn write_controls<W: Write>(out: W, controls: &ControlProfile) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (j, u) in controls.edges().iter().enumerate() {
        for (t, v) in u.samples() {
            w.serialize(ControlRow { edge: j + 1, t, u: v })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `edge,t,u` rows for a problem with `edge_count` edges. Within one edge the rows
/// keep their file order, times must be nondecreasing and a repeated time marks a jump.
pub fn read_controls<R: Read>(input: R, edge_count: usize) -> Result<ControlProfile> {
    let mut samples: Vec<Vec<(f64, f64)>> = vec![Vec::new(); edge_count];
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: ControlRow = row?;
        samples[edge_index(row.edge, Some(edge_count))?].push((row.t, row.u));
    }
    let edges = samples
        .iter()
        .enumerate()
        .map(|(j, s)| {
            EdgeControl::from_samples(s).map_err(|e| match e {
                Error::InvalidControl(msg) => Error::InvalidControl(format!("edge {}: {msg}", j + 1)),
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ControlProfile::new(edges))
}

pub fn read_controls_file(path: &Path, edge_count: usize) -> Result<ControlProfile> {
    read_controls(fs::File::open(path)?, edge_count)
}

pub fn write_controls_file(path: &Path, controls: &ControlProfile) -> Result<()> {
    write_controls(fs::File::create(path)?, controls)
}

/// Writes serializable rows as CSV with a header taken from the field names.
pub fn write_table<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
