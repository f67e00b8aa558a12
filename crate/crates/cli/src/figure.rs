//! Plot data for `u_k` and `∇u_k`.
//!
//! `u_k{k}.csv` lists every breakpoint `(t, value)` exactly, with float
//! copies for plotting tools. `grad_u_k{k}.csv` has one row per interval of
//! the step function, tagged by its midpoint. Both files rebuild the exact
//! functions through [`read_nodes`] and [`read_steps`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use viproplab_core::exact::{format_rational, int, to_f64};
use viproplab_core::{parse_rational, sawtooth, PiecewiseConstFn, PiecewiseLinearFn};

use crate::{CliError, CliResult, FigureArgs, Outcome, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRow {
    pub t: String,
    pub value: String,
    pub t_f64: f64,
    pub value_f64: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub t_left: String,
    pub t_right: String,
    pub t_mid: String,
    pub value: String,
    pub t_mid_f64: f64,
    pub value_f64: f64,
}

pub fn node_rows(u: &PiecewiseLinearFn) -> Vec<NodeRow> {
    u.breakpoints()
        .iter()
        .zip(u.values())
        .map(|(t, v)| NodeRow {
            t: format_rational(t),
            value: format_rational(v),
            t_f64: to_f64(t),
            value_f64: to_f64(v),
        })
        .collect()
}

pub fn step_rows(d: &PiecewiseConstFn) -> Vec<StepRow> {
    d.intervals()
        .map(|(a, b, c)| {
            let mid = (a + b) / int(2);
            StepRow {
                t_left: format_rational(a),
                t_right: format_rational(b),
                t_mid: format_rational(&mid),
                value: format_rational(c),
                t_mid_f64: to_f64(&mid),
                value_f64: to_f64(c),
            }
        })
        .collect()
}

pub fn file_names(dir: &Path, k: u64) -> (PathBuf, PathBuf) {
    (dir.join(format!("u_k{k}.csv")), dir.join(format!("grad_u_k{k}.csv")))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
}

/// Rebuilds `u_k` from the exact columns of a node file.
pub fn read_nodes(path: &Path) -> CliResult<PiecewiseLinearFn> {
    let rows: Vec<NodeRow> = read_rows(path)?;
    let mut ts = Vec::with_capacity(rows.len());
    let mut vs = Vec::with_capacity(rows.len());
    for row in rows {
        ts.push(parse_rational(&row.t)?);
        vs.push(parse_rational(&row.value)?);
    }
    Ok(PiecewiseLinearFn::new(ts, vs)?)
}

/// Rebuilds `∇u_k` from the exact columns of a step file.
pub fn read_steps(path: &Path) -> CliResult<PiecewiseConstFn> {
    let rows: Vec<StepRow> = read_rows(path)?;
    let Some(last) = rows.last() else {
        return Err(CliError::Usage(format!("{}: no rows", path.display())));
    };
    let mut breakpoints = Vec::with_capacity(rows.len() + 1);
    for row in &rows {
        breakpoints.push(parse_rational(&row.t_left)?);
    }
    breakpoints.push(parse_rational(&last.t_right)?);
    let values = rows
        .iter()
        .map(|row| parse_rational(&row.value))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PiecewiseConstFn::new(breakpoints, values)?)
}

/// Writes both files for `u_k` into `dir`, creating it if needed.
pub fn write_figure(dir: &Path, k: u64) -> CliResult<(PathBuf, PathBuf)> {
    let u = sawtooth(k)?;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let (nodes, steps) = file_names(dir, k);
    write_rows(&nodes, &node_rows(&u))?;
    write_rows(&steps, &step_rows(&u.derivative()))?;
    Ok((nodes, steps))
}

pub fn cmd_figure(args: &FigureArgs) -> CliResult<Outcome> {
    let (nodes, steps) = write_figure(&args.out, args.k)?;
    Ok(Outcome {
        status: Status::Success,
        stdout: format!("{}\n{}\n", nodes.display(), steps.display()),
        notes: Vec::new(),
    })
}
