use std::sync::Arc;

use fraclap::weighted_eigen::principal_eigen;
use fraclap::*;
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::table::{float, Row, Table};
use crate::weight_spec::parse_weight;

pub const EIGEN_HEADER: [&str; 8] = ["s", "L", "weight", "K", "lambda", "positive", "rayleigh_residual", "iters"];
pub const BRANCH_HEADER: [&str; 6] = ["lambda", "h", "sup_u", "min_u", "mass_residual", "newton_iters"];
pub const COMPARE_HEADER: [&str; 6] = ["s", "L", "weight", "lambda_spectral", "lambda_oracle", "rel_err"];
pub const EXTEND_HEADER: [&str; 4] = ["x", "y", "v", "energy"];

/// The 1D oracle runs on `ORACLE_1D_FACTOR * oracle_nx` cells (and twice
/// that for the extrapolation), since it is far cheaper than the cylinder.
pub const ORACLE_1D_FACTOR: usize = 16;

pub fn run(config: &RunConfig) -> Table {
    match config.command {
        Command::Eigen | Command::Sweep => run_sweep(config),
        Command::Branch => run_branch(config),
        Command::Compare => run_compare(config),
        Command::Extend => run_extend(config),
    }
}

fn weight(spec: &str) -> WeightF64 {
    parse_weight(spec).expect("weight specs are checked when the config is resolved")
}

/// `(weight, L, s)` tuples in output order.
fn jobs<'a>(config: &'a RunConfig, s_values: &[f64]) -> Vec<(&'a str, f64, f64)> {
    let mut out = Vec::with_capacity(config.weights.len() * config.lengths.len() * s_values.len());
    for w in &config.weights {
        for &l in &config.lengths {
            for &s in s_values {
                out.push((w.as_str(), l, s));
            }
        }
    }
    out
}

fn eigen_row(spec: &str, length: f64, s: f64, k: usize) -> Row {
    let mut cells = vec![float(s), float(length), spec.to_owned(), k.to_string()];
    let solved = (|| {
        let power = FracPower::new(s)?;
        let basis = Arc::new(Basis::with_default_quadrature(length, k)?);
        let mat = assemble_m(&basis, &weight(spec));
        let pair = smallest_positive_eigen(&mat, &basis, power)?;
        let res = rayleigh_residual(&pair, &mat, power);
        Ok::<_, Error>((pair, res))
    })();
    match solved {
        Ok((pair, res)) => {
            cells.extend([float(pair.lambda), pair.positive.to_string(), float(res), pair.sweeps.to_string()]);
            Row::ok(cells)
        }
        Err(e) => {
            cells.extend([float(f64::NAN), "false".into(), float(f64::NAN), "0".into()]);
            Row::failed(cells, e.to_string())
        }
    }
}

/// One row per `(weight, L, s)`, ordered in that nesting; rows are solved
/// in parallel.
pub fn run_sweep(config: &RunConfig) -> Table {
    let s_values = config.s_values();
    let jobs = jobs(config, &s_values);
    let mut table = Table::new(EIGEN_HEADER.to_vec());
    table.rows = jobs.par_iter().map(|&(w, l, s)| eigen_row(w, l, s, config.k)).collect();
    table
}

pub fn run_branch(config: &RunConfig) -> Table {
    let mut table = Table::new(BRANCH_HEADER.to_vec());
    let length = config.lengths[0];
    let m = weight(&config.weights[0]);
    let traced = Basis::with_default_quadrature(length, config.k)
        .map(Arc::new)
        .and_then(|b| branch_continue(&m, &b, &BranchOptions::new(config.lambda_max)));
    match traced {
        Ok(branch) => {
            for p in &branch.points {
                let d = &p.diagnostics;
                table.rows.push(Row::ok(vec![
                    float(p.state.lambda),
                    float(p.state.h),
                    float(d.sup_u),
                    float(d.min_u),
                    float(d.mass_residual),
                    p.newton_iters.to_string(),
                ]));
            }
        }
        Err(e) => {
            let last = match e {
                Error::BranchStall { last_lambda } => last_lambda,
                _ => f64::NAN,
            };
            let mut cells = vec![float(last)];
            cells.extend(std::iter::repeat_n(float(f64::NAN), 4));
            cells.push("0".into());
            table.rows.push(Row::failed(cells, e.to_string()));
        }
    }
    table
}

fn oracle_lambda(config: &RunConfig, m: &WeightF64, length: f64, s: f64) -> Result<f64> {
    if s == 1.0 {
        Ok(fd_eigen_laplace(length, ORACLE_1D_FACTOR * config.oracle_nx, m)?.lambda)
    } else if s == 0.5 {
        let grid = match config.oracle_y {
            Some(y) => CylinderGrid::new(length, config.oracle_nx, config.oracle_ny, y)?,
            None => CylinderGrid::with_default_height(length, config.oracle_nx, config.oracle_ny)?,
        };
        Ok(fd_cylinder_eigen(&grid, m)?.lambda)
    } else {
        Err(Error::InvalidParameter(format!("no oracle for s = {s}; use 0.5 or 1")))
    }
}

/// Spectral against finite-difference values for `s = 1/2` (cylinder) and
/// `s = 1` (interval), per weight and `L`.
pub fn run_compare(config: &RunConfig) -> Table {
    let s_values = match config.s {
        Some(s) => vec![s],
        None => vec![0.5, 1.0],
    };
    let jobs = jobs(config, &s_values);
    let mut table = Table::new(COMPARE_HEADER.to_vec());
    table.rows = jobs
        .par_iter()
        .map(|&(spec, length, s)| {
            let m = weight(spec);
            let mut cells = vec![float(s), float(length), spec.to_owned()];
            let pair = FracPower::new(s).and_then(|p| principal_eigen(length, config.k, &m, p)).map(|p| p.lambda);
            let oracle = oracle_lambda(config, &m, length, s);
            match (pair, oracle) {
                (Ok(a), Ok(b)) => {
                    cells.extend([float(a), float(b), float((a - b).abs() / b.abs())]);
                    Row::ok(cells)
                }
                (a, b) => {
                    let note = [
                        a.as_ref().err().map(|e| format!("spectral: {e}")),
                        b.as_ref().err().map(|e| format!("oracle: {e}")),
                    ]
                    .into_iter()
                    .flatten()
                    .collect::<Vec<_>>()
                    .join("; ");
                    cells.extend([
                        float(*a.as_ref().unwrap_or(&f64::NAN)),
                        float(*b.as_ref().unwrap_or(&f64::NAN)),
                        float(f64::NAN),
                    ]);
                    Row::failed(cells, note)
                }
            }
        })
        .collect();
    table
}

/// Harmonic extension of the principal `s = 1/2` eigenfunction sampled on
/// `oracle_nx × oracle_ny` points of `[0, L] × [0, Y]`, with the energy
/// profile at each height.
pub fn run_extend(config: &RunConfig) -> Table {
    let mut table = Table::new(EXTEND_HEADER.to_vec());
    let length = config.lengths[0];
    let m = weight(&config.weights[0]);
    let height = config.oracle_y.unwrap_or(8.0 * length / std::f64::consts::PI);
    let (nx, ny) = (config.oracle_nx.max(2), config.oracle_ny.max(2));
    match principal_eigen(length, config.k, &m, FracPower::half()) {
        Ok(pair) => {
            let ext = ExtensionField::new(pair.field);
            for j in 0..ny {
                let y = height * j as f64 / (ny - 1) as f64;
                let energy = ext.energy_profile(y);
                for i in 0..nx {
                    let x = length * i as f64 / (nx - 1) as f64;
                    let v = ext.eval(x, y).expect("grid points lie in the cylinder");
                    table.rows.push(Row::ok(vec![float(x), float(y), float(v), float(energy)]));
                }
            }
        }
        Err(e) => table.rows.push(Row::failed(vec![float(f64::NAN); 4], e.to_string())),
    }
    table
}
