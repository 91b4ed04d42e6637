use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::build_grid;
use crate::profiles::truncate_and_extend;
use crate::solver::{step, SimState};

use super::config::ExperimentConfig;
use super::output::write_atomic;

/// Errors of one refinement series against its reference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSeries {
    /// Cell counts (space) or time steps (time), coarse to fine.
    pub resolutions: Vec<f64>,
    pub reference: f64,
    /// Discrete L² errors of ϑ and v on the coarse nodes.
    pub theta_errors: Vec<f64>,
    pub v_errors: Vec<f64>,
    /// log₂ of consecutive error ratios.
    pub theta_orders: Vec<f64>,
    pub v_orders: Vec<f64>,
    pub monotone: bool,
}

impl ErrorSeries {
    fn new(resolutions: Vec<f64>, reference: f64, errors: Vec<(f64, f64)>) -> Self {
        let theta_errors: Vec<f64> = errors.iter().map(|e| e.0).collect();
        let v_errors: Vec<f64> = errors.iter().map(|e| e.1).collect();
        let orders = |e: &[f64]| e.windows(2).map(|w| (w[0] / w[1]).log2()).collect::<Vec<_>>();
        let decreasing = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
        Self {
            monotone: decreasing(&theta_errors) && decreasing(&v_errors),
            theta_orders: orders(&theta_errors),
            v_orders: orders(&v_errors),
            resolutions,
            reference,
            theta_errors,
            v_errors,
        }
    }

    /// Order from the finest pair, the smaller of the ϑ and v values.
    pub fn observed_order(&self) -> f64 {
        let last = |o: &[f64]| o.last().copied().unwrap_or(f64::NAN);
        last(&self.theta_orders).min(last(&self.v_orders))
    }

    /// Every consecutive order of both fields inside [lo, hi].
    pub fn orders_within(&self, lo: f64, hi: f64) -> bool {
        self.theta_orders.iter().chain(&self.v_orders).all(|&o| o >= lo && o <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config_hash: String,
    pub space: ErrorSeries,
    pub time: ErrorSeries,
}

fn initial_state(cfg: &ExperimentConfig, n_cells: usize) -> Result<SimState<f64>> {
    let c = &cfg.convergence;
    let ext = truncate_and_extend(&cfg.initial_fields()?, -c.half_width, c.half_width)?;
    let (a, b) = ext.domain();
    let grid = Arc::new(build_grid(a, b, n_cells, cfg.grid.stretching)?);
    SimState::from_extended(grid, &ext)
}

/// Fixed-step integration to `t_end`; `t_end/dt` must be an integer.
fn evolve(cfg: &ExperimentConfig, n_cells: usize, dt: f64) -> Result<SimState<f64>> {
    let t_end = cfg.convergence.t_end;
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end || steps < 1.0 {
        return Err(Error::InvalidParameter(format!("t_end {t_end} is not a multiple of dt {dt}")));
    }
    let mut solver = cfg.solver_config();
    solver.dt_init = dt;
    solver.dt_max = dt;
    let mut s = initial_state(cfg, n_cells)?;
    for _ in 0..steps as usize {
        s = step(&s, &solver, dt)
            .map_err(|e| Error::SolverAbort {
                t: s.t,
                reason: e.to_string(),
            })?
            .0;
    }
    Ok(s)
}

/// L² distance of ϑ and v between a coarse state and a nested finer one.
fn nested_error(coarse: &SimState<f64>, fine: &SimState<f64>) -> Result<(f64, f64)> {
    let (nc, nf) = (coarse.len() - 1, fine.len() - 1);
    if nf % nc != 0 {
        return Err(Error::InvalidParameter(format!("grids with {nc} and {nf} cells are not nested")));
    }
    let r = nf / nc;
    let w = coarse.grid.dual_weights();
    let (mut et, mut ev) = (0.0, 0.0);
    for i in 0..coarse.len() {
        let dt = coarse.theta[i] - fine.theta[i * r];
        let dv = coarse.v[i] - fine.v[i * r];
        et += w[i] * dt * dt;
        ev += w[i] * dv * dv;
    }
    Ok((et.sqrt(), ev.sqrt()))
}

/// Spatial series: cells n·2^k at a fixed small step, against a grid
/// `space_reference_factor` times finer than the finest level. Temporal
/// series: steps dt·2^{−k} on one grid, against a step
/// `time_reference_factor` times smaller than the finest. Errors that fail
/// to decrease are reported as [`Error::Inconclusive`].
pub fn convergence_study(cfg: &ExperimentConfig, refinements: usize) -> Result<ConvergenceReport> {
    cfg.validate()?;
    if refinements < 3 {
        return Err(Error::InvalidParameter(format!(
            "a convergence study needs at least 3 refinements, got {refinements}"
        )));
    }
    let c = &cfg.convergence;
    let cells: Vec<usize> = (0..refinements).map(|k| c.n_cells << k).collect();
    let ref_cells = cells[refinements - 1] * c.space_reference_factor;
    let steps: Vec<f64> = (0..refinements).map(|k| c.dt_time / (1u64 << k) as f64).collect();
    let ref_dt = steps[refinements - 1] / c.time_reference_factor as f64;

    let mut jobs: Vec<(usize, f64)> = cells.iter().map(|&n| (n, c.dt_space)).collect();
    jobs.push((ref_cells, c.dt_space));
    jobs.extend(steps.iter().map(|&dt| (c.time_n_cells, dt)));
    jobs.push((c.time_n_cells, ref_dt));
    let states: Vec<SimState<f64>> = jobs.par_iter().map(|&(n, dt)| evolve(cfg, n, dt)).collect::<Result<_>>()?;

    let (space_states, time_states) = states.split_at(refinements + 1);
    let space_err = space_states[..refinements]
        .iter()
        .map(|s| nested_error(s, &space_states[refinements]))
        .collect::<Result<Vec<_>>>()?;
    let time_err = time_states[..refinements]
        .iter()
        .map(|s| nested_error(s, &time_states[refinements]))
        .collect::<Result<Vec<_>>>()?;
    let report = ConvergenceReport {
        config_hash: cfg.hash(),
        space: ErrorSeries::new(cells.iter().map(|&n| n as f64).collect(), ref_cells as f64, space_err),
        time: ErrorSeries::new(steps, ref_dt, time_err),
    };
    if let Some(dir) = &cfg.output_dir {
        write_atomic(&dir.join("convergence.json"), serde_json::to_string_pretty(&report)?.as_bytes())?;
    }
    if !report.space.monotone || !report.time.monotone {
        return Err(Error::Inconclusive(format!(
            "error series not decreasing: space {:?} / {:?}, time {:?} / {:?}",
            report.space.theta_errors, report.space.v_errors, report.time.theta_errors, report.time.v_errors
        )));
    }
    Ok(report)
}
