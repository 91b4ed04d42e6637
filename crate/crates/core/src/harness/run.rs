use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    entropy_field, entropy_ratio_probe, far_field_probes, farfield_growth_check, inf_theta_within, j_bounds, kelvin_damping,
    kelvin_diag_window, monitored_norms, scaling_diag, ConservedQuantities, RunReport, SnapshotRecord, REPORT_SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::grid::build_grid;
use crate::profiles::{truncate_and_extend, GasConstants};
use crate::solver::{compute_g, run_observed, SimState, StepLog};

use super::config::ExperimentConfig;
use super::output::{svg_line_plot, write_atomic};

/// Everything a diagnostics pass needs besides the state.
#[derive(Debug, Clone)]
pub struct DiagContext {
    pub gas: GasConstants<f64>,
    pub cons: ConservedQuantities<f64>,
    pub theta_floor: f64,
    /// Data half width L.
    pub half_width: f64,
    /// core_fraction·L
    pub core: f64,
    pub probes: Vec<usize>,
    pub ell_rho: Option<f64>,
    pub kelvin_y_fit: f64,
}

impl DiagContext {
    pub fn new(cfg: &ExperimentConfig, initial: &SimState<f64>, half_width: f64) -> Result<Self> {
        let gas = cfg.gas_constants()?;
        let d = &cfg.diagnostics;
        let core = d.core_fraction * half_width;
        let theta_max = initial.theta.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            gas,
            cons: ConservedQuantities::from_initial(initial, &gas),
            theta_floor: d.theta_floor_factor * theta_max,
            half_width,
            core,
            probes: far_field_probes(&initial.grid, core, d.probe_fraction),
            ell_rho: cfg.density_profile()?.decay_exponent(),
            kelvin_y_fit: d.kelvin_y_fit,
        })
    }
}

pub fn snapshot_record(state: &SimState<f64>, ctx: &DiagContext) -> SnapshotRecord {
    let gas = &ctx.gas;
    let ent = entropy_field(state, gas, ctx.theta_floor);
    let bounds = j_bounds(state, &ctx.cons, gas);
    let probe = entropy_ratio_probe(state, &ent, &ctx.probes);
    let kelvin = kelvin_diag_window(state, gas, ctx.kelvin_y_fit, ctx.core).ok();
    let run = &state.running;
    let m_t = ctx
        .ell_rho
        .filter(|&l| l > 2.0)
        .and_then(|l| scaling_diag(state, gas, l).ok())
        .map(|s| s.m_t);
    SnapshotRecord {
        t: state.t,
        energy: state.energy(gas),
        sup_abs_s: ent.sup_abs(),
        masked_nodes: ent.count(),
        inf_theta: state.theta.iter().copied().fold(f64::INFINITY, f64::min),
        inf_theta_core: inf_theta_within(state, ctx.core),
        j_min: state.j.iter().copied().fold(f64::INFINITY, f64::min),
        j_max: state.j.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        j_lower_bound: bounds.lower,
        j_upper_bound_max: bounds.upper.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        j_bound_violation: bounds.worst_violation(&state.j),
        probe_ratio_min: probe.min(),
        probe_ratio_max: probe.max(),
        probe_ratios: probe.ratios.iter().map(|r| r.1).collect(),
        probes_skipped: probe.warnings.len(),
        kelvin_slope0: kelvin.map(|k| k.slope0),
        n_t: kelvin_damping(gas, run.vy_max, run.j_min, run.c1),
        m_t,
        growth_ratio: farfield_growth_check(state).max_ratio,
        norms: monitored_norms(state, gas),
    }
}

/// One simulation with its diagnostics. `error` holds the abort, if any;
/// the report then covers the snapshots reached before it.
#[derive(Debug)]
pub struct LevelRun {
    pub report: RunReport,
    pub ctx: DiagContext,
    pub initial: SimState<f64>,
    pub snapshots: Vec<SimState<f64>>,
    pub final_state: Option<SimState<f64>>,
    pub error: Option<Error>,
}

impl LevelRun {
    /// Stored snapshot closest to `t`.
    pub fn snapshot_at(&self, t: f64) -> Option<&SimState<f64>> {
        self.snapshots.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

/// Simulate `cfg` with data truncated to [−L, L] on a grid of `n_cells`
/// cells over [−L−1, L+1]. Setup problems are returned as errors; solver
/// aborts end up in [`LevelRun::error`].
pub fn simulate(cfg: &ExperimentConfig, half_width: f64, n_cells: usize) -> Result<LevelRun> {
    let fields = cfg.initial_fields()?;
    let ext = truncate_and_extend(&fields, -half_width, half_width)?;
    let (a, b) = ext.domain();
    let grid = Arc::new(build_grid(a, b, n_cells, cfg.grid.stretching)?);
    let initial = SimState::from_extended(grid, &ext)?;
    let ctx = DiagContext::new(cfg, &initial, half_width)?;
    let solver = cfg.solver_config();
    let t_end = cfg.solver.t_end;
    let targets = solver.snapshot_times.clone();
    let eps = 1e-12 * t_end.max(1.0);

    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    if targets.iter().any(|&s| s.abs() <= eps) {
        records.push(snapshot_record(&initial, &ctx));
        snapshots.push(initial.clone());
    }
    let mut log = StepLog::default();
    let result = run_observed(initial.clone(), &solver, t_end, |state, rec| {
        log.records.push(rec.clone());
        if targets.iter().any(|&s| (s - state.t).abs() <= eps) {
            records.push(snapshot_record(state, &ctx));
            snapshots.push(state.clone());
        }
    });
    let (final_state, error) = match result {
        Ok(out) => (Some(out.state), None),
        Err(e) => (None, Some(e)),
    };
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config_hash: cfg.hash(),
        config: serde_json::to_value(cfg)?,
        complete: error.is_none(),
        abort_reason: error.as_ref().map(|e| e.to_string()),
        alpha: a,
        beta: b,
        n_nodes: n_cells + 1,
        m0: ctx.cons.m0,
        e0: ctx.cons.e0,
        accepted_steps: log.accepted(),
        rejected_steps: log.total_rejections(),
        clamped_nodes: log.total_clamped(),
        clamped_mass: log.total_clamped_mass(),
        max_energy_increase: log.max_relative_energy_increase(ctx.cons.e0),
        snapshots: records,
    };
    Ok(LevelRun {
        report,
        ctx,
        initial,
        snapshots,
        final_state,
        error,
    })
}

/// Columns y, rho0, J, v, theta, G, s of one snapshot; s is empty off the mask.
pub fn write_field_csv(path: &Path, state: &SimState<f64>, ctx: &DiagContext) -> Result<()> {
    let ent = entropy_field(state, &ctx.gas, ctx.theta_floor);
    let g = compute_g(state, &ctx.gas);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["y", "rho0", "J", "v", "theta", "G", "s"])?;
    for (i, y) in state.grid.nodes().iter().enumerate() {
        let s = if ent.mask[i] { ent.s[i].to_string() } else { String::new() };
        w.write_record([
            y.to_string(),
            state.rho0[i].to_string(),
            state.j[i].to_string(),
            state.v[i].to_string(),
            state.theta[i].to_string(),
            g[i].to_string(),
            s,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FieldSidecar {
    schema_version: u32,
    config_hash: String,
    t: f64,
    n_nodes: usize,
    columns: Vec<String>,
}

/// report.json, series.csv, per-snapshot field files and optional SVG plots.
pub fn write_run_outputs(dir: &Path, cfg: &ExperimentConfig, run: &LevelRun) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join("report.json"), run.report.to_json()?.as_bytes())?;
    let mut series = Vec::new();
    run.report.write_series_csv(&mut series)?;
    write_atomic(&dir.join("series.csv"), &series)?;
    if cfg.diagnostics.write_fields {
        for s in &run.snapshots {
            let stem = format!("fields_t{:.6}", s.t);
            write_field_csv(&dir.join(format!("{stem}.csv")), s, &run.ctx)?;
            let side = FieldSidecar {
                schema_version: REPORT_SCHEMA_VERSION,
                config_hash: run.report.config_hash.clone(),
                t: s.t,
                n_nodes: s.len(),
                columns: ["y", "rho0", "J", "v", "theta", "G", "s"].map(String::from).to_vec(),
            };
            write_atomic(&dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&side)?.as_bytes())?;
        }
    }
    if cfg.diagnostics.svg {
        let snaps = &run.report.snapshots;
        let ts: Vec<f64> = snaps.iter().map(|s| s.t).collect();
        let svg = svg_line_plot(
            &format!("{} (L = {})", cfg.name, run.ctx.half_width),
            "t",
            &ts,
            &[
                ("sup |s|", snaps.iter().map(|s| s.sup_abs_s.unwrap_or(f64::NAN)).collect()),
                ("inf theta (core)", snaps.iter().map(|s| s.inf_theta_core).collect()),
                ("energy", snaps.iter().map(|s| s.energy).collect()),
            ],
        );
        write_atomic(&dir.join("series.svg"), svg.as_bytes())?;
    }
    Ok(())
}

/// Validate, simulate at `grid.half_width`, write outputs when an output
/// directory is configured. A solver abort is returned as the error after
/// the partial report (marked incomplete) has been written.
pub fn run_single(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let run = simulate(cfg, cfg.grid.half_width, cfg.grid.n_cells)?;
    if let Some(dir) = &cfg.output_dir {
        write_run_outputs(dir, cfg, &run)?;
    }
    match run.error {
        Some(e) => Err(e),
        None => Ok(run.report),
    }
}
