use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::entropy_field;
use crate::error::{Error, Result};
use crate::grid::DomainSequence;

use super::config::ExperimentConfig;
use super::output::{svg_line_plot, write_atomic};
use super::run::{simulate, write_run_outputs, LevelRun};

/// Per-level values at the probe time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: usize,
    pub half_width: f64,
    pub n_cells: usize,
    pub complete: bool,
    pub error: Option<String>,
    pub config_hash: String,
    /// sup |s| over the mask at t = 0.
    pub sup_abs_s_initial: Option<f64>,
    pub t_probe: f64,
    pub sup_abs_s: Option<f64>,
    pub inf_theta_core: Option<f64>,
    pub probe_ratio_min: Option<f64>,
    pub probe_ratio_max: Option<f64>,
    pub kelvin_slope0: Option<f64>,
    pub max_energy_increase: f64,
}

/// Differences between consecutive levels n and n+1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDelta {
    pub from: usize,
    pub to: usize,
    /// (q_{n+1} − q_n)/|q_n|
    pub sup_abs_s_change: Option<f64>,
    pub inf_theta_core_change: Option<f64>,
    pub kelvin_slope0_change: Option<f64>,
    /// max |ϑ_{n+1} − ϑ_n| over level-n nodes in its core window, relative to max ϑ_n.
    pub overlap_theta: Option<f64>,
    /// Same for v, relative to max |v_n|.
    pub overlap_v: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config_hash: String,
    pub sequence: DomainSequence,
    pub levels: Vec<LevelSummary>,
    pub deltas: Vec<LevelDelta>,
    /// sup |s|(t_probe) strictly increasing over all levels; absent when a level failed.
    pub sup_abs_s_increasing: Option<bool>,
}

fn rel_change(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if a != 0.0 => Some((b - a) / a.abs()),
        _ => None,
    }
}

/// Cells at level n.
pub fn level_cells(cfg: &ExperimentConfig, seq: &DomainSequence, n: usize) -> usize {
    if cfg.grid.scale_cells_with_level {
        (cfg.grid.n_cells as f64 * seq.growth.powi(n as i32)).round() as usize
    } else {
        cfg.grid.n_cells
    }
}

fn summarize(cfg: &ExperimentConfig, level: usize, n_cells: usize, run: &LevelRun) -> LevelSummary {
    let t_probe = cfg.diagnostics.t_probe;
    let rec = run
        .report
        .snapshots
        .iter()
        .find(|s| (s.t - t_probe).abs() <= 1e-12 * t_probe.max(1.0));
    let initial = entropy_field(&run.initial, &run.ctx.gas, run.ctx.theta_floor).sup_abs();
    LevelSummary {
        level,
        half_width: run.ctx.half_width,
        n_cells,
        complete: run.error.is_none(),
        error: run.error.as_ref().map(|e| e.to_string()),
        config_hash: run.report.config_hash.clone(),
        sup_abs_s_initial: initial,
        t_probe,
        sup_abs_s: rec.and_then(|r| r.sup_abs_s),
        inf_theta_core: rec.map(|r| r.inf_theta_core),
        probe_ratio_min: rec.and_then(|r| r.probe_ratio_min),
        probe_ratio_max: rec.and_then(|r| r.probe_ratio_max),
        kelvin_slope0: rec.and_then(|r| r.kelvin_slope0),
        max_energy_increase: run.report.max_energy_increase,
    }
}

fn overlap(coarse: &LevelRun, fine: &LevelRun, t: f64) -> (Option<f64>, Option<f64>) {
    let (Some(a), Some(b)) = (coarse.snapshot_at(t), fine.snapshot_at(t)) else {
        return (None, None);
    };
    if (a.t - t).abs() > 1e-12 || (b.t - t).abs() > 1e-12 {
        return (None, None);
    }
    let core = coarse.ctx.core;
    let mut dt: f64 = 0.0;
    let mut dv: f64 = 0.0;
    let mut tmax: f64 = 0.0;
    let mut vmax: f64 = 0.0;
    for (i, &y) in a.grid.nodes().iter().enumerate() {
        if y.abs() > core {
            continue;
        }
        let (Some(th), Some(v)) = (b.grid.interpolate(&b.theta, y), b.grid.interpolate(&b.v, y)) else {
            continue;
        };
        dt = dt.max((th - a.theta[i]).abs());
        dv = dv.max((v - a.v[i]).abs());
        tmax = tmax.max(a.theta[i].abs());
        vmax = vmax.max(a.v[i].abs());
    }
    let rel = |d: f64, m: f64| if m > 0.0 { Some(d / m) } else { Some(d) };
    (rel(dt, tmax), rel(dv, vmax))
}

/// One run per domain level, in parallel, each with data truncated to its
/// own interval. Level failures are recorded and the sweep continues. With
/// an output directory each level writes into `level_<n>/` and the sweep
/// summary goes to `sweep.json` and `sweep.csv`.
pub fn run_domain_sweep(cfg: &ExperimentConfig, seq: &DomainSequence) -> Result<SweepReport> {
    cfg.validate()?;
    seq.validate()?;
    if seq.n_levels < 3 {
        return Err(Error::InvalidParameter(format!(
            "a sweep needs at least 3 levels, got {}",
            seq.n_levels
        )));
    }
    let runs: Vec<(usize, Result<LevelRun>)> = (0..seq.n_levels)
        .into_par_iter()
        .map(|n| {
            let (_, half) = seq.level(n).expect("level within the sequence");
            let cells = level_cells(cfg, seq, n);
            let run = simulate(cfg, half, cells);
            if let (Ok(run), Some(dir)) = (&run, &cfg.output_dir) {
                if let Err(e) = write_run_outputs(&dir.join(format!("level_{n}")), cfg, run) {
                    log::error!("level {n}: writing outputs failed: {e}");
                }
            }
            (cells, run)
        })
        .collect();

    let mut levels = Vec::with_capacity(runs.len());
    for (n, (cells, run)) in runs.iter().enumerate() {
        levels.push(match run {
            Ok(run) => summarize(cfg, n, *cells, run),
            Err(e) => LevelSummary {
                level: n,
                half_width: seq.level(n)?.1,
                n_cells: *cells,
                complete: false,
                error: Some(e.to_string()),
                config_hash: cfg.hash(),
                sup_abs_s_initial: None,
                t_probe: cfg.diagnostics.t_probe,
                sup_abs_s: None,
                inf_theta_core: None,
                probe_ratio_min: None,
                probe_ratio_max: None,
                kelvin_slope0: None,
                max_energy_increase: f64::NAN,
            },
        });
    }
    let t_probe = cfg.diagnostics.t_probe;
    let deltas = (0..levels.len() - 1)
        .map(|n| {
            let (a, b) = (&levels[n], &levels[n + 1]);
            let (ot, ov) = match (&runs[n].1, &runs[n + 1].1) {
                (Ok(ra), Ok(rb)) => overlap(ra, rb, t_probe),
                _ => (None, None),
            };
            LevelDelta {
                from: n,
                to: n + 1,
                sup_abs_s_change: rel_change(a.sup_abs_s, b.sup_abs_s),
                inf_theta_core_change: rel_change(a.inf_theta_core, b.inf_theta_core),
                kelvin_slope0_change: rel_change(a.kelvin_slope0, b.kelvin_slope0),
                overlap_theta: ot,
                overlap_v: ov,
            }
        })
        .collect();
    let sups: Option<Vec<f64>> = levels.iter().map(|l| l.sup_abs_s.filter(|_| l.complete)).collect();
    let report = SweepReport {
        config_hash: cfg.hash(),
        sequence: *seq,
        levels,
        deltas,
        sup_abs_s_increasing: sups.map(|s| s.windows(2).all(|w| w[1] > w[0])),
    };
    if let Some(dir) = &cfg.output_dir {
        write_sweep_outputs(dir, cfg, &report)?;
    }
    Ok(report)
}

fn write_sweep_outputs(dir: &std::path::Path, cfg: &ExperimentConfig, report: &SweepReport) -> Result<()> {
    write_atomic(&dir.join("sweep.json"), serde_json::to_string_pretty(report)?.as_bytes())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "level",
        "half_width",
        "n_cells",
        "complete",
        "sup_abs_s_initial",
        "sup_abs_s",
        "inf_theta_core",
        "probe_ratio_min",
        "probe_ratio_max",
        "kelvin_slope0",
    ])?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for l in &report.levels {
        w.write_record([
            l.level.to_string(),
            l.half_width.to_string(),
            l.n_cells.to_string(),
            l.complete.to_string(),
            opt(l.sup_abs_s_initial),
            opt(l.sup_abs_s),
            opt(l.inf_theta_core),
            opt(l.probe_ratio_min),
            opt(l.probe_ratio_max),
            opt(l.kelvin_slope0),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(&dir.join("sweep.csv"), &bytes)?;
    if cfg.diagnostics.svg {
        let xs: Vec<f64> = report.levels.iter().map(|l| l.half_width.log2()).collect();
        let get = |f: fn(&LevelSummary) -> Option<f64>| report.levels.iter().map(|l| f(l).unwrap_or(f64::NAN)).collect::<Vec<_>>();
        let svg = svg_line_plot(
            &format!("{}: sweep at t = {}", cfg.name, cfg.diagnostics.t_probe),
            "log2 L",
            &xs,
            &[
                ("sup |s|", get(|l| l.sup_abs_s)),
                ("inf theta (core)", get(|l| l.inf_theta_core)),
                ("Kelvin slope", get(|l| l.kelvin_slope0)),
            ],
        );
        write_atomic(&dir.join("sweep.svg"), svg.as_bytes())?;
    }
    Ok(())
}
