//! Time integration of the Lagrangian system on a fixed finite interval.

mod scheme;
mod state;
mod tridiag;

pub use scheme::{drain_limit, momentum_system, pressure, step, temperature_system, SolverConfig, StepStats};
pub use state::{compute_g, compute_pressure, RunningExtrema, SimState, THETA_TOL_FACTOR};
pub use tridiag::{solve_tridiagonal, Tridiagonal};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rejections in a row before giving up.
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 20;
const DT_GROWTH: f64 = 1.25;

/// One record per accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub energy: f64,
    pub clamped: usize,
    pub clamped_mass: f64,
    /// Rejections that preceded this step.
    pub rejections: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepLog {
    pub records: Vec<StepRecord>,
}

impl StepLog {
    pub fn accepted(&self) -> usize {
        self.records.len()
    }

    pub fn total_rejections(&self) -> usize {
        self.records.iter().map(|r| r.rejections).sum()
    }

    pub fn total_clamped(&self) -> usize {
        self.records.iter().map(|r| r.clamped).sum()
    }

    pub fn total_clamped_mass(&self) -> f64 {
        self.records.iter().map(|r| r.clamped_mass).sum()
    }

    /// Largest increase of the discrete energy between consecutive steps,
    /// relative to the first recorded energy. Zero when monotone.
    pub fn max_relative_energy_increase(&self, e0: f64) -> f64 {
        let mut prev = e0;
        let mut worst = 0.0f64;
        for r in &self.records {
            worst = worst.max((r.energy - prev) / e0.abs().max(f64::MIN_POSITIVE));
            prev = r.energy;
        }
        worst
    }
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub state: SimState<T>,
    /// States at the requested snapshot times, in order.
    pub snapshots: Vec<SimState<T>>,
    pub log: StepLog,
}

/// Largest admissible step from the current state.
pub fn stable_dt<T: Real>(state: &SimState<T>, cfg: &SolverConfig<T>) -> T {
    let vmax = state.v.iter().fold(T::zero(), |m, x| m.max(x.abs())).max(cfg.v_floor);
    let cfl = cfg.cfl_factor * state.grid.min_width() / vmax;
    cfg.dt_max.min(cfl).min(drain_limit(state, &cfg.gas))
}

/// Integrate to `t_end`, stopping exactly at every snapshot time.
pub fn run<T: Real>(initial: SimState<T>, cfg: &SolverConfig<T>, t_end: T) -> Result<RunOutput<T>> {
    run_observed(initial, cfg, t_end, |_, _| {})
}

/// As [`run`], calling `observer` after every accepted step.
pub fn run_observed<T, F>(initial: SimState<T>, cfg: &SolverConfig<T>, t_end: T, mut observer: F) -> Result<RunOutput<T>>
where
    T: Real,
    F: FnMut(&SimState<T>, &StepRecord),
{
    cfg.validate()?;
    if !(t_end >= initial.t) {
        return Err(Error::InvalidParameter(format!(
            "t_end {t_end} precedes the initial time {}",
            initial.t
        )));
    }
    let mut targets: Vec<T> = cfg
        .snapshot_times
        .iter()
        .copied()
        .filter(|&s| s >= initial.t && s <= t_end)
        .collect();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    targets.dedup();
    if cfg.snapshot_times.len() != targets.len() {
        log::warn!("snapshot times outside [t0, t_end] were dropped");
    }

    let dt_abort = T::lit(1e-12) * t_end.max(T::min_positive_value());
    let eps = T::lit(1e-12) * t_end.max(T::one());
    let mut state = initial;
    let mut snapshots = Vec::with_capacity(targets.len());
    let mut next_target = 0;
    while next_target < targets.len() && targets[next_target] <= state.t + eps {
        snapshots.push(state.clone());
        next_target += 1;
    }

    let mut log = StepLog::default();
    let mut dt = cfg.dt_init;
    let mut rejections = 0usize;
    while state.t < t_end - eps {
        let stop = if next_target < targets.len() { targets[next_target] } else { t_end };
        let mut h = dt.min(stable_dt(&state, cfg));
        let remaining = stop - state.t;
        let hit = h >= remaining - eps;
        if hit {
            h = remaining;
        }
        if h < dt_abort {
            return Err(Error::SolverAbort {
                t: state.t.to_f64_lossy(),
                reason: format!("time step collapsed to {h}"),
            });
        }
        match step(&state, cfg, h) {
            Ok((mut next, stats)) => {
                if hit {
                    next.t = stop;
                }
                let rec = StepRecord {
                    t: next.t.to_f64_lossy(),
                    dt: h.to_f64_lossy(),
                    energy: next.energy(&cfg.gas).to_f64_lossy(),
                    clamped: stats.clamped,
                    clamped_mass: stats.clamped_mass.to_f64_lossy(),
                    rejections,
                };
                observer(&next, &rec);
                log.records.push(rec);
                rejections = 0;
                state = next;
                if !hit {
                    dt = (h * T::lit(DT_GROWTH)).min(cfg.dt_max);
                }
                while next_target < targets.len() && targets[next_target] <= state.t + eps {
                    snapshots.push(state.clone());
                    next_target += 1;
                }
            }
            Err(Error::StepRejected(reason)) => {
                rejections += 1;
                log::debug!("step rejected at t = {}: {reason}", state.t);
                if rejections >= MAX_CONSECUTIVE_REJECTIONS {
                    return Err(Error::SolverAbort {
                        t: state.t.to_f64_lossy(),
                        reason: format!("{rejections} consecutive rejections, last: {reason}"),
                    });
                }
                dt = h * T::lit(0.5);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RunOutput { state, snapshots, log })
}
