use std::io::Write;

use serde::{Deserialize, Serialize};

use super::MonitoredNorms;
use crate::error::Result;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Scalar diagnostics of one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub t: f64,
    pub energy: f64,
    /// sup |s| over the entropy mask; absent when the mask is empty.
    pub sup_abs_s: Option<f64>,
    pub masked_nodes: usize,
    pub inf_theta: f64,
    /// inf ϑ over the inner half of the domain.
    pub inf_theta_core: f64,
    pub j_min: f64,
    pub j_max: f64,
    pub j_lower_bound: f64,
    pub j_upper_bound_max: f64,
    /// Largest relative excess over the explicit J bounds (≤ 0 when inside).
    pub j_bound_violation: f64,
    pub probe_ratio_min: Option<f64>,
    pub probe_ratio_max: Option<f64>,
    pub probe_ratios: Vec<f64>,
    pub probes_skipped: usize,
    pub kelvin_slope0: Option<f64>,
    pub n_t: f64,
    pub m_t: Option<f64>,
    pub growth_ratio: f64,
    pub norms: MonitoredNorms,
}

/// Everything recorded for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub complete: bool,
    pub abort_reason: Option<String>,
    pub alpha: f64,
    pub beta: f64,
    pub n_nodes: usize,
    pub m0: f64,
    pub e0: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub clamped_nodes: usize,
    pub clamped_mass: f64,
    /// Largest per-step relative energy increase seen along the run.
    pub max_energy_increase: f64,
    pub snapshots: Vec<SnapshotRecord>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One row per snapshot; empty cells for absent values.
    pub fn write_series_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "t",
            "energy",
            "sup_abs_s",
            "inf_theta",
            "inf_theta_core",
            "j_min",
            "j_max",
            "j_lower_bound",
            "j_upper_bound_max",
            "probe_ratio_min",
            "probe_ratio_max",
            "kelvin_slope0",
            "n_t",
            "m_t",
            "growth_ratio",
        ])?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for s in &self.snapshots {
            out.write_record([
                s.t.to_string(),
                s.energy.to_string(),
                opt(s.sup_abs_s),
                s.inf_theta.to_string(),
                s.inf_theta_core.to_string(),
                s.j_min.to_string(),
                s.j_max.to_string(),
                s.j_lower_bound.to_string(),
                s.j_upper_bound_max.to_string(),
                opt(s.probe_ratio_min),
                opt(s.probe_ratio_max),
                opt(s.kelvin_slope0),
                s.n_t.to_string(),
                opt(s.m_t),
                s.growth_ratio.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Snapshot at the time closest to `t`.
    pub fn at_time(&self, t: f64) -> Option<&SnapshotRecord> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap_or(std::cmp::Ordering::Equal))
    }
}
