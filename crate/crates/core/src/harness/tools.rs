use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::RunReport;
use crate::error::{Error, Result};
use crate::hopf::{
    kelvin_preset, scaling_preset, unit_preset, verify_barrier, zeta0, BarrierSpec, OperatorCoefficients, Point, StateSampler,
};

use super::config::{ExperimentConfig, HopfPreset};
use super::converge::ConvergenceReport;
use super::run::simulate;
use super::sweep::SweepReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfVerifyReport {
    pub preset: HopfPreset,
    pub config_hash: String,
    pub zeta: f64,
    pub zeta_factor: f64,
    pub lam: f64,
    pub cap_lam: f64,
    pub c_star: f64,
    pub r: f64,
    pub dist: f64,
    pub delta_star: f64,
    /// L φ < 0 at every sample; absent when a hypothesis failed.
    pub pass: Option<bool>,
    pub hypothesis_violation: Option<String>,
    pub worst_x: Option<f64>,
    pub worst_t: Option<f64>,
    /// e^{ζ|P − P0*|²}·L φ at the worst sample.
    pub worst_value: Option<f64>,
    pub n_evaluated: usize,
}

/// Built-in configurations behind `hopf verify <preset>`: the unit operator,
/// the scaling transform at ℓ = 3 and the Kelvin transform at ℓ = 4.
pub fn hopf_preset_config(name: &str) -> Option<ExperimentConfig> {
    let (ell, preset) = match name {
        "unit" => (4.0, HopfPreset::Unit),
        "scaling" => (3.0, HopfPreset::Scaling),
        "kelvin" => (4.0, HopfPreset::Kelvin),
        _ => return None,
    };
    let mut cfg = ExperimentConfig::algebraic(ell);
    cfg.name = format!("hopf-{name}");
    cfg.hopf.preset = preset;
    Some(cfg)
}

fn build(cfg: &ExperimentConfig) -> Result<(OperatorCoefficients<f64>, BarrierSpec<f64>)> {
    let h = &cfg.hopf;
    match h.preset {
        HopfPreset::Unit => unit_preset(h.zeta_factor),
        HopfPreset::Constant => {
            let k = h.constant.as_ref().ok_or_else(|| Error::Config("missing hopf.constant".into()))?;
            let coeffs = OperatorCoefficients::constant(k.a0, k.a, k.b, k.c, k.lam, k.cap_lam, k.c_star)?;
            let z = h.zeta_factor * zeta0(1, k.lam, k.cap_lam, k.c_star, k.r, k.dist)?;
            let spec = BarrierSpec::from_offset(Point::new(0.0, 0.0), k.r, k.dist, true, k.delta_star, z)?;
            Ok((coeffs, spec))
        }
        HopfPreset::Scaling | HopfPreset::Kelvin => {
            let mut run_cfg = cfg.clone();
            run_cfg.solver.t_end = h.t0;
            run_cfg.solver.snapshot_times.clear();
            run_cfg.diagnostics.t_probe = h.t0;
            let run = simulate(&run_cfg, cfg.grid.half_width, cfg.grid.n_cells)?;
            if let Some(e) = run.error {
                return Err(e);
            }
            let state = run.final_state.expect("complete run has a final state");
            let sampler = StateSampler::new(state, cfg.density_profile()?);
            let gas = cfg.gas_constants()?;
            if h.preset == HopfPreset::Scaling {
                let ell = cfg
                    .density_profile()?
                    .decay_exponent()
                    .ok_or_else(|| Error::Config("scaling preset needs an algebraic profile".into()))?;
                scaling_preset(&sampler, &gas, ell, h.y0, h.zeta_factor, h.n_samples)
            } else {
                kelvin_preset(&sampler, &gas, h.y0, h.zeta_factor, h.n_samples)
            }
        }
    }
}

/// Build the configured operator and barrier and run [`verify_barrier`].
/// A hypothesis failure is reported in the result, not as an error.
pub fn hopf_verify(cfg: &ExperimentConfig) -> Result<HopfVerifyReport> {
    cfg.validate()?;
    let (coeffs, spec) = build(cfg)?;
    let mut report = HopfVerifyReport {
        preset: cfg.hopf.preset,
        config_hash: cfg.hash(),
        zeta: spec.zeta,
        zeta_factor: cfg.hopf.zeta_factor,
        lam: coeffs.lam,
        cap_lam: coeffs.cap_lam,
        c_star: coeffs.c_star,
        r: spec.r,
        dist: spec.dist(),
        delta_star: spec.delta_star,
        pass: None,
        hypothesis_violation: None,
        worst_x: None,
        worst_t: None,
        worst_value: None,
        n_evaluated: 0,
    };
    match verify_barrier(&coeffs, &spec, cfg.hopf.n_samples) {
        Ok(v) => {
            report.pass = Some(v.pass);
            report.worst_x = Some(v.worst_point.x);
            report.worst_t = Some(v.worst_point.t);
            report.worst_value = Some(v.worst_value);
            report.n_evaluated = v.n_evaluated;
        }
        Err(e @ Error::HypothesisViolated { .. }) => report.hypothesis_violation = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(report)
}

fn collect(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect(&p, out)?;
        } else if matches!(
            p.file_name().and_then(|n| n.to_str()),
            Some("report.json" | "sweep.json" | "convergence.json")
        ) {
            out.push(p);
        }
    }
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into())
}

/// Plain-text digest of every report, sweep and convergence file below `dir`.
pub fn summarize_dir(dir: &Path) -> Result<String> {
    let mut files = Vec::new();
    collect(dir, &mut files)?;
    if files.is_empty() {
        return Err(Error::InvalidParameter(format!("no reports found under {}", dir.display())));
    }
    let mut out = String::new();
    for p in files {
        let text = std::fs::read_to_string(&p)?;
        let rel = p.strip_prefix(dir).unwrap_or(&p).display().to_string();
        match p.file_name().and_then(|n| n.to_str()) {
            Some("report.json") => {
                let r = RunReport::from_json(&text)?;
                let last = r.snapshots.last();
                let _ = writeln!(
                    out,
                    "{rel}: {} L=[{}, {}] nodes={} steps={} rejected={} t={} sup|s|={} inf_theta_core={} kelvin={} energy_increase={:.3e}",
                    if r.complete { "complete" } else { "INCOMPLETE" },
                    r.alpha,
                    r.beta,
                    r.n_nodes,
                    r.accepted_steps,
                    r.rejected_steps,
                    last.map(|s| s.t).unwrap_or(0.0),
                    fmt_opt(last.and_then(|s| s.sup_abs_s)),
                    fmt_opt(last.map(|s| s.inf_theta_core)),
                    fmt_opt(last.and_then(|s| s.kelvin_slope0)),
                    r.max_energy_increase
                );
                if let Some(reason) = &r.abort_reason {
                    let _ = writeln!(out, "    aborted: {reason}");
                }
            }
            Some("sweep.json") => {
                let s: SweepReport = serde_json::from_str(&text)?;
                let _ = writeln!(
                    out,
                    "{rel}: sweep of {} levels, sup|s| increasing: {:?}",
                    s.levels.len(),
                    s.sup_abs_s_increasing
                );
                for l in &s.levels {
                    let _ = writeln!(
                        out,
                        "    level {} L={} cells={} {} sup|s|0={} sup|s|={} inf_theta_core={} probe=[{}, {}] kelvin={}",
                        l.level,
                        l.half_width,
                        l.n_cells,
                        if l.complete { "ok" } else { "FAILED" },
                        fmt_opt(l.sup_abs_s_initial),
                        fmt_opt(l.sup_abs_s),
                        fmt_opt(l.inf_theta_core),
                        fmt_opt(l.probe_ratio_min),
                        fmt_opt(l.probe_ratio_max),
                        fmt_opt(l.kelvin_slope0)
                    );
                }
            }
            Some("convergence.json") => {
                let c: ConvergenceReport = serde_json::from_str(&text)?;
                let _ = writeln!(
                    out,
                    "{rel}: space orders theta {:?} v {:?}; time orders theta {:?} v {:?}",
                    c.space.theta_orders, c.space.v_orders, c.time.theta_orders, c.time.v_orders
                );
            }
            _ => {}
        }
    }
    Ok(out)
}
