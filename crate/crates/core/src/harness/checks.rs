//! Pass/fail assertions behind the CLI `--check` flag.

use serde::{Deserialize, Serialize};

use crate::diagnostics::RunReport;
use crate::profiles::Regime;

use super::config::ExperimentConfig;
use super::converge::ConvergenceReport;
use super::sweep::SweepReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            pass,
            detail,
        }
    }
}

/// Relative slack on the per-step energy increase.
pub const ENERGY_SLACK: f64 = 1e-8;
/// Relative slack on the explicit J bounds.
pub const J_BOUND_SLACK: f64 = 0.05;

pub fn run_checks(report: &RunReport) -> Vec<Check> {
    let worst_j = report
        .snapshots
        .iter()
        .map(|s| s.j_bound_violation)
        .fold(f64::NEG_INFINITY, f64::max);
    vec![
        Check::new("complete", report.complete, report.abort_reason.clone().unwrap_or_default()),
        Check::new(
            "energy nonincreasing",
            report.max_energy_increase <= ENERGY_SLACK,
            format!("max relative increase {:.3e}", report.max_energy_increase),
        ),
        Check::new(
            "J bounds",
            worst_j <= J_BOUND_SLACK,
            format!("worst relative violation {worst_j:.3e}"),
        ),
        Check::new("norms finite", report.snapshots.iter().all(|s| s.norms.all_finite()), String::new()),
    ]
}

/// Regime-dependent trend checks on the last two levels of a sweep: the
/// slow-decay control stays within 10%, the intermediate band grows sup |s|
/// strictly and past twice the initial value, the fast band keeps inf ϑ,
/// the Kelvin slope (both within 20%) and the probe ratios (≥ 0.8·c_v(γ−1)).
pub fn sweep_checks(cfg: &ExperimentConfig, report: &SweepReport) -> Vec<Check> {
    let mut out = vec![Check::new(
        "all levels complete",
        report.levels.iter().all(|l| l.complete),
        report.levels.iter().filter_map(|l| l.error.clone()).collect::<Vec<_>>().join("; "),
    )];
    let n = report.levels.len();
    if n < 2 {
        return out;
    }
    let (prev, last) = (&report.levels[n - 2], &report.levels[n - 1]);
    let change = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) if a != 0.0 => Some((b - a) / a.abs()),
        _ => None,
    };
    let Some(ell) = cfg.density_profile().ok().and_then(|p| p.decay_exponent()) else {
        return out;
    };
    match Regime::classify(ell) {
        Regime::Slow => {
            let g = change(prev.sup_abs_s, last.sup_abs_s);
            out.push(Check::new(
                "sup|s| growth < 10% on the last doubling",
                g.is_some_and(|g| g < 0.1),
                format!("{g:?}"),
            ));
        }
        Regime::Fast => {
            out.push(Check::new(
                "sup|s| strictly increasing",
                report.sup_abs_s_increasing == Some(true),
                String::new(),
            ));
            let first = report.levels[0].sup_abs_s_initial;
            let pass = matches!((last.sup_abs_s, first), (Some(l), Some(f)) if l > 2.0 * f);
            out.push(Check::new(
                "final sup|s| > 2x initial",
                pass,
                format!("final {:?}, initial {first:?}", last.sup_abs_s),
            ));
        }
        Regime::VeryFast => {
            let r = cfg.gas.c_v * (cfg.gas.r_gas / cfg.gas.c_v);
            let inf = last.inf_theta_core;
            let ci = change(prev.inf_theta_core, inf);
            out.push(Check::new(
                "inf theta > 0, stable within 20%",
                inf.is_some_and(|v| v > 0.0) && ci.is_some_and(|c| c.abs() < 0.2),
                format!("{inf:?}, change {ci:?}"),
            ));
            let ck = change(prev.kelvin_slope0, last.kelvin_slope0);
            out.push(Check::new(
                "Kelvin slope > 0, stable within 20%",
                last.kelvin_slope0.is_some_and(|v| v > 0.0) && ck.is_some_and(|c| c.abs() < 0.2),
                format!("{:?}, change {ck:?}", last.kelvin_slope0),
            ));
            out.push(Check::new(
                "probe ratios >= 0.8 R",
                last.probe_ratio_min.is_some_and(|m| m >= 0.8 * r),
                format!("min {:?}, R = {r}", last.probe_ratio_min),
            ));
        }
    }
    out
}

pub fn convergence_checks(report: &ConvergenceReport) -> Vec<Check> {
    vec![
        Check::new(
            "spatial order in [1.8, 2.4]",
            report.space.orders_within(1.8, 2.4),
            format!("theta {:?}, v {:?}", report.space.theta_orders, report.space.v_orders),
        ),
        Check::new(
            "temporal order in [0.8, 1.4]",
            report.time.orders_within(0.8, 1.4),
            format!("theta {:?}, v {:?}", report.time.theta_orders, report.time.v_orders),
        ),
    ]
}
