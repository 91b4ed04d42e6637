//! Derived quantities of a [`SimState`]: entropy, energy, explicit Jacobian
//! bounds, far-field transforms, probes and monitored norms.

mod report;

pub use report::{RunReport, SnapshotRecord, REPORT_SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::profiles::GasConstants;
use crate::scalar::Real;
use crate::solver::{compute_g, SimState};

/// Relative entropy mask cut, in units of max ϑ₀.
pub const THETA_FLOOR_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedQuantities<T> {
    /// ∫ϱ₀
    pub m0: T,
    /// ∫ϱ₀(v₀²/2 + c_vϑ₀)
    pub e0: T,
}

impl<T: Real> ConservedQuantities<T> {
    pub fn from_initial(state: &SimState<T>, gas: &GasConstants<T>) -> Self {
        Self {
            m0: state.grid.integrate(&state.rho0),
            e0: energy_functional(state, gas),
        }
    }
}

pub fn energy_functional<T: Real>(state: &SimState<T>, gas: &GasConstants<T>) -> T {
    state.energy(gas)
}

/// Entropy where ϑ exceeds the floor; `s` is NaN off the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyField<T> {
    pub s: Vec<T>,
    pub mask: Vec<bool>,
    pub theta_floor: T,
}

impl<T: Real> EntropyField<T> {
    /// sup |s| over the mask, `None` if the mask is empty.
    pub fn sup_abs(&self) -> Option<T> {
        self.masked()
            .map(|(_, s)| s.abs())
            .fold(None, |m, x| Some(m.map_or(x, |m: T| m.max(x))))
    }

    pub fn masked(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.s
            .iter()
            .zip(&self.mask)
            .enumerate()
            .filter(|(_, (_, &m))| m)
            .map(|(i, (&s, _))| (i, s))
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

pub fn default_theta_floor<T: Real>(theta0_max: T) -> T {
    T::lit(THETA_FLOOR_FACTOR) * theta0_max
}

/// s = c_v(ln(R/A) + ln ϑ − (γ−1)ln ϱ₀ + (γ−1)ln J) on nodes with ϑ > floor.
pub fn entropy_field<T: Real>(state: &SimState<T>, gas: &GasConstants<T>, theta_floor: T) -> EntropyField<T> {
    let base = (gas.r_gas() / gas.a_entropy()).ln();
    let gm1 = gas.gamma_minus_one();
    let mut s = Vec::with_capacity(state.len());
    let mut mask = Vec::with_capacity(state.len());
    for i in 0..state.len() {
        let th = state.theta[i];
        if th > theta_floor {
            s.push(gas.c_v() * (base + th.ln() - gm1 * state.rho0[i].ln() + gm1 * state.j[i].ln()));
            mask.push(true);
        } else {
            s.push(T::nan());
            mask.push(false);
        }
    }
    EntropyField { s, mask, theta_floor }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JBounds<T> {
    pub lower: T,
    pub upper: Vec<T>,
}

impl<T: Real> JBounds<T> {
    /// Worst bound violation relative to the bound magnitude; ≤ 0 when all nodes comply.
    pub fn worst_violation(&self, j: &[T]) -> T {
        let mut worst = T::neg_infinity();
        for (&x, &up) in j.iter().zip(&self.upper) {
            worst = worst.max((self.lower - x) / self.lower).max((x - up) / up);
        }
        worst
    }
}

/// Explicit bounds exp(−(2/μ)√(2m₀ℰ₀)) ≤ J ≤ exp((4/μ)√(2m₀ℰ₀))(1 + (R/μ)∫₀ᵗϱ₀ϑ).
pub fn j_bounds<T: Real>(state: &SimState<T>, cons: &ConservedQuantities<T>, gas: &GasConstants<T>) -> JBounds<T> {
    let root = (T::lit(2.0) * cons.m0 * cons.e0).sqrt();
    let lower = (-T::lit(2.0) / gas.mu() * root).exp();
    let growth = (T::lit(4.0) / gas.mu() * root).exp();
    let upper = state
        .int_rho0_theta
        .iter()
        .map(|&q| growth * (T::one() + gas.r_gas() / gas.mu() * q))
        .collect();
    JBounds { lower, upper }
}

/// N_T = (2/c_v)(R·vy_max/j_min + √2·κ·C₁/j_min²).
pub fn kelvin_damping<T: Real>(gas: &GasConstants<T>, vy_max: T, j_min: T, c1: T) -> T {
    T::lit(2.0) / gas.c_v() * (gas.r_gas() * vy_max / j_min + T::SQRT_2() * gas.kappa() * c1 / (j_min * j_min))
}

/// M_T = R·vy_max/(c_v·j_min).
pub fn scaling_damping<T: Real>(gas: &GasConstants<T>, vy_max: T, j_min: T) -> T {
    gas.r_gas() * vy_max / (gas.c_v() * j_min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KelvinDiagnostics<T> {
    /// (y, h(y)) with y = 1/Y for far-field nodes Y.
    pub h_samples: Vec<(T, T)>,
    /// Least-squares slope of h through the origin.
    pub slope0: T,
    pub n_t: T,
}

/// Kelvin transform h(y) = y·ϑ(1/y) sampled at every node with |Y| ≥ 1/y_fit.
pub fn kelvin_diag<T: Real>(state: &SimState<T>, gas: &GasConstants<T>, y_fit: T) -> Result<KelvinDiagnostics<T>> {
    kelvin_diag_window(state, gas, y_fit, T::infinity())
}

/// As [`kelvin_diag`], restricted to far-field nodes with |Y| ≤ `y_outer`
/// (keeps the fit away from the truncated boundary layer).
pub fn kelvin_diag_window<T: Real>(state: &SimState<T>, gas: &GasConstants<T>, y_fit: T, y_outer: T) -> Result<KelvinDiagnostics<T>> {
    if !(y_fit > T::zero()) {
        return Err(Error::InvalidParameter(format!("y_fit must be positive, got {y_fit}")));
    }
    let inner = y_fit.recip();
    let h_samples: Vec<(T, T)> = state
        .grid
        .nodes()
        .iter()
        .zip(&state.theta)
        .filter(|(&yy, _)| yy.abs() >= inner && yy.abs() <= y_outer)
        .map(|(&yy, &th)| {
            let y = yy.recip();
            (y, y * th)
        })
        .collect();
    if h_samples.len() < 4 {
        return Err(Error::InsufficientSamples {
            needed: 4,
            have: h_samples.len(),
        });
    }
    let (sxy, sxx) = h_samples
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), &(y, h)| (a + y * h, b + y * y));
    let r = &state.running;
    Ok(KelvinDiagnostics {
        h_samples,
        slope0: sxy / sxx,
        n_t: kelvin_damping(gas, r.vy_max, r.j_min, r.c1),
    })
}

/// β₀ = max{2/((γ−1)ℓ), 2/(ℓ−2)}; undefined for ℓ ≤ 2.
pub fn beta0<T: Real>(gamma_minus_one: T, ell_rho: T) -> Result<T> {
    let two = T::lit(2.0);
    if !(ell_rho > two) {
        return Err(Error::InvalidParameter(format!(
            "scaling exponent needs ell_rho > 2, got {ell_rho}"
        )));
    }
    Ok((two / (gamma_minus_one * ell_rho)).max(two / (ell_rho - two)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingDiagnostics<T> {
    pub beta: T,
    pub beta0: T,
    pub m_t: T,
    /// (y, f(y)) with f(y) = ϑ(y^{−β}), one pair per node Y > 0.
    pub f_samples: Vec<(T, T)>,
}

pub fn scaling_diag<T: Real>(state: &SimState<T>, gas: &GasConstants<T>, ell_rho: T) -> Result<ScalingDiagnostics<T>> {
    let b0 = beta0(gas.gamma_minus_one(), ell_rho)?;
    let f_samples = state
        .grid
        .nodes()
        .iter()
        .zip(&state.theta)
        .filter(|(&yy, _)| yy > T::zero())
        .map(|(&yy, &th)| (yy.powf(-b0.recip()), th))
        .collect();
    let r = &state.running;
    Ok(ScalingDiagnostics {
        beta: b0,
        beta0: b0,
        m_t: scaling_damping(gas, r.vy_max, r.j_min),
        f_samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRatios<T> {
    /// (node index, s/(−ln ϱ₀))
    pub ratios: Vec<(usize, T)>,
    pub warnings: Vec<String>,
}

impl<T: Real> ProbeRatios<T> {
    pub fn min(&self) -> Option<T> {
        self.ratios
            .iter()
            .map(|r| r.1)
            .fold(None, |m, x| Some(m.map_or(x, |m: T| m.min(x))))
    }

    pub fn max(&self) -> Option<T> {
        self.ratios
            .iter()
            .map(|r| r.1)
            .fold(None, |m, x| Some(m.map_or(x, |m: T| m.max(x))))
    }
}

/// Pointwise s/(−ln ϱ₀) at the probe nodes. Probes off the entropy mask or
/// with ϱ₀ ≥ 1 are skipped and noted.
pub fn entropy_ratio_probe<T: Real>(state: &SimState<T>, ent: &EntropyField<T>, probes: &[usize]) -> ProbeRatios<T> {
    let mut out = ProbeRatios {
        ratios: Vec::with_capacity(probes.len()),
        warnings: Vec::new(),
    };
    for &i in probes {
        if i >= state.len() {
            out.warnings.push(format!("probe {i} outside the grid"));
        } else if !ent.mask[i] {
            out.warnings
                .push(format!("probe {i} at y = {} below the temperature floor", state.grid.nodes()[i]));
        } else if state.rho0[i] >= T::one() {
            out.warnings.push(format!("probe {i} has rho0 >= 1"));
        } else {
            out.ratios.push((i, ent.s[i] / -state.rho0[i].ln()));
        }
    }
    for w in &out.warnings {
        log::debug!("{w}");
    }
    out
}

/// Outermost `fraction` of the nodes with |y| ≤ `half_width` on each side.
/// With `half_width` at least the domain size this is the outermost
/// fraction of the whole grid.
pub fn far_field_probes<T: Real>(grid: &Grid<T>, half_width: T, fraction: f64) -> Vec<usize> {
    let ys = grid.nodes();
    let left: Vec<usize> = (0..ys.len()).filter(|&i| ys[i] < T::zero() && ys[i] >= -half_width).collect();
    let right: Vec<usize> = (0..ys.len()).filter(|&i| ys[i] > T::zero() && ys[i] <= half_width).collect();
    let take = |side: &[usize]| ((side.len() as f64 * fraction).ceil() as usize).min(side.len());
    let mut probes: Vec<usize> = left[..take(&left)].to_vec();
    probes.extend_from_slice(&right[right.len() - take(&right)..]);
    probes
}

/// Outermost 5% of the nodes on each side.
pub fn default_probes<T: Real>(grid: &Grid<T>) -> Vec<usize> {
    far_field_probes(grid, T::infinity(), 0.05)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport<T> {
    pub envelope: Vec<T>,
    /// max ϑ/envelope; 0 when ϑ ≡ 0.
    pub max_ratio: T,
    pub delta0: T,
}

/// Compare ϑ with ‖√ϱ₀ϑ‖₂/√δ₀ + √(|y|+1)‖ϑ_y‖₂, δ₀ = min ϱ₀ on [−1, 1].
pub fn farfield_growth_check<T: Real>(state: &SimState<T>) -> GrowthReport<T> {
    let grid = &*state.grid;
    let ys = grid.nodes();
    let delta0 = ys
        .iter()
        .zip(&state.rho0)
        .filter(|(&y, _)| y.abs() <= T::one())
        .map(|(_, &r)| r)
        .fold(T::infinity(), T::min);
    let delta0 = if delta0.is_finite() {
        delta0
    } else {
        state.rho0[grid.nearest(T::zero())]
    };
    let weighted: Vec<T> = state.rho0.iter().zip(&state.theta).map(|(&r, &t)| r * t * t).collect();
    let l2_theta = grid.integrate(&weighted).sqrt();
    let l2_dtheta = dirichlet_seminorm(grid, &state.theta);
    let base = l2_theta / delta0.sqrt();
    let envelope: Vec<T> = ys.iter().map(|&y| base + (y.abs() + T::one()).sqrt() * l2_dtheta).collect();
    let mut max_ratio = T::zero();
    for (&th, &e) in state.theta.iter().zip(&envelope) {
        if th > T::zero() {
            max_ratio = max_ratio.max(th / e);
        }
    }
    GrowthReport {
        envelope,
        max_ratio,
        delta0,
    }
}

/// ‖f_y‖₂ of the piecewise linear interpolant.
fn dirichlet_seminorm<T: Real>(grid: &Grid<T>, f: &[T]) -> T {
    let ys = grid.nodes();
    let mut acc = T::zero();
    for i in 0..ys.len() - 1 {
        let d = f[i + 1] - f[i];
        acc = acc + d * d / (ys[i + 1] - ys[i]);
    }
    acc.sqrt()
}

/// Squared weighted L² norms tracked for finiteness along a run. Derivatives
/// use the nodal stencil, integrals the trapezoid rule.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MonitoredNorms {
    pub jy_over_sqrt_rho0: f64,
    pub sqrt_rho0_v: f64,
    pub sqrt_rho0_v2: f64,
    pub vy: f64,
    pub vyy_over_sqrt_rho0: f64,
    pub rho0_theta_l1: f64,
    pub sqrt_rho0_theta: f64,
    pub sqrt_rho0_theta_y: f64,
    pub gy_over_sqrt_rho0: f64,
}

impl MonitoredNorms {
    pub fn all_finite(&self) -> bool {
        [
            self.jy_over_sqrt_rho0,
            self.sqrt_rho0_v,
            self.sqrt_rho0_v2,
            self.vy,
            self.vyy_over_sqrt_rho0,
            self.rho0_theta_l1,
            self.sqrt_rho0_theta,
            self.sqrt_rho0_theta_y,
            self.gy_over_sqrt_rho0,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

pub fn monitored_norms<T: Real>(state: &SimState<T>, gas: &GasConstants<T>) -> MonitoredNorms {
    let grid = &*state.grid;
    let r = &state.rho0;
    let jy = grid.derivative(&state.j);
    let vy = grid.derivative(&state.v);
    let vyy = grid.derivative(&vy);
    let thy = grid.derivative(&state.theta);
    let gy = grid.derivative(&compute_g(state, gas));
    let sq = |f: &dyn Fn(usize) -> T| -> f64 {
        let vals: Vec<T> = (0..state.len()).map(f).collect();
        grid.integrate(&vals).to_f64_lossy()
    };
    MonitoredNorms {
        jy_over_sqrt_rho0: sq(&|i| jy[i] * jy[i] / r[i]),
        sqrt_rho0_v: sq(&|i| r[i] * state.v[i] * state.v[i]),
        sqrt_rho0_v2: sq(&|i| r[i] * state.v[i].powi(4)),
        vy: sq(&|i| vy[i] * vy[i]),
        vyy_over_sqrt_rho0: sq(&|i| vyy[i] * vyy[i] / r[i]),
        rho0_theta_l1: sq(&|i| r[i] * state.theta[i].abs()),
        sqrt_rho0_theta: sq(&|i| r[i] * state.theta[i] * state.theta[i]),
        sqrt_rho0_theta_y: sq(&|i| r[i] * thy[i] * thy[i]),
        gy_over_sqrt_rho0: sq(&|i| gy[i] * gy[i] / r[i]),
    }
}

/// inf ϑ over nodes with |y| ≤ half_width.
pub fn inf_theta_within<T: Real>(state: &SimState<T>, half_width: T) -> T {
    state
        .grid
        .nodes()
        .iter()
        .zip(&state.theta)
        .filter(|(&y, _)| y.abs() <= half_width)
        .map(|(_, &t)| t)
        .fold(T::infinity(), T::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Stretching};
    use std::sync::Arc;

    fn state_with(n: usize, a: f64, b: f64, rho: impl Fn(f64) -> f64, th: impl Fn(f64) -> f64) -> SimState<f64> {
        let g = Arc::new(build_grid(a, b, n, Stretching::Uniform).unwrap());
        let ys = g.nodes().to_vec();
        let mut s = SimState::new(g, ys.iter().map(|&y| rho(y)).collect(), vec![0.0; ys.len()], vec![0.0; ys.len()]).unwrap();
        // ends included: these tests bypass the Dirichlet rows on purpose
        s.theta = ys.iter().map(|&y| th(y)).collect();
        s
    }

    #[test]
    fn entropy_vanishes_on_isentrope() {
        let gas = GasConstants::default();
        let s = state_with(16, 1.0, 3.0, |y| 1.0 / (1.0 + y * y), |y| 1.0 / (1.0 + y * y));
        let e = entropy_field(&s, &gas, 1e-12);
        assert_eq!(e.count(), 17);
        for (_, v) in e.masked() {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn entropy_example_value() {
        let gas = GasConstants::default();
        let s = state_with(8, 0.0, 1.0, |_| 0.25, |_| 0.5);
        let e = entropy_field(&s, &gas, 1e-12);
        assert!((e.s[3] - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn mask_excludes_floor() {
        let gas = GasConstants::default();
        let s = state_with(8, 0.0, 1.0, |_| 0.5, |y| if y < 0.5 { 0.0 } else { 1.0 });
        let e = entropy_field(&s, &gas, 1e-12);
        assert!(!e.mask[0] && e.s[0].is_nan());
        assert!(e.mask[8]);
    }

    #[test]
    fn j_bound_examples() {
        let gas = GasConstants::default();
        let s = state_with(8, 0.0, 1.0, |_| 1.0, |_| 0.0);
        let b = j_bounds(&s, &ConservedQuantities { m0: 2.0, e0: 1.0 }, &gas);
        assert!((b.lower - (-4.0f64).exp()).abs() < 1e-15);
        assert!(b.upper.iter().all(|&u| (u - 8.0f64.exp()).abs() < 1e-9));
        let b = j_bounds(&s, &ConservedQuantities { m0: 0.0, e0: 1.0 }, &gas);
        assert_eq!(b.lower, 1.0);
    }

    #[test]
    fn kelvin_of_constant() {
        let gas = GasConstants::default();
        let s = state_with(100, -50.0, 50.0, |_| 1.0, |_| 2.5);
        let k = kelvin_diag(&s, &gas, 0.1).unwrap();
        assert!((k.slope0 - 2.5).abs() < 1e-13);
        for &(y, h) in &k.h_samples {
            let yy = 1.0 / y;
            let i = s.grid.nearest(yy);
            assert!((h - y * s.theta[i]).abs() <= 1e-14);
        }
        assert!(matches!(kelvin_diag(&s, &gas, 1.0 / 49.5), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn kelvin_damping_vanishes_without_sources() {
        let gas = GasConstants::default();
        assert_eq!(kelvin_damping(&gas, 0.0, 0.7, 0.0), 0.0);
        let with_c1 = kelvin_damping(&gas, 0.0, 0.5, 1.0);
        assert!((with_c1 - 2.0 * 2f64.sqrt() / 0.25).abs() < 1e-14);
    }

    #[test]
    fn beta0_examples() {
        assert_eq!(beta0(1.0, 3.0).unwrap(), 2.0);
        assert_eq!(beta0(1.0, 4.0).unwrap(), 1.0);
        assert!(beta0(1.0, 2.0).is_err());
    }

    #[test]
    fn scaling_at_unit_point() {
        let gas = GasConstants::default();
        let s = state_with(8, -1.0, 1.0, |_| 1.0, |y| 3.0 + y);
        let d = scaling_diag(&s, &gas, 3.0).unwrap();
        let (_, f1) = d.f_samples.iter().find(|(y, _)| *y == 1.0).unwrap();
        assert_eq!(*f1, 4.0);
    }

    #[test]
    fn probe_ratio_examples() {
        let gas = GasConstants::default();
        let rho = |y: f64| (-10.0 * y).exp();
        let s = state_with(10, 0.5, 1.5, rho, |_| 1.0);
        let e = entropy_field(&s, &gas, 1e-12);
        let p = entropy_ratio_probe(&s, &e, &[5, 10]);
        for &(_, r) in &p.ratios {
            assert!((r - 1.0).abs() < 1e-12);
        }
        let s = state_with(10, 0.5, 1.5, rho, |_| std::f64::consts::E);
        let e = entropy_field(&s, &gas, 1e-12);
        let p = entropy_ratio_probe(&s, &e, &[5]);
        assert!((p.ratios[0].1 - 1.1).abs() < 1e-12);
    }

    #[test]
    fn probe_skips_masked() {
        let gas = GasConstants::default();
        let s = state_with(10, 0.5, 1.5, |_| 0.5, |y| if y > 1.0 { 0.0 } else { 1.0 });
        let e = entropy_field(&s, &gas, 1e-12);
        let p = entropy_ratio_probe(&s, &e, &[0, 10]);
        assert_eq!(p.ratios.len(), 1);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn probes_sit_at_both_ends() {
        let g = build_grid(-10.0, 10.0, 100, Stretching::Uniform).unwrap();
        let p = default_probes(&g);
        assert_eq!(p, vec![0, 1, 2, 98, 99, 100]);
        let p = far_field_probes(&g, 5.0, 0.05);
        assert_eq!(p, vec![25, 26, 74, 75]);
    }

    #[test]
    fn growth_of_zero_and_constant() {
        let s = state_with(40, -4.0, 4.0, |y| 1.0 / (1.0 + y * y), |_| 0.0);
        assert_eq!(farfield_growth_check(&s).max_ratio, 0.0);
        let s = state_with(40, -4.0, 4.0, |y| 1.0 / (1.0 + y * y), |_| 2.0);
        let g = farfield_growth_check(&s);
        let expected = 2.0 * s.grid.integrate(&s.rho0).sqrt() / g.delta0.sqrt();
        assert!((g.envelope[0] - expected).abs() < 1e-12);
        assert!(g.max_ratio <= 1.0);
    }
}
