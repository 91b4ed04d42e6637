//! Coefficient sets of the far-field transforms, frozen at one solver snapshot.

use std::sync::Arc;

use crate::diagnostics::{beta0, kelvin_damping, scaling_damping};
use crate::error::{Error, Result};
use crate::profiles::{DensityProfile, GasConstants};
use crate::scalar::Real;
use crate::solver::SimState;

use super::{sample_domain, zeta0, BarrierSpec, OperatorCoefficients, Point};

/// Pointwise access to a snapshot off the grid nodes: linear interpolation
/// inside, J frozen at the end value and v_y = J_y = 0 outside. ϱ₀ comes from
/// the analytic profile.
#[derive(Debug, Clone)]
pub struct StateSampler<T> {
    state: SimState<T>,
    jy: Vec<T>,
    vy: Vec<T>,
    profile: DensityProfile<T>,
}

impl<T: Real> StateSampler<T> {
    pub fn new(state: SimState<T>, profile: DensityProfile<T>) -> Self {
        let jy = state.grid.derivative(&state.j);
        let vy = state.grid.derivative(&state.v);
        Self { state, jy, vy, profile }
    }

    pub fn state(&self) -> &SimState<T> {
        &self.state
    }

    pub fn rho0(&self, y: T) -> T {
        self.profile.value(y)
    }

    pub fn j(&self, y: T) -> T {
        let g = &self.state.grid;
        g.interpolate(&self.state.j, y).unwrap_or_else(|| {
            let n = self.state.len();
            if y < g.alpha() {
                self.state.j[0]
            } else {
                self.state.j[n - 1]
            }
        })
    }

    pub fn j_y(&self, y: T) -> T {
        self.state.grid.interpolate(&self.jy, y).unwrap_or(T::zero())
    }

    pub fn v_y(&self, y: T) -> T {
        self.state.grid.interpolate(&self.vy, y).unwrap_or(T::zero())
    }
}

/// Unit diffusion, no drift or reaction, on a fixed geometry; ζ = factor·ζ₀.
pub fn unit_preset<T: Real>(zeta_factor: T) -> Result<(OperatorCoefficients<T>, BarrierSpec<T>)> {
    let one = T::one();
    let coeffs = OperatorCoefficients::constant(T::zero(), one, T::zero(), T::zero(), one, one, one)?;
    let (r, dist) = (one, T::lit(0.8));
    let z0 = zeta0(1, one, one, one, r, dist)?;
    let spec = BarrierSpec::from_offset(Point::new(T::zero(), T::zero()), r, dist, true, T::lit(0.1), zeta_factor * z0)?;
    Ok((coeffs, spec))
}

/// Geometry of both transforms: P0 = (y0, t0), r = y0, P* = (0, t0), δ* = y0/8.
fn transform_geometry<T: Real>(t0: T, y0: T) -> Result<BarrierSpec<T>> {
    if !(y0 > T::zero() && y0 <= T::lit(0.5) && y0 <= t0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < y0 <= min(1/2, t0), got y0 = {y0}, t0 = {t0}"
        )));
    }
    BarrierSpec::new(Point::new(y0, t0), y0, Point::new(T::zero(), t0), y0 / T::lit(8.0), T::one())
}

/// Smallest admissible C* on the first `n` lens samples, with 1% margin.
fn measure_c_star<T: Real>(a0: &dyn Fn(T) -> T, b: &dyn Fn(T) -> T, c: &dyn Fn(T) -> T, spec: &BarrierSpec<T>, n: usize) -> T {
    let mut worst = T::lit(1e-12);
    for p in sample_domain(spec, n) {
        let drift = (p.t - spec.p0_star.t) * a0(p.x) + (p.x - spec.p0_star.x) * b(p.x);
        worst = worst.max(-drift).max(c(p.x) * p.dist(&spec.p_star));
    }
    worst * T::lit(1.01)
}

/// Coefficients of the equation for f(y) = ϑ(y^{−β}) after the damping
/// e^{−M_T t}, β = β₀(ℓ), at the snapshot time; ζ = factor·ζ₀. The C* bound is
/// measured on `4·n_samples` lens points.
pub fn scaling_preset<T: Real>(
    sampler: &StateSampler<T>,
    gas: &GasConstants<T>,
    ell_rho: T,
    y0: T,
    zeta_factor: T,
    n_samples: usize,
) -> Result<(OperatorCoefficients<T>, BarrierSpec<T>)> {
    let beta = beta0(gas.gamma_minus_one(), ell_rho)?;
    let st = sampler.state();
    let m_t = scaling_damping(gas, st.running.vy_max, st.running.j_min);
    let geom = transform_geometry(st.t, y0)?;
    let (kappa, c_v, r_gas) = (gas.kappa(), gas.c_v(), gas.r_gas());
    let two = T::lit(2.0);

    let s = Arc::new(sampler.clone());
    let a0 = {
        let s = s.clone();
        move |y: T| {
            let yy = y.powf(-beta);
            c_v * s.rho0(yy) * y.powf(-(two + two * beta)) * s.j(yy)
        }
    };
    let b = {
        let s = s.clone();
        move |y: T| {
            let yy = y.powf(-beta);
            -(kappa * (beta + T::one()) / (beta * beta * y) + kappa / beta * y.powf(-(T::one() + beta)) * s.j_y(yy) / s.j(yy))
        }
    };
    let c = {
        let s = s.clone();
        move |y: T| {
            let yy = y.powf(-beta);
            s.rho0(yy) * y.powf(-(two + two * beta)) * (c_v * m_t * s.j(yy) + r_gas * s.v_y(yy))
        }
    };
    let c_star = measure_c_star(&a0, &b, &c, &geom, 4 * n_samples);
    let lam = kappa / (beta * beta);
    let coeffs = OperatorCoefficients::new(
        Arc::new(move |y, _| a0(y)),
        Arc::new(move |_, _| lam),
        Arc::new(move |y, _| b(y)),
        Arc::new(move |y, _| c(y)),
        lam,
        lam,
        c_star,
    )?;
    let z = zeta_factor * zeta0(1, lam, lam, c_star, geom.r, geom.dist())?;
    Ok((coeffs, geom.with_zeta(z)?))
}

/// Coefficients of the equation for the Kelvin transform h(y) = yϑ(1/y)
/// after the damping e^{−N_T t}, at the snapshot time.
pub fn kelvin_preset<T: Real>(
    sampler: &StateSampler<T>,
    gas: &GasConstants<T>,
    y0: T,
    zeta_factor: T,
    n_samples: usize,
) -> Result<(OperatorCoefficients<T>, BarrierSpec<T>)> {
    let st = sampler.state();
    let run = st.running;
    let n_t = kelvin_damping(gas, run.vy_max, run.j_min, run.c1);
    let geom = transform_geometry(st.t, y0)?;
    let (kappa, c_v, r_gas) = (gas.kappa(), gas.c_v(), gas.r_gas());

    let s = Arc::new(sampler.clone());
    let a0 = {
        let s = s.clone();
        move |y: T| c_v * s.rho0(y.recip()) / y.powi(4)
    };
    let b = {
        let s = s.clone();
        move |y: T| {
            let yy = y.recip();
            let j = s.j(yy);
            -kappa * s.j_y(yy) / (j * j * y * y)
        }
    };
    let c = {
        let s = s.clone();
        let a0 = a0.clone();
        move |y: T| {
            let yy = y.recip();
            let j = s.j(yy);
            let reaction = r_gas * s.v_y(yy) / j * s.rho0(yy) / y.powi(4) + kappa * s.j_y(yy) / (j * j * y.powi(3));
            reaction + n_t * a0(y)
        }
    };
    let c_star = measure_c_star(&a0, &b, &c, &geom, 4 * n_samples);
    let (lam, cap_lam) = (kappa / run.j_max, kappa / run.j_min);
    let a = {
        let s = s.clone();
        move |y: T| kappa / s.j(y.recip())
    };
    let coeffs = OperatorCoefficients::new(
        Arc::new(move |y, _| a0(y)),
        Arc::new(move |y, _| a(y)),
        Arc::new(move |y, _| b(y)),
        Arc::new(move |y, _| c(y)),
        lam,
        cap_lam,
        c_star,
    )?;
    let z = zeta_factor * zeta0(1, lam, cap_lam, c_star, geom.r, geom.dist())?;
    Ok((coeffs, geom.with_zeta(z)?))
}
