use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::profiles::{ExtendedFields, GasConstants};
use crate::scalar::Real;

/// Extremes accumulated over a run; they stand in for the sup/inf over
/// (0, T) that appear in the damping constants of the far-field transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunningExtrema<T> {
    /// max over the run of ‖v_y‖_∞
    pub vy_max: T,
    pub j_min: T,
    pub j_max: T,
    /// max over the run of |J_y/ϱ₀| / √(|y|+1)
    pub c1: T,
}

/// Discrete fields at one time level. The Eulerian density is never stored;
/// it is ϱ₀/J.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState<T> {
    pub grid: Arc<Grid<T>>,
    pub t: T,
    pub j: Vec<T>,
    pub v: Vec<T>,
    pub theta: Vec<T>,
    pub rho0: Vec<T>,
    /// ∫₀ᵗ ϱ₀ϑ dτ per node, trapezoid in time.
    pub int_rho0_theta: Vec<T>,
    /// Negative temperatures above −theta_tol are clamped to zero.
    pub theta_tol: T,
    pub running: RunningExtrema<T>,
}

/// Relative size of the temperature clamp window, in units of max ϑ₀.
pub const THETA_TOL_FACTOR: f64 = 1e-10;

impl<T: Real> SimState<T> {
    /// State at t = 0 with J ≡ 1. Temperature is forced to zero at both end nodes.
    pub fn new(grid: Arc<Grid<T>>, rho0: Vec<T>, v: Vec<T>, mut theta: Vec<T>) -> Result<Self> {
        let n = grid.len();
        if rho0.len() != n || v.len() != n || theta.len() != n {
            return Err(Error::InvalidParameter("field length does not match grid".into()));
        }
        if let Some(i) = rho0.iter().position(|&r| !(r > T::zero()) || !r.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho0 must be positive at node {i}")));
        }
        if let Some(i) = theta.iter().position(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta must be nonnegative at node {i}")));
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("v not finite at node {i}")));
        }
        theta[0] = T::zero();
        theta[n - 1] = T::zero();
        let theta_max = theta.iter().copied().fold(T::zero(), T::max);
        let mut state = Self {
            grid,
            t: T::zero(),
            j: vec![T::one(); n],
            v,
            theta,
            rho0,
            int_rho0_theta: vec![T::zero(); n],
            theta_tol: T::lit(THETA_TOL_FACTOR) * theta_max,
            running: RunningExtrema {
                vy_max: T::zero(),
                j_min: T::one(),
                j_max: T::one(),
                c1: T::zero(),
            },
        };
        state.running = state.current_extrema();
        Ok(state)
    }

    /// Sample truncated/extended initial data on the grid.
    pub fn from_extended(grid: Arc<Grid<T>>, data: &ExtendedFields<T>) -> Result<Self> {
        let ys = grid.nodes();
        let rho0 = ys.iter().map(|&y| data.rho0(y)).collect();
        let v = ys.iter().map(|&y| data.v(y)).collect();
        let theta = ys.iter().map(|&y| data.theta(y)).collect();
        Self::new(grid, rho0, v, theta)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// v_y at the nodes (central inside, one-sided at the ends).
    pub fn v_y(&self) -> Vec<T> {
        self.grid.derivative(&self.v)
    }

    /// Extremes of the current level alone.
    pub fn current_extrema(&self) -> RunningExtrema<T> {
        let vy = self.v_y();
        let jy = self.grid.derivative(&self.j);
        let vy_max = vy.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let j_min = self.j.iter().copied().fold(T::infinity(), T::min);
        let j_max = self.j.iter().copied().fold(T::neg_infinity(), T::max);
        let c1 = self
            .grid
            .nodes()
            .iter()
            .zip(jy.iter().zip(&self.rho0))
            .map(|(&y, (&jy, &r))| (jy / r).abs() / (y.abs() + T::one()).sqrt())
            .fold(T::zero(), T::max);
        RunningExtrema { vy_max, j_min, j_max, c1 }
    }

    pub(crate) fn absorb_extrema(&mut self) {
        let cur = self.current_extrema();
        let r = &mut self.running;
        r.vy_max = r.vy_max.max(cur.vy_max);
        r.j_min = r.j_min.min(cur.j_min);
        r.j_max = r.j_max.max(cur.j_max);
        r.c1 = r.c1.max(cur.c1);
    }

    /// Trapezoid quadrature of ϱ₀(v²/2 + c_vϑ).
    pub fn energy(&self, gas: &GasConstants<T>) -> T {
        let half = T::lit(0.5);
        let integrand: Vec<T> = self
            .rho0
            .iter()
            .zip(self.v.iter().zip(&self.theta))
            .map(|(&r, (&v, &th))| r * (half * v * v + gas.c_v() * th))
            .collect();
        self.grid.integrate(&integrand)
    }

    /// True when every field matches `other` bit for bit (time excluded).
    pub fn fields_identical(&self, other: &Self) -> bool {
        let same = |a: &[T], b: &[T]| {
            a.len() == b.len()
                && a.iter()
                    .zip(b)
                    .all(|(x, y)| x.to_f64_lossy().to_bits() == y.to_f64_lossy().to_bits())
        };
        same(&self.j, &other.j)
            && same(&self.v, &other.v)
            && same(&self.theta, &other.theta)
            && same(&self.rho0, &other.rho0)
            && same(&self.int_rho0_theta, &other.int_rho0_theta)
    }
}

/// π = Rϱ₀ϑ/J at every node.
pub fn compute_pressure<T: Real>(state: &SimState<T>, gas: &GasConstants<T>) -> Vec<T> {
    state
        .rho0
        .iter()
        .zip(state.theta.iter().zip(&state.j))
        .map(|(&r, (&th, &j))| gas.r_gas() * r * th / j)
        .collect()
}

/// Effective viscous flux G = μ·v_y/J − π with the nodal derivative stencil.
pub fn compute_g<T: Real>(state: &SimState<T>, gas: &GasConstants<T>) -> Vec<T> {
    let vy = state.v_y();
    let pi = compute_pressure(state, gas);
    vy.iter()
        .zip(state.j.iter().zip(&pi))
        .map(|(&vy, (&j, &p))| gas.mu() * vy / j - p)
        .collect()
}
