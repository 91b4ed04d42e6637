//! One semi-implicit splitting step.
//!
//! Finite-volume form on the dual cells of the node grid. With `w` the dual
//! weights, `h` the cell widths and `J_f = (J_i + J_{i+1})/2`:
//!
//! * momentum: `ϱ₀w (v' − v)/dt = Σ± μ(v'_{i±1} − v'_i)/(h J*_f) − (π_{i+1} − π_{i−1})/2`,
//!   with zero viscous flux through the outer faces (v_y = 0) and π taken at
//!   the old temperature and the predicted Jacobian;
//! * temperature: `c_vϱ₀w (ϑ' − ϑ)/dt = Σ± κ(ϑ'_{i±1} − ϑ'_i)/(h J*_f) − π_i(v'_{i+1} − v'_{i−1})/2 + heating_i`,
//!   Dirichlet ϑ = 0 at the end nodes, the viscous heating of each cell
//!   split evenly between its two nodes.
//!
//! The pressure work in the temperature equation uses exactly the pressure
//! of the momentum update, so summation by parts makes the discrete
//! kinetic + internal energy change equal to minus the implicit-Euler
//! kinetic dissipation minus the heat lost through the Dirichlet ends.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::profiles::GasConstants;
use crate::scalar::Real;

use super::state::{compute_pressure, SimState};
use super::tridiag::Tridiagonal;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub dt_init: T,
    pub dt_max: T,
    pub cfl_factor: T,
    /// Momentum solves per step; each re-predicts J from the latest velocity.
    pub picard_iters: usize,
    pub snapshot_times: Vec<T>,
    pub gas: GasConstants<T>,
    /// Velocity floor in the CFL limit.
    pub v_floor: T,
    /// Test switches; both true in production.
    pub solve_momentum: bool,
    pub solve_temperature: bool,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(dt_max: T, gas: GasConstants<T>) -> Self {
        Self {
            dt_init: dt_max,
            dt_max,
            cfl_factor: T::lit(0.5),
            picard_iters: 2,
            snapshot_times: Vec::new(),
            gas,
            v_floor: T::lit(1e-3),
            solve_momentum: true,
            solve_temperature: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init > T::zero()) || !(self.dt_max > T::zero()) {
            return Err(Error::InvalidParameter("time steps must be positive".into()));
        }
        if self.dt_init > self.dt_max {
            return Err(Error::InvalidParameter(format!(
                "dt_init ({}) exceeds dt_max ({})",
                self.dt_init, self.dt_max
            )));
        }
        if !(self.cfl_factor > T::zero() && self.cfl_factor <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "cfl_factor must lie in (0, 1], got {}",
                self.cfl_factor
            )));
        }
        if self.picard_iters == 0 {
            return Err(Error::InvalidParameter("picard_iters must be at least 1".into()));
        }
        if !(self.v_floor > T::zero()) {
            return Err(Error::InvalidParameter("v_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Bookkeeping for one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats<T> {
    pub clamped: usize,
    /// Σ w ϱ₀|clamped value|
    pub clamped_mass: T,
}

/// Face conductances `coef / (h J_f)` with `J_f` the arithmetic mean of the
/// nodal Jacobians (harmonic mean of `coef/J`).
fn face_conductance<T: Real>(grid: &Grid<T>, j: &[T], coef: T) -> Vec<T> {
    let y = grid.nodes();
    (0..y.len() - 1)
        .map(|i| {
            let jf = (j[i] + j[i + 1]) * T::lit(0.5);
            coef / ((y[i + 1] - y[i]) * jf)
        })
        .collect()
}

/// Implicit momentum system for the new velocity.
pub fn momentum_system<T: Real>(
    grid: &Grid<T>,
    rho0: &[T],
    v_old: &[T],
    j_star: &[T],
    pi: &[T],
    gas: &GasConstants<T>,
    dt: T,
) -> Tridiagonal<T> {
    let n = grid.len();
    let w = grid.dual_weights();
    let k = face_conductance(grid, j_star, gas.mu());
    let half = T::lit(0.5);
    let mut sys = Tridiagonal::zeros(n);
    for i in 0..n {
        let kl = if i > 0 { k[i - 1] } else { T::zero() };
        let kr = if i + 1 < n { k[i] } else { T::zero() };
        sys.lower[i] = -dt * kl;
        sys.upper[i] = -dt * kr;
        sys.diag[i] = rho0[i] * w[i] + dt * (kl + kr);
        let pl = if i > 0 { pi[i - 1] } else { pi[i] };
        let pr = if i + 1 < n { pi[i + 1] } else { pi[i] };
        sys.rhs[i] = rho0[i] * w[i] * v_old[i] - dt * (pr - pl) * half;
    }
    sys
}

/// Implicit temperature system for the new temperature, given the new
/// velocity, the Jacobian used by the momentum update and the pressure
/// `pi` that update used.
#[allow(clippy::too_many_arguments)]
pub fn temperature_system<T: Real>(
    grid: &Grid<T>,
    rho0: &[T],
    theta_old: &[T],
    j_star: &[T],
    v_new: &[T],
    pi: &[T],
    gas: &GasConstants<T>,
    dt: T,
) -> Tridiagonal<T> {
    let n = grid.len();
    let w = grid.dual_weights();
    let kt = face_conductance(grid, j_star, gas.kappa());
    let kv = face_conductance(grid, j_star, gas.mu());
    let half = T::lit(0.5);
    // μ(Δv)²/(h J_f) per cell.
    let cell_heat: Vec<T> = (0..n - 1)
        .map(|f| {
            let dv = v_new[f + 1] - v_new[f];
            kv[f] * dv * dv
        })
        .collect();
    let mut sys = Tridiagonal::zeros(n);
    sys.diag[0] = T::one();
    sys.diag[n - 1] = T::one();
    for i in 1..n - 1 {
        let (kl, kr) = (kt[i - 1], kt[i]);
        sys.lower[i] = -dt * kl;
        sys.upper[i] = -dt * kr;
        sys.diag[i] = gas.c_v() * rho0[i] * w[i] + dt * (kl + kr);
        let work = pi[i] * (v_new[i + 1] - v_new[i - 1]) * half;
        let heat = (cell_heat[i - 1] + cell_heat[i]) * half;
        sys.rhs[i] = gas.c_v() * rho0[i] * w[i] * theta_old[i] - dt * work + dt * heat;
    }
    sys
}

/// Advance `state` by `dt`: J-predict, implicit momentum (repeated
/// `picard_iters` times with J re-predicted from the newest velocity),
/// implicit temperature, trapezoidal J-correct, and accumulation of ∫ϱ₀ϑ.
pub fn step<T: Real>(state: &SimState<T>, cfg: &SolverConfig<T>, dt: T) -> Result<(SimState<T>, StepStats<T>)> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let grid = &*state.grid;
    let gas = &cfg.gas;
    let n = grid.len();
    let half = T::lit(0.5);
    let vy_old = grid.derivative(&state.v);

    let mut v_new = state.v.clone();
    let mut vy_new = vy_old.clone();
    let mut j_star = Vec::with_capacity(n);
    let mut pi = Vec::new();
    for k in 0..cfg.picard_iters {
        j_star = (0..n)
            .map(|i| {
                if k == 0 {
                    state.j[i] + dt * vy_old[i]
                } else {
                    state.j[i] + dt * half * (vy_old[i] + vy_new[i])
                }
            })
            .collect();
        if let Some(i) = j_star.iter().position(|&x| !(x > T::zero())) {
            return Err(Error::StepRejected(format!("predicted J nonpositive at node {i}")));
        }
        pi = state
            .rho0
            .iter()
            .zip(state.theta.iter().zip(&j_star))
            .map(|(&r, (&th, &j))| gas.r_gas() * r * th / j)
            .collect();
        if !cfg.solve_momentum {
            break;
        }
        v_new = momentum_system(grid, &state.rho0, &state.v, &j_star, &pi, gas, dt)
            .solve()
            .map_err(|e| Error::StepRejected(format!("momentum solve: {e}")))?;
        vy_new = grid.derivative(&v_new);
    }

    let mut stats = StepStats {
        clamped: 0,
        clamped_mass: T::zero(),
    };
    let theta_new = if cfg.solve_temperature {
        let mut th = temperature_system(grid, &state.rho0, &state.theta, &j_star, &v_new, &pi, gas, dt)
            .solve()
            .map_err(|e| Error::StepRejected(format!("temperature solve: {e}")))?;
        let w = grid.dual_weights();
        for i in 0..n {
            let x = th[i];
            if !x.is_finite() {
                return Err(Error::StepRejected(format!("temperature not finite at node {i}")));
            }
            if x < T::zero() {
                if x < -state.theta_tol {
                    return Err(Error::StepRejected(format!("temperature {x} below tolerance at node {i}")));
                }
                stats.clamped += 1;
                stats.clamped_mass = stats.clamped_mass + w[i] * state.rho0[i] * x.abs();
                th[i] = T::zero();
            }
        }
        th
    } else {
        state.theta.clone()
    };

    let j_new: Vec<T> = (0..n).map(|i| state.j[i] + dt * half * (vy_old[i] + vy_new[i])).collect();
    if let Some(i) = j_new.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
        return Err(Error::StepRejected(format!("corrected J nonpositive at node {i}")));
    }
    if let Some(i) = v_new.iter().position(|x| !x.is_finite()) {
        return Err(Error::StepRejected(format!("velocity not finite at node {i}")));
    }
    let int_new = (0..n)
        .map(|i| state.int_rho0_theta[i] + dt * half * state.rho0[i] * (state.theta[i] + theta_new[i]))
        .collect();

    let mut next = SimState {
        grid: state.grid.clone(),
        t: state.t + dt,
        j: j_new,
        v: v_new,
        theta: theta_new,
        rho0: state.rho0.clone(),
        int_rho0_theta: int_new,
        theta_tol: state.theta_tol,
        running: state.running,
    };
    next.absorb_extrema();
    Ok((next, stats))
}

/// Largest step for which the explicit pressure work cannot drive the
/// temperature negative: dt·R·max(v_y⁺)/(c_v·min J) ≤ 1/2.
pub fn drain_limit<T: Real>(state: &SimState<T>, gas: &GasConstants<T>) -> T {
    let vy = state.v_y();
    let mut limit = T::infinity();
    for (&d, &j) in vy.iter().zip(&state.j) {
        if d > T::zero() {
            limit = limit.min(T::lit(0.5) * gas.c_v() * j / (gas.r_gas() * d));
        }
    }
    limit
}

/// π of the state itself (old temperature, current J).
pub fn pressure<T: Real>(state: &SimState<T>, gas: &GasConstants<T>) -> Vec<T> {
    compute_pressure(state, gas)
}
