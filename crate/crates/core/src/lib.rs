//! One-dimensional Lagrangian Navier–Stokes solver for far-field vacuum data,
//! with entropy and temperature diagnostics and a boundary-point lemma checker.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod hopf;
pub mod profiles;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = grid::Grid<f64>;
pub type SimState64 = solver::SimState<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type GasConstants64 = profiles::GasConstants<f64>;
pub type DensityProfile64 = profiles::DensityProfile<f64>;
pub type InitialFields64 = profiles::InitialFields<f64>;
pub type OperatorCoefficients64 = hopf::OperatorCoefficients<f64>;
pub type BarrierSpec64 = hopf::BarrierSpec<f64>;
