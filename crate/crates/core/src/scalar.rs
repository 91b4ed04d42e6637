//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the solver, diagnostics and Hopf verifier are generic over.
///
/// Implemented for `f32` and `f64`. Everything downstream of the numerics
/// (reports, configuration, CLI) works in `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a count or index.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Composite trapezoid rule over (possibly nonuniform) nodes.
pub fn trapezoid<T: Real>(nodes: &[T], values: &[T]) -> T {
    debug_assert_eq!(nodes.len(), values.len());
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(y, f)| (y[1] - y[0]) * (f[0] + f[1]) * T::lit(0.5))
        .sum()
}
