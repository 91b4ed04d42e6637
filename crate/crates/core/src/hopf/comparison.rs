use crate::error::{Error, Result};
use crate::scalar::Real;

use super::OperatorCoefficients;

/// Values on a uniform `nx × nt` lattice of `[x0, x1] × [t0, t1]`, stored
/// time-major (`values[j * nx + i]` at `(x_i, t_j)`). The outer ring is the
/// boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RectField<T> {
    pub x0: T,
    pub x1: T,
    pub t0: T,
    pub t1: T,
    pub nx: usize,
    pub nt: usize,
    pub values: Vec<T>,
}

impl<T: Real> RectField<T> {
    pub fn new(x0: T, x1: T, t0: T, t1: T, nx: usize, nt: usize, values: Vec<T>) -> Result<Self> {
        if nx < 3 || nt < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3x3 points, got {nx}x{nt}")));
        }
        if !(x1 > x0 && t1 > t0) {
            return Err(Error::InvalidParameter("empty rectangle".into()));
        }
        if values.len() != nx * nt {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                nx * nt,
                values.len()
            )));
        }
        Ok(Self {
            x0,
            x1,
            t0,
            t1,
            nx,
            nt,
            values,
        })
    }

    pub fn from_fn(x0: T, x1: T, t0: T, t1: T, nx: usize, nt: usize, f: impl Fn(T, T) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * nt);
        let (hx, ht) = ((x1 - x0) / T::from_count(nx - 1), (t1 - t0) / T::from_count(nt - 1));
        for j in 0..nt {
            for i in 0..nx {
                values.push(f(x0 + hx * T::from_count(i), t0 + ht * T::from_count(j)));
            }
        }
        Self::new(x0, x1, t0, t1, nx, nt, values)
    }

    pub fn hx(&self) -> T {
        (self.x1 - self.x0) / T::from_count(self.nx - 1)
    }

    pub fn ht(&self) -> T {
        (self.t1 - self.t0) / T::from_count(self.nt - 1)
    }

    pub fn x(&self, i: usize) -> T {
        self.x0 + self.hx() * T::from_count(i)
    }

    pub fn t(&self, j: usize) -> T {
        self.t0 + self.ht() * T::from_count(j)
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[j * self.nx + i]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.nt - 1
    }

    /// Discrete L at an interior point: central second difference in x, and
    /// one-sided first differences taken against the flow (backward for a
    /// positive coefficient, forward for a negative one).
    pub fn apply_operator(&self, coeffs: &OperatorCoefficients<T>, i: usize, j: usize) -> T {
        let (x, t) = (self.x(i), self.t(j));
        let (hx, ht) = (self.hx(), self.ht());
        let u = self.at(i, j);
        let uxx = (self.at(i + 1, j) - u - u + self.at(i - 1, j)) / (hx * hx);
        let a0 = (coeffs.a0)(x, t);
        let ut = if a0 > T::zero() {
            (u - self.at(i, j - 1)) / ht
        } else {
            (self.at(i, j + 1) - u) / ht
        };
        let b = (coeffs.b)(x, t);
        let ux = if b > T::zero() {
            (u - self.at(i - 1, j)) / hx
        } else {
            (self.at(i + 1, j) - u) / hx
        };
        -(coeffs.a)(x, t) * uxx + a0 * ut + b * ux + (coeffs.c)(x, t) * u
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonOutcome<T> {
    /// L u > 0 inside, u ≥ 0 on the boundary and the coefficients admissible
    /// (a ≥ 0, c ≥ 0) at every lattice point.
    pub premise: bool,
    /// Interior minimum strictly positive.
    pub holds: bool,
    pub min_value: T,
    /// (i, j) of the interior minimum.
    pub min_location: (usize, usize),
}

/// Exhaustive scan of a lattice function for the comparison principle.
pub fn comparison_check<T: Real>(coeffs: &OperatorCoefficients<T>, field: &RectField<T>) -> ComparisonOutcome<T> {
    let mut premise = true;
    let mut min_value = T::infinity();
    let mut min_location = (1, 1);
    for j in 0..field.nt {
        for i in 0..field.nx {
            let (x, t) = (field.x(i), field.t(j));
            if !((coeffs.a)(x, t) >= T::zero() && (coeffs.c)(x, t) >= T::zero()) {
                premise = false;
            }
            let u = field.at(i, j);
            if field.is_boundary(i, j) {
                if !(u >= T::zero()) {
                    premise = false;
                }
                continue;
            }
            if !(field.apply_operator(coeffs, i, j) > T::zero()) {
                premise = false;
            }
            if u < min_value {
                min_value = u;
                min_location = (i, j);
            }
        }
    }
    ComparisonOutcome {
        premise,
        holds: min_value > T::zero(),
        min_value,
        min_location,
    }
}
