//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A tridiagonal system `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n−1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
    pub rhs: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![T::zero(); n],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n],
            rhs: vec![T::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn solve(&self) -> Result<Vec<T>> {
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, &self.rhs)
    }

    /// Row-major dense copy of the matrix.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.len();
        let mut a = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i > 0 {
                a[i][i - 1] = self.lower[i];
            }
            if i + 1 < n {
                a[i][i + 1] = self.upper[i];
            }
        }
        a
    }
}

/// Forward elimination and back substitution. Signals a zero (or non-finite) pivot.
pub fn solve_tridiagonal<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::InvalidParameter(format!(
            "tridiagonal arrays not conformable: lower {}, diag {n}, upper {}, rhs {}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    let mut pivot = diag[0];
    if pivot == T::zero() || !pivot.is_finite() {
        return Err(Error::ZeroPivot { row: 0 });
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == T::zero() || !pivot.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] = x[i] - c[i] * next;
    }
    Ok(x)
}
