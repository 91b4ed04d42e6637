//! Mass-coordinate grids on truncated intervals and the expanding domain sequence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stretching {
    Uniform,
    /// y(ξ) = mid + half·sinh(scale·ξ)/sinh(scale), ξ uniform on [−1, 1].
    Sinh {
        scale: f64,
    },
}

/// Strictly increasing nodes y₀ = α < … < y_N = β. Fields are collocated at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    nodes: Vec<T>,
    stretching: Stretching,
}

pub const MIN_CELLS: usize = 8;

pub fn build_grid<T: Real>(alpha: T, beta: T, n_cells: usize, stretching: Stretching) -> Result<Grid<T>> {
    if !(beta - alpha >= T::one()) {
        return Err(Error::InvalidParameter(format!("domain [{alpha}, {beta}] is shorter than 1")));
    }
    if n_cells < MIN_CELLS {
        return Err(Error::InvalidParameter(format!("need at least {MIN_CELLS} cells, got {n_cells}")));
    }
    let half = (beta - alpha) * T::lit(0.5);
    let mid = (alpha + beta) * T::lit(0.5);
    let n = n_cells as i64;
    let map: Box<dyn Fn(T) -> T> = match stretching {
        Stretching::Uniform => Box::new(|xi| xi),
        Stretching::Sinh { scale } => {
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(Error::InvalidParameter(format!("sinh scale must be positive, got {scale}")));
            }
            let c = T::lit(scale);
            let norm = c.sinh();
            // sign·sinh(|x|) keeps the map exactly odd.
            Box::new(move |xi: T| {
                let s = (c * xi.abs()).sinh() / norm;
                if xi < T::zero() {
                    -s
                } else {
                    s
                }
            })
        }
    };
    let mut nodes = Vec::with_capacity(n_cells + 1);
    for i in 0..=n {
        let node = if i == 0 {
            alpha
        } else if i == n {
            beta
        } else {
            // ξ = (2i − N)/N is exactly antisymmetric under i → N − i.
            let xi = T::lit((2 * i - n) as f64) / T::lit(n as f64);
            let offset = half * map(xi);
            if alpha == -beta {
                offset
            } else {
                mid + offset
            }
        };
        nodes.push(node);
    }
    Grid::from_nodes(nodes, stretching)
}

impl<T: Real> Grid<T> {
    /// Wrap explicit nodes. Only monotonicity is checked; the size and length
    /// requirements of [`build_grid`] do not apply.
    pub fn from_nodes(nodes: Vec<T>, stretching: Stretching) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidParameter("a grid needs at least 3 nodes".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(format!("nodes not strictly increasing at index {i}")));
        }
        Ok(Self { nodes, stretching })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn stretching(&self) -> Stretching {
        self.stretching
    }

    pub fn alpha(&self) -> T {
        self.nodes[0]
    }

    pub fn beta(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    /// Cell widths h_{i+1/2} = y_{i+1} − y_i.
    pub fn widths(&self) -> Vec<T> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn centers(&self) -> Vec<T> {
        self.nodes.windows(2).map(|w| (w[0] + w[1]) * T::lit(0.5)).collect()
    }

    /// Dual (trapezoid) weights: half the two adjacent widths, one half-width at the ends.
    pub fn dual_weights(&self) -> Vec<T> {
        let h = self.widths();
        let n = self.nodes.len();
        let half = T::lit(0.5);
        (0..n)
            .map(|i| {
                let left = if i > 0 { h[i - 1] } else { T::zero() };
                let right = if i + 1 < n { h[i] } else { T::zero() };
                (left + right) * half
            })
            .collect()
    }

    pub fn min_width(&self) -> T {
        self.widths().into_iter().fold(T::infinity(), T::min)
    }

    pub fn max_width(&self) -> T {
        self.widths().into_iter().fold(T::zero(), T::max)
    }

    /// Trapezoid quadrature of nodal values.
    pub fn integrate(&self, values: &[T]) -> T {
        crate::scalar::trapezoid(&self.nodes, values)
    }

    /// Nodal first derivative: central three-point quotient (v_{i+1} − v_{i−1})/(y_{i+1} − y_{i−1})
    /// in the interior, one-sided second-order three-point stencils at both ends.
    pub fn derivative(&self, v: &[T]) -> Vec<T> {
        let y = &self.nodes;
        let n = y.len();
        let mut d = vec![T::zero(); n];
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (y[i + 1] - y[i - 1]);
        }
        d[0] = one_sided(y[0], y[1], y[2], v[0], v[1], v[2]);
        d[n - 1] = one_sided(y[n - 1], y[n - 2], y[n - 3], v[n - 1], v[n - 2], v[n - 3]);
        d
    }

    /// Index of the node nearest to `y`.
    pub fn nearest(&self, y: T) -> usize {
        let idx = self.nodes.partition_point(|&x| x < y);
        if idx == 0 {
            0
        } else if idx >= self.nodes.len() {
            self.nodes.len() - 1
        } else if (y - self.nodes[idx - 1]) <= (self.nodes[idx] - y) {
            idx - 1
        } else {
            idx
        }
    }

    /// Piecewise-linear interpolation of nodal values; `None` outside `[α, β]`.
    pub fn interpolate(&self, values: &[T], y: T) -> Option<T> {
        if y < self.alpha() || y > self.beta() {
            return None;
        }
        let idx = self.nodes.partition_point(|&x| x < y);
        if idx == 0 {
            return Some(values[0]);
        }
        let (y0, y1) = (self.nodes[idx - 1], self.nodes[idx]);
        let w = (y - y0) / (y1 - y0);
        Some(values[idx - 1] * (T::one() - w) + values[idx] * w)
    }
}

/// Second-order one-sided derivative at `x0` from the values at `x0`, `x1`, `x2`
/// (Lagrange interpolant differentiated at `x0`).
fn one_sided<T: Real>(x0: T, x1: T, x2: T, f0: T, f1: T, f2: T) -> T {
    let (h1, h2) = (x1 - x0, x2 - x0);
    let c0 = -(h1 + h2) / (h1 * h2);
    let c1 = h2 / (h1 * (h2 - h1));
    let c2 = -h1 / (h2 * (h2 - h1));
    c0 * f0 + c1 * f1 + c2 * f2
}

/// Symmetric expanding domains (αₙ, βₙ) = (−L₀gⁿ, L₀gⁿ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSequence {
    pub base_half_width: f64,
    pub growth: f64,
    pub n_levels: usize,
}

impl DomainSequence {
    pub fn new(base_half_width: f64, growth: f64, n_levels: usize) -> Result<Self> {
        let seq = Self {
            base_half_width,
            growth,
            n_levels,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_half_width > 0.5) {
            return Err(Error::InvalidParameter(format!(
                "base half width must exceed 0.5 so that beta - alpha >= 1, got {}",
                self.base_half_width
            )));
        }
        if !(self.growth > 1.0) {
            return Err(Error::InvalidParameter(format!("growth factor must exceed 1, got {}", self.growth)));
        }
        if self.n_levels == 0 {
            return Err(Error::InvalidParameter("need at least one level".into()));
        }
        Ok(())
    }

    pub fn level(&self, n: usize) -> Result<(f64, f64)> {
        domain_sequence(self, n)
    }
}

pub fn domain_sequence(seq: &DomainSequence, n: usize) -> Result<(f64, f64)> {
    if n >= seq.n_levels {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: seq.n_levels,
        });
    }
    let half = seq.base_half_width * seq.growth.powi(n as i32);
    Ok((-half, half))
}
