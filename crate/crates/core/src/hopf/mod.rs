//! Barrier verification for the boundary-point lemma on operators
//! `L u = −a u_xx + a0 u_t + b u_x + c u` in one space dimension plus time.

mod comparison;
mod corpus;
mod presets;
mod slope;

pub use comparison::{comparison_check, ComparisonOutcome, RectField};
pub use corpus::{random_barrier_case, random_comparison_instance, run_corpus, CorpusReport};
pub use presets::{kelvin_preset, scaling_preset, unit_preset, StateSampler};
pub use slope::{hopf_slope_estimate, SlopeEstimate};

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub t: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, t: T) -> Self {
        Self { x, t }
    }

    pub fn dist(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.t - other.t)
    }
}

pub type CoefficientFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Coefficient functions of `x` and `t`, with the constants of the lemma's
/// hypothesis set.
#[derive(Clone)]
pub struct OperatorCoefficients<T> {
    pub a0: CoefficientFn<T>,
    pub a: CoefficientFn<T>,
    pub b: CoefficientFn<T>,
    pub c: CoefficientFn<T>,
    pub lam: T,
    pub cap_lam: T,
    pub c_star: T,
}

impl<T: Real> fmt::Debug for OperatorCoefficients<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorCoefficients")
            .field("lam", &self.lam)
            .field("cap_lam", &self.cap_lam)
            .field("c_star", &self.c_star)
            .finish_non_exhaustive()
    }
}

impl<T: Real> OperatorCoefficients<T> {
    pub fn new(
        a0: CoefficientFn<T>,
        a: CoefficientFn<T>,
        b: CoefficientFn<T>,
        c: CoefficientFn<T>,
        lam: T,
        cap_lam: T,
        c_star: T,
    ) -> Result<Self> {
        if !(lam > T::zero()) || !(cap_lam >= lam) {
            return Err(Error::InvalidParameter(format!("need 0 < lam <= cap_lam, got {lam}, {cap_lam}")));
        }
        if !(c_star > T::zero()) {
            return Err(Error::InvalidParameter(format!("c_star must be positive, got {c_star}")));
        }
        Ok(Self {
            a0,
            a,
            b,
            c,
            lam,
            cap_lam,
            c_star,
        })
    }

    pub fn constant(a0: T, a: T, b: T, c: T, lam: T, cap_lam: T, c_star: T) -> Result<Self> {
        Self::new(
            Arc::new(move |_, _| a0),
            Arc::new(move |_, _| a),
            Arc::new(move |_, _| b),
            Arc::new(move |_, _| c),
            lam,
            cap_lam,
            c_star,
        )
    }
}

/// Geometry of the barrier: ball B_r(P0), boundary point P*, the smaller
/// ball B_{r/2}(P0*) around the midpoint, and the cap radius δ*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec<T> {
    pub p0: Point<T>,
    pub r: T,
    pub p_star: Point<T>,
    pub delta_star: T,
    pub p0_star: Point<T>,
    pub zeta: T,
}

impl<T: Real> BarrierSpec<T> {
    pub fn new(p0: Point<T>, r: T, p_star: Point<T>, delta_star: T, zeta: T) -> Result<Self> {
        if !(r > T::zero()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        if (p_star.dist(&p0) - r).abs() > T::lit(1e-12) * r.max(T::one()) {
            return Err(Error::InvalidParameter("boundary point is not on the sphere of radius r".into()));
        }
        let dist = (p0.x - p_star.x).abs();
        if !(dist > T::zero()) {
            return Err(Error::InvalidParameter("boundary point must differ from the center in x".into()));
        }
        if !(delta_star > T::zero() && delta_star < dist / T::lit(4.0)) {
            return Err(Error::InvalidParameter(format!(
                "delta_star must lie in (0, {}), got {delta_star}",
                dist / T::lit(4.0)
            )));
        }
        if !(zeta > T::zero()) {
            return Err(Error::InvalidParameter(format!("zeta must be positive, got {zeta}")));
        }
        let half = T::lit(0.5);
        Ok(Self {
            p0,
            r,
            p_star,
            delta_star,
            p0_star: Point::new((p0.x + p_star.x) * half, (p0.t + p_star.t) * half),
            zeta,
        })
    }

    /// P* at horizontal offset `dist` to the right of P0, above (`upper`) or
    /// below it in time.
    pub fn from_offset(p0: Point<T>, r: T, dist: T, upper: bool, delta_star: T, zeta: T) -> Result<Self> {
        if !(dist > T::zero() && dist <= r) {
            return Err(Error::InvalidParameter(format!("dist must lie in (0, r], got {dist}")));
        }
        let dt = (r * r - dist * dist).max(T::zero()).sqrt();
        let p_star = Point::new(p0.x + dist, if upper { p0.t + dt } else { p0.t - dt });
        Self::new(p0, r, p_star, delta_star, zeta)
    }

    /// |x0 − x*|
    pub fn dist(&self) -> T {
        (self.p0.x - self.p_star.x).abs()
    }

    pub fn with_zeta(&self, zeta: T) -> Result<Self> {
        Self::new(self.p0, self.r, self.p_star, self.delta_star, zeta)
    }

    /// Membership in B_{r/2}(P0*) ∩ B_{δ*}(P*) (open balls).
    pub fn in_domain(&self, p: &Point<T>) -> bool {
        p.dist(&self.p0_star) < self.r * T::lit(0.5) && p.dist(&self.p_star) < self.delta_star
    }
}

/// ζ₀ = (8nΛ + 8C* + 4rC*)/(λ·dist²).
pub fn zeta0<T: Real>(n: usize, lam: T, cap_lam: T, c_star: T, r: T, dist: T) -> Result<T> {
    if !(lam > T::zero()) {
        return Err(Error::InvalidParameter(format!("lam must be positive, got {lam}")));
    }
    if !(dist > T::zero()) {
        return Err(Error::InvalidParameter(format!("dist must be positive, got {dist}")));
    }
    let eight = T::lit(8.0);
    Ok((eight * T::from_count(n) * cap_lam + eight * c_star + T::lit(4.0) * r * c_star) / (lam * dist * dist))
}

/// φ = exp(−ζ|P − P0*|²) − exp(−ζr²/4).
pub fn barrier_value<T: Real>(p: &Point<T>, spec: &BarrierSpec<T>) -> T {
    let dx = p.x - spec.p0_star.x;
    let dt = p.t - spec.p0_star.t;
    (-spec.zeta * (dx * dx + dt * dt)).exp() - (-spec.zeta * spec.r * spec.r / T::lit(4.0)).exp()
}

/// Exact (φ_t, φ_x, φ_xx).
pub fn barrier_derivatives<T: Real>(p: &Point<T>, spec: &BarrierSpec<T>) -> (T, T, T) {
    let dx = p.x - spec.p0_star.x;
    let dt = p.t - spec.p0_star.t;
    let z = spec.zeta;
    let e = (-z * (dx * dx + dt * dt)).exp();
    let two = T::lit(2.0);
    (-two * z * dt * e, -two * z * dx * e, (T::lit(4.0) * z * z * dx * dx - two * z) * e)
}

/// L φ at `p` from the exact derivatives.
pub fn operator_on_barrier<T: Real>(coeffs: &OperatorCoefficients<T>, spec: &BarrierSpec<T>, p: &Point<T>) -> T {
    let (pt, px, pxx) = barrier_derivatives(p, spec);
    let (x, t) = (p.x, p.t);
    -(coeffs.a)(x, t) * pxx + (coeffs.a0)(x, t) * pt + (coeffs.b)(x, t) * px + (coeffs.c)(x, t) * barrier_value(p, spec)
}

/// e^{ζ|P − P0*|²}·L φ: the Gaussian factor divided out, so the value
/// neither underflows nor overflows for large ζ. Same sign as L φ.
pub fn scaled_operator_on_barrier<T: Real>(coeffs: &OperatorCoefficients<T>, spec: &BarrierSpec<T>, p: &Point<T>) -> T {
    let dx = p.x - spec.p0_star.x;
    let dt = p.t - spec.p0_star.t;
    let z = spec.zeta;
    let two = T::lit(2.0);
    let (x, t) = (p.x, p.t);
    let pxx = T::lit(4.0) * z * z * dx * dx - two * z;
    let tail = (z * (dx * dx + dt * dt - spec.r * spec.r / T::lit(4.0))).exp();
    -(coeffs.a)(x, t) * pxx
        + (coeffs.a0)(x, t) * (-two * z * dt)
        + (coeffs.b)(x, t) * (-two * z * dx)
        + (coeffs.c)(x, t) * (T::one() - tail)
}

/// Radical inverse of `i` in base `b`.
pub(crate) fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// `n` points of the lens B_{r/2}(P0*) ∩ B_{δ*}(P*) from a Halton sequence
/// on the disk B_{δ*}(P*).
pub fn sample_domain<T: Real>(spec: &BarrierSpec<T>, n: usize) -> Vec<Point<T>> {
    let mut out = Vec::with_capacity(n);
    let mut i = 1u64;
    let cap = 1000 * n as u64 + 1000;
    while out.len() < n && i < cap {
        let rad = spec.delta_star * T::lit(radical_inverse(i, 2).sqrt());
        let ang = T::lit(2.0 * std::f64::consts::PI * radical_inverse(i, 3));
        let p = Point::new(spec.p_star.x + rad * ang.cos(), spec.p_star.t + rad * ang.sin());
        if spec.in_domain(&p) {
            out.push(p);
        }
        i += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierVerdict<T> {
    /// L φ < 0 at every sample.
    pub pass: bool,
    /// Sample with the largest L φ.
    pub worst_point: Point<T>,
    /// e^{ζ|P − P0*|²}·L φ at the worst sample; same sign as L φ.
    pub worst_value: T,
    pub n_evaluated: usize,
}

pub const MIN_BARRIER_SAMPLES: usize = 1000;

/// Evaluate L φ on low-discrepancy samples of the lens domain, checking the
/// lemma's hypotheses at the same points. A hypothesis failure is returned as
/// [`Error::HypothesisViolated`], never as a failed verdict.
pub fn verify_barrier<T: Real>(coeffs: &OperatorCoefficients<T>, spec: &BarrierSpec<T>, n_samples: usize) -> Result<BarrierVerdict<T>> {
    if n_samples < MIN_BARRIER_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_BARRIER_SAMPLES,
            have: n_samples,
        });
    }
    let pts = sample_domain(spec, n_samples);
    if pts.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: n_samples,
            have: 0,
        });
    }
    if let Some(v) = pts
        .par_iter()
        .map(|p| check_hypotheses(coeffs, spec, p))
        .find_first(|v| v.is_some())
        .flatten()
    {
        return Err(v);
    }
    let values: Vec<T> = pts.par_iter().map(|p| scaled_operator_on_barrier(coeffs, spec, p)).collect();
    let mut worst = 0;
    for (i, v) in values.iter().enumerate() {
        if !(*v <= values[worst]) {
            worst = i;
        }
    }
    Ok(BarrierVerdict {
        pass: values.iter().all(|&v| v < T::zero()),
        worst_point: pts[worst],
        worst_value: values[worst],
        n_evaluated: pts.len(),
    })
}

fn check_hypotheses<T: Real>(coeffs: &OperatorCoefficients<T>, spec: &BarrierSpec<T>, p: &Point<T>) -> Option<Error> {
    let (x, t) = (p.x, p.t);
    let violation = |which: &str, value: T| {
        Some(Error::HypothesisViolated {
            which: which.to_string(),
            x: x.to_f64_lossy(),
            t: t.to_f64_lossy(),
            value: value.to_f64_lossy(),
        })
    };
    let a = (coeffs.a)(x, t);
    if !(a >= coeffs.lam && a <= coeffs.cap_lam) {
        return violation("ellipticity", a);
    }
    let drift = (t - spec.p0_star.t) * (coeffs.a0)(x, t) + (x - spec.p0_star.x) * (coeffs.b)(x, t);
    if !(drift >= -coeffs.c_star) {
        return violation("drift lower bound", drift);
    }
    let c = (coeffs.c)(x, t);
    let weighted = c * p.dist(&spec.p_star);
    if !(c >= T::zero() && weighted <= coeffs.c_star) {
        return violation("zeroth-order bound", weighted);
    }
    None
}
