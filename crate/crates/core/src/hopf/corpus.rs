//! Randomized admissible instances for the barrier and comparison checks.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Real;

use super::{comparison_check, unit_preset, verify_barrier, zeta0, BarrierSpec, OperatorCoefficients, Point, RectField};

/// Smooth bump in [0, 1] with random frequencies and phase.
#[derive(Clone, Copy)]
struct Wave(f64, f64, f64);

impl Wave {
    fn new<R: Rng>(rng: &mut R) -> Self {
        Wave(
            rng.gen_range(0.5..6.0),
            rng.gen_range(0.5..6.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
    }

    fn at(self, x: f64, t: f64) -> f64 {
        0.5 + 0.5 * (self.0 * x + self.1 * t + self.2).sin()
    }
}

fn lift<T: Real>(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> super::CoefficientFn<T> {
    Arc::new(move |x: T, t: T| T::lit(f(x.to_f64_lossy(), t.to_f64_lossy())))
}

/// Random (λ, Λ, C*, r, dist, δ*) with variable coefficients obeying the
/// hypotheses on the lens, and ζ = `zeta_factor`·ζ₀.
///
/// On the lens |t − t0*|, |x − x0*| ≤ r/2 and |P − P*| < δ*, so |a0|, |b| ≤ C*/r
/// and 0 ≤ c ≤ C*/δ* are enough.
pub fn random_barrier_case<T: Real, R: Rng>(rng: &mut R, zeta_factor: f64) -> Result<(OperatorCoefficients<T>, BarrierSpec<T>)> {
    let lam = rng.gen_range(0.1..2.0);
    let cap_lam = lam * rng.gen_range(1.0..5.0);
    let c_star = rng.gen_range(0.01..10.0);
    let r = rng.gen_range(0.1..2.0);
    let dist = r * rng.gen_range(0.05..1.0);
    let delta_star = dist / 4.0 * rng.gen_range(0.1..0.95);
    let p0 = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
    let upper = rng.gen_bool(0.5);

    let (wa, wa0, wb, wc) = (Wave::new(rng), Wave::new(rng), Wave::new(rng), Wave::new(rng));
    let (sa0, sb, sc) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0));
    let coeffs = OperatorCoefficients::new(
        lift(move |x, t| sa0 * c_star / r * wa0.at(x, t)),
        lift(move |x, t| lam + (cap_lam - lam) * wa.at(x, t)),
        lift(move |x, t| sb * c_star / r * wb.at(x, t)),
        lift(move |x, t| sc * c_star / delta_star * wc.at(x, t)),
        T::lit(lam),
        T::lit(cap_lam),
        T::lit(c_star),
    )?;
    let z = zeta_factor * zeta0(1, lam, cap_lam, c_star, r, dist)?;
    let spec = BarrierSpec::from_offset(
        Point::new(T::lit(p0.x), T::lit(p0.t)),
        T::lit(r),
        T::lit(dist),
        upper,
        T::lit(delta_star),
        T::lit(z),
    )?;
    Ok((coeffs, spec))
}

/// A random admissible operator with c ≥ 0.1 and a smooth field on an
/// `nx × nt` lattice of [0,1]², shifted by the smallest constant that makes
/// L u > 0 inside and u ≥ 0 on the boundary.
pub fn random_comparison_instance<T: Real, R: Rng>(rng: &mut R, nx: usize, nt: usize) -> Result<(OperatorCoefficients<T>, RectField<T>)> {
    let lam = rng.gen_range(0.1..2.0);
    let cap_lam = lam * rng.gen_range(1.0..5.0);
    let (wa, wa0, wb, wc) = (Wave::new(rng), Wave::new(rng), Wave::new(rng), Wave::new(rng));
    let (sa0, sb, sc) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(0.0..5.0));
    let coeffs = OperatorCoefficients::new(
        lift(move |x, t| sa0 * (2.0 * wa0.at(x, t) - 1.0)),
        lift(move |x, t| lam + (cap_lam - lam) * wa.at(x, t)),
        lift(move |x, t| sb * (2.0 * wb.at(x, t) - 1.0)),
        lift(move |x, t| 0.1 + sc * wc.at(x, t)),
        T::lit(lam),
        T::lit(cap_lam),
        T::one(),
    )?;

    let modes: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.5..8.0),
                rng.gen_range(0.5..8.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let phi = move |x: T, t: T| {
        let (x, t) = (x.to_f64_lossy(), t.to_f64_lossy());
        T::lit(
            modes
                .iter()
                .map(|&(amp, kx, kt, ph)| amp * (kx * x + kt * t + ph).sin())
                .sum::<f64>(),
        )
    };
    let (zero, one) = (T::zero(), T::one());
    let mut field = RectField::from_fn(zero, one, zero, one, nx, nt, phi)?;

    let mut shift = T::neg_infinity();
    for j in 0..nt {
        for i in 0..nx {
            let need = if field.is_boundary(i, j) {
                -field.at(i, j)
            } else {
                let c = (coeffs.c)(field.x(i), field.t(j));
                -field.apply_operator(&coeffs, i, j) / c + T::lit(1e-6)
            };
            shift = shift.max(need);
        }
    }
    for v in field.values.iter_mut() {
        *v = *v + shift;
    }
    Ok((coeffs, field))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub seed: u64,
    pub count: usize,
    /// Barrier draws with ζ = 2ζ₀ that passed.
    pub barrier_passed: usize,
    /// Indices of draws that failed or hit a hypothesis violation.
    pub barrier_failures: Vec<usize>,
    /// Largest L φ seen over all passing draws (negative).
    pub barrier_worst_value: f64,
    /// The unit operator with ζ = 0.01ζ₀ was caught failing.
    pub small_zeta_detected: bool,
    pub comparison_premise_met: usize,
    pub comparison_held: usize,
    pub comparison_failures: Vec<usize>,
    pub comparison_min_value: f64,
}

impl CorpusReport {
    pub fn all_passed(&self) -> bool {
        self.barrier_passed == self.count
            && self.small_zeta_detected
            && self.comparison_premise_met == self.count
            && self.comparison_held == self.count
    }
}

/// `count` barrier draws at ζ = 2ζ₀ plus `count` comparison instances on
/// 20×20 lattices, both from one ChaCha stream seeded by `seed`.
pub fn run_corpus(seed: u64, count: usize, n_samples: usize) -> Result<CorpusReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CorpusReport {
        seed,
        count,
        barrier_passed: 0,
        barrier_failures: Vec::new(),
        barrier_worst_value: f64::NEG_INFINITY,
        small_zeta_detected: false,
        comparison_premise_met: 0,
        comparison_held: 0,
        comparison_failures: Vec::new(),
        comparison_min_value: f64::INFINITY,
    };
    for k in 0..count {
        let (coeffs, spec) = random_barrier_case::<f64, _>(&mut rng, 2.0)?;
        match verify_barrier(&coeffs, &spec, n_samples) {
            Ok(v) if v.pass => {
                report.barrier_passed += 1;
                report.barrier_worst_value = report.barrier_worst_value.max(v.worst_value);
            }
            _ => report.barrier_failures.push(k),
        }
    }
    let (coeffs, spec) = unit_preset::<f64>(0.01)?;
    report.small_zeta_detected = matches!(verify_barrier(&coeffs, &spec, n_samples), Ok(v) if !v.pass);
    for k in 0..count {
        let (coeffs, field) = random_comparison_instance::<f64, _>(&mut rng, 20, 20)?;
        let out = comparison_check(&coeffs, &field);
        if out.premise {
            report.comparison_premise_met += 1;
        }
        if out.holds {
            report.comparison_held += 1;
        } else {
            report.comparison_failures.push(k);
        }
        report.comparison_min_value = report.comparison_min_value.min(out.min_value);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_corpus_passes() {
        let r = run_corpus(7, 5, 1000).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert!(r.barrier_worst_value < 0.0);
    }

    #[test]
    fn corpus_is_deterministic() {
        assert_eq!(run_corpus(3, 3, 1000).unwrap(), run_corpus(3, 3, 1000).unwrap());
    }
}
