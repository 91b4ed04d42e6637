//! Initial data: far-field-vacuum density families, velocity and temperature
//! fields, the hypothesis checks on them, and the truncation/extension used
//! to pose the problem on a bounded interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{trapezoid, Real};

/// Physical closure of the ideal polytropic gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasConstants<T> {
    mu: T,
    kappa: T,
    r_gas: T,
    c_v: T,
    a_entropy: T,
    gamma_minus_one: T,
    gamma: T,
}

impl<T: Real> GasConstants<T> {
    pub fn new(mu: T, kappa: T, r_gas: T, c_v: T, a_entropy: T) -> Result<Self> {
        for (name, value) in [
            ("mu", mu),
            ("kappa", kappa),
            ("r_gas", r_gas),
            ("c_v", c_v),
            ("a_entropy", a_entropy),
        ] {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "gas constant {name} must be positive and finite, got {value}"
                )));
            }
        }
        let gamma_minus_one = r_gas / c_v;
        Ok(Self {
            mu,
            kappa,
            r_gas,
            c_v,
            a_entropy,
            gamma_minus_one,
            gamma: T::one() + gamma_minus_one,
        })
    }

    pub fn mu(&self) -> T {
        self.mu
    }
    pub fn kappa(&self) -> T {
        self.kappa
    }
    pub fn r_gas(&self) -> T {
        self.r_gas
    }
    pub fn c_v(&self) -> T {
        self.c_v
    }
    pub fn a_entropy(&self) -> T {
        self.a_entropy
    }
    pub fn gamma(&self) -> T {
        self.gamma
    }
    /// `R / c_v`, stored rather than recomputed from `gamma`.
    pub fn gamma_minus_one(&self) -> T {
        self.gamma_minus_one
    }
}

impl<T: Real> Default for GasConstants<T> {
    /// μ = κ = R = c_v = A = 1, hence γ = 2.
    fn default() -> Self {
        Self::new(T::one(), T::one(), T::one(), T::one(), T::one()).expect("unit constants are valid")
    }
}

/// Density family selector, used by configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityFamily {
    Algebraic,
    Exponential,
}

/// Positive, even, radially nonincreasing initial density with closed-form derivatives.
///
/// * `Algebraic`: ϱ₀(y) = amp·(1+y²)^(−ℓ/2), decaying like (1+|y|)^(−ℓ).
/// * `Exponential`: ϱ₀(y) = exp(−(1+y²)^δ) with δ ∈ (0, 1/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityProfile<T> {
    Algebraic { amp: T, ell_rho: T },
    Exponential { delta: T },
}

/// Decay regime relative to the thresholds ℓ = 2 and ℓ = 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Slow,
    Fast,
    VeryFast,
}

impl Regime {
    pub fn classify<T: Real>(ell_rho: T) -> Self {
        if ell_rho <= T::lit(2.0) {
            Regime::Slow
        } else if ell_rho < T::lit(4.0) {
            Regime::Fast
        } else {
            Regime::VeryFast
        }
    }
}

/// Build a density profile from a family name and parameter list.
///
/// `Algebraic` takes `[amp, ell_rho]`, `Exponential` takes `[delta]`.
pub fn make_density_profile<T: Real>(family: DensityFamily, params: &[T]) -> Result<DensityProfile<T>> {
    match family {
        DensityFamily::Algebraic => {
            let [amp, ell_rho] = params else {
                return Err(Error::InvalidParameter(format!(
                    "algebraic profile takes [amp, ell_rho], got {} values",
                    params.len()
                )));
            };
            if !(*amp > T::zero()) || !amp.is_finite() {
                return Err(Error::InvalidParameter(format!("amp must be positive, got {amp}")));
            }
            if !(*ell_rho > T::zero()) || !ell_rho.is_finite() {
                return Err(Error::InvalidParameter(format!("ell_rho must be positive, got {ell_rho}")));
            }
            Ok(DensityProfile::Algebraic {
                amp: *amp,
                ell_rho: *ell_rho,
            })
        }
        DensityFamily::Exponential => {
            let [delta] = params else {
                return Err(Error::InvalidParameter(format!(
                    "exponential profile takes [delta], got {} values",
                    params.len()
                )));
            };
            if !(*delta > T::zero() && *delta <= T::lit(0.5)) {
                return Err(Error::InvalidParameter(format!("delta must lie in (0, 1/2], got {delta}")));
            }
            Ok(DensityProfile::Exponential { delta: *delta })
        }
    }
}

impl<T: Real> DensityProfile<T> {
    pub fn value(&self, y: T) -> T {
        let u = T::one() + y * y;
        match *self {
            DensityProfile::Algebraic { amp, ell_rho } => amp * u.powf(-ell_rho * T::lit(0.5)),
            DensityProfile::Exponential { delta } => (-u.powf(delta)).exp(),
        }
    }

    pub fn d1(&self, y: T) -> T {
        let u = T::one() + y * y;
        match *self {
            DensityProfile::Algebraic { ell_rho, .. } => -ell_rho * y * self.value(y) / u,
            DensityProfile::Exponential { delta } => -T::lit(2.0) * delta * y * u.powf(delta - T::one()) * self.value(y),
        }
    }

    pub fn d2(&self, y: T) -> T {
        let u = T::one() + y * y;
        let y2 = y * y;
        match *self {
            DensityProfile::Algebraic { ell_rho, .. } => -ell_rho * self.value(y) * (T::one() - (ell_rho + T::one()) * y2) / (u * u),
            DensityProfile::Exponential { delta } => {
                let two = T::lit(2.0);
                let four = T::lit(4.0);
                let p1 = u.powf(delta - T::one());
                let p2 = u.powf(delta - two);
                self.value(y) * (four * delta * delta * y2 * p1 * p1 - two * delta * p1 - four * delta * (delta - T::one()) * y2 * p2)
            }
        }
    }

    /// Algebraic decay exponent ℓ_ρ; `None` for the exponential family (faster than any power).
    pub fn decay_exponent(&self) -> Option<T> {
        match *self {
            DensityProfile::Algebraic { ell_rho, .. } => Some(ell_rho),
            DensityProfile::Exponential { .. } => None,
        }
    }

    pub fn regime(&self) -> Regime {
        match self.decay_exponent() {
            Some(ell) => Regime::classify(ell),
            None => Regime::VeryFast,
        }
    }
}

/// Initial velocity families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityField<T> {
    Zero,
    /// v₀(y) = amp·y·e^(−y²)
    GaussianOdd {
        amp: T,
    },
}

impl<T: Real> VelocityField<T> {
    pub fn value(&self, y: T) -> T {
        match *self {
            VelocityField::Zero => T::zero(),
            VelocityField::GaussianOdd { amp } => amp * y * (-y * y).exp(),
        }
    }
    pub fn d1(&self, y: T) -> T {
        match *self {
            VelocityField::Zero => T::zero(),
            VelocityField::GaussianOdd { amp } => amp * (T::one() - T::lit(2.0) * y * y) * (-y * y).exp(),
        }
    }
    pub fn d2(&self, y: T) -> T {
        match *self {
            VelocityField::Zero => T::zero(),
            VelocityField::GaussianOdd { amp } => amp * (T::lit(4.0) * y * y * y - T::lit(6.0) * y) * (-y * y).exp(),
        }
    }
}

/// Initial temperature families (nonnegative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemperatureField<T> {
    Zero,
    /// ϑ₀(y) = amp·e^(−y²)
    Gaussian {
        amp: T,
    },
}

impl<T: Real> TemperatureField<T> {
    pub fn value(&self, y: T) -> T {
        match *self {
            TemperatureField::Zero => T::zero(),
            TemperatureField::Gaussian { amp } => amp * (-y * y).exp(),
        }
    }
    pub fn d1(&self, y: T) -> T {
        match *self {
            TemperatureField::Zero => T::zero(),
            TemperatureField::Gaussian { amp } => -T::lit(2.0) * y * amp * (-y * y).exp(),
        }
    }
    pub fn d2(&self, y: T) -> T {
        match *self {
            TemperatureField::Zero => T::zero(),
            TemperatureField::Gaussian { amp } => (T::lit(4.0) * y * y - T::lit(2.0)) * amp * (-y * y).exp(),
        }
    }
}

/// Initial velocity and temperature over a density profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialFields<T> {
    pub profile: DensityProfile<T>,
    pub v0: VelocityField<T>,
    pub theta0: TemperatureField<T>,
    pub gas: GasConstants<T>,
}

impl<T: Real> InitialFields<T> {
    pub fn new(profile: DensityProfile<T>, v0: VelocityField<T>, theta0: TemperatureField<T>, gas: GasConstants<T>) -> Result<Self> {
        if let TemperatureField::Gaussian { amp } = theta0 {
            if amp < T::zero() {
                return Err(Error::InvalidParameter(format!("temperature amplitude must be >= 0, got {amp}")));
            }
        }
        Ok(Self { profile, v0, theta0, gas })
    }

    /// G₀ = μv₀′ − Rϱ₀ϑ₀.
    pub fn g0(&self, y: T) -> T {
        self.gas.mu() * self.v0.d1(y) - self.gas.r_gas() * self.profile.value(y) * self.theta0.value(y)
    }

    pub fn g0_prime(&self, y: T) -> T {
        self.gas.mu() * self.v0.d2(y)
            - self.gas.r_gas() * (self.profile.d1(y) * self.theta0.value(y) + self.profile.value(y) * self.theta0.d1(y))
    }
}

/// L² norms of the integrability quantities required of the initial data.
/// Recorded only; no bound is asserted on them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityNorms {
    pub sqrt_rho_v: f64,
    pub sqrt_rho_v_sq: f64,
    pub v_prime: f64,
    pub v_second: f64,
    pub sqrt_rho_theta: f64,
    pub sqrt_rho_theta_prime: f64,
    pub sqrt_rho_theta_second: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport<T> {
    /// sup (|ϱ₀′|+|ϱ₀″|)/ϱ₀ over the samples.
    pub k1_est: T,
    /// sup (1+|y|)^ℓ ϱ₀ with ℓ = ℓ_ρ (4 for the exponential family).
    pub k2_est: T,
    /// sup (1+|y|)⁴ϱ₀, only reported in the very fast regime.
    pub k3_est: Option<T>,
    pub regime: Regime,
    /// Discrete L² norm of G₀′/√ϱ₀.
    pub g0_norm: T,
    /// min of |v₀′|/√ϱ₀ over the outer tenth of the samples, left and right.
    pub liminf_left: T,
    pub liminf_right: T,
    pub liminf_ok: bool,
    pub norms: IntegrabilityNorms,
}

/// Threshold above which the tail ratio |v₀′|/√ϱ₀ is treated as divergent.
pub const LIMINF_BOUND: f64 = 1e8;

/// Estimate the constants of the density hypotheses by sampling `n_samples`
/// points uniformly on `[−half_width, half_width]`.
pub fn check_hypotheses<T: Real>(fields: &InitialFields<T>, half_width: T, n_samples: usize) -> Result<HypothesisReport<T>> {
    if n_samples < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 samples, got {n_samples}")));
    }
    if !(half_width > T::zero()) {
        return Err(Error::InvalidParameter("sample domain must have positive half width".into()));
    }
    let profile = &fields.profile;
    let ys: Vec<T> = (0..n_samples)
        .map(|i| {
            let xi = T::from_count(2 * i) / T::from_count(n_samples - 1) - T::one();
            xi * half_width
        })
        .collect();
    let rho: Vec<T> = ys.iter().map(|&y| profile.value(y)).collect();

    let ell_for_k2 = profile.decay_exponent().unwrap_or_else(|| T::lit(4.0));
    let mut k1 = T::zero();
    let mut k2 = T::zero();
    let mut k3 = T::zero();
    for (&y, &r) in ys.iter().zip(&rho) {
        let ratio = (profile.d1(y).abs() + profile.d2(y).abs()) / r;
        k1 = k1.max(ratio);
        let w = T::one() + y.abs();
        k2 = k2.max(w.powf(ell_for_k2) * r);
        k3 = k3.max(w.powi(4) * r);
    }
    let regime = profile.regime();

    let l2 = |f: &dyn Fn(T, T) -> T| -> f64 {
        let vals: Vec<T> = ys
            .iter()
            .zip(&rho)
            .map(|(&y, &r)| {
                let g = f(y, r);
                g * g
            })
            .collect();
        trapezoid(&ys, &vals).sqrt().to_f64_lossy()
    };
    let v0 = fields.v0;
    let th = fields.theta0;
    let g0_norm = {
        let vals: Vec<T> = ys
            .iter()
            .zip(&rho)
            .map(|(&y, &r)| {
                let g = fields.g0_prime(y);
                g * g / r
            })
            .collect();
        trapezoid(&ys, &vals).sqrt()
    };
    let norms = IntegrabilityNorms {
        sqrt_rho_v: l2(&|y, r| r.sqrt() * v0.value(y)),
        sqrt_rho_v_sq: l2(&|y, r| r.sqrt() * v0.value(y) * v0.value(y)),
        v_prime: l2(&|y, _| v0.d1(y)),
        v_second: l2(&|y, _| v0.d2(y)),
        sqrt_rho_theta: l2(&|y, r| r.sqrt() * th.value(y)),
        sqrt_rho_theta_prime: l2(&|y, r| r.sqrt() * th.d1(y)),
        sqrt_rho_theta_second: l2(&|y, r| r.sqrt() * th.d2(y)),
    };

    let tail = (n_samples / 10).max(1);
    let tail_min = |range: std::ops::Range<usize>| range.map(|i| v0.d1(ys[i]).abs() / rho[i].sqrt()).fold(T::infinity(), T::min);
    let liminf_left = tail_min(0..tail);
    let liminf_right = tail_min(n_samples - tail..n_samples);
    let liminf_ok = (liminf_left + liminf_right).is_finite() && (liminf_left + liminf_right) < T::lit(LIMINF_BOUND);

    Ok(HypothesisReport {
        k1_est: k1,
        k2_est: k2,
        k3_est: (regime == Regime::VeryFast).then_some(k3),
        regime,
        g0_norm,
        liminf_left,
        liminf_right,
        liminf_ok,
        norms,
    })
}

/// Quintic smoothstep 6u⁵ − 15u⁴ + 10u³ and its first two derivatives, clamped to [0, 1].
fn smoothstep<T: Real>(u: T) -> (T, T, T) {
    if u <= T::zero() {
        return (T::zero(), T::zero(), T::zero());
    }
    if u >= T::one() {
        return (T::one(), T::zero(), T::zero());
    }
    let u2 = u * u;
    let u3 = u2 * u;
    let value = u3 * (T::lit(10.0) + u * (T::lit(-15.0) + T::lit(6.0) * u));
    let one_minus = T::one() - u;
    let d1 = T::lit(30.0) * u2 * one_minus * one_minus;
    let d2 = T::lit(60.0) * u * one_minus * (T::one() - T::lit(2.0) * u);
    (value, d1, d2)
}

/// Bound on |χ′| + |χ″| for the smoothstep cutoff, independent of the interval.
pub const CUTOFF_DERIVATIVE_BOUND: f64 = 60.0;

/// Initial data modified on `[α−1, β+1]`: temperature multiplied by a smooth
/// cutoff χ that equals 1 on `[α, β]`, velocity continued by sine arcs so
/// that its derivative vanishes at the ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedFields<T> {
    pub fields: InitialFields<T>,
    pub alpha: T,
    pub beta: T,
}

pub fn truncate_and_extend<T: Real>(fields: &InitialFields<T>, alpha_n: T, beta_n: T) -> Result<ExtendedFields<T>> {
    if !(alpha_n < beta_n) {
        return Err(Error::InvalidParameter(format!(
            "alpha_n ({alpha_n}) must be less than beta_n ({beta_n})"
        )));
    }
    Ok(ExtendedFields {
        fields: *fields,
        alpha: alpha_n,
        beta: beta_n,
    })
}

impl<T: Real> ExtendedFields<T> {
    /// The enlarged interval `[α−1, β+1]`.
    pub fn domain(&self) -> (T, T) {
        (self.alpha - T::one(), self.beta + T::one())
    }

    /// χ, χ′, χ″.
    pub fn cutoff(&self, y: T) -> (T, T, T) {
        if y < self.alpha {
            smoothstep(y - (self.alpha - T::one()))
        } else if y > self.beta {
            let (c, d1, d2) = smoothstep(self.beta + T::one() - y);
            (c, -d1, d2)
        } else {
            (T::one(), T::zero(), T::zero())
        }
    }

    pub fn theta(&self, y: T) -> T {
        self.fields.theta0.value(y) * self.cutoff(y).0
    }

    pub fn v(&self, y: T) -> T {
        let v0 = &self.fields.v0;
        let half_pi = T::FRAC_PI_2();
        if y < self.alpha {
            v0.value(self.alpha) + v0.d1(self.alpha) / half_pi * (half_pi * (y - self.alpha)).sin()
        } else if y > self.beta {
            v0.value(self.beta) + v0.d1(self.beta) / half_pi * (half_pi * (y - self.beta)).sin()
        } else {
            v0.value(y)
        }
    }

    pub fn dv(&self, y: T) -> T {
        let v0 = &self.fields.v0;
        let half_pi = T::FRAC_PI_2();
        if y < self.alpha {
            v0.d1(self.alpha) * (half_pi * (y - self.alpha)).cos()
        } else if y > self.beta {
            v0.d1(self.beta) * (half_pi * (y - self.beta)).cos()
        } else {
            v0.d1(y)
        }
    }

    pub fn rho0(&self, y: T) -> T {
        self.fields.profile.value(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(amp: f64, ell: f64) -> DensityProfile<f64> {
        make_density_profile(DensityFamily::Algebraic, &[amp, ell]).unwrap()
    }

    fn default_fields(profile: DensityProfile<f64>) -> InitialFields<f64> {
        InitialFields::new(
            profile,
            VelocityField::GaussianOdd { amp: 1.0 },
            TemperatureField::Gaussian { amp: 1.0 },
            GasConstants::default(),
        )
        .unwrap()
    }

    #[test]
    fn gas_constants_tie_gamma_to_r_over_cv() {
        let g = GasConstants::new(1.0, 2.0, 0.4, 1.0, 3.0).unwrap();
        assert_eq!(g.gamma_minus_one(), 0.4);
        assert_eq!(g.gamma(), 1.4);
        assert!(GasConstants::new(1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(GasConstants::new(-1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn profile_examples() {
        assert_eq!(alg(1.0, 4.0).value(0.0), 1.0);
        assert!((alg(1.0, 2.0).value(1.0) - 0.5).abs() < 1e-15);
        let e = make_density_profile(DensityFamily::Exponential, &[0.5]).unwrap();
        assert!((e.value(0.0) - (-1.0_f64).exp()).abs() < 1e-15);
        assert!((e.value(0.0) - 0.3678794).abs() < 1e-7);
    }

    #[test]
    fn profile_rejects_bad_parameters() {
        assert!(make_density_profile::<f64>(DensityFamily::Algebraic, &[0.0, 2.0]).is_err());
        assert!(make_density_profile::<f64>(DensityFamily::Algebraic, &[1.0, -1.0]).is_err());
        assert!(make_density_profile::<f64>(DensityFamily::Algebraic, &[1.0]).is_err());
        assert!(make_density_profile::<f64>(DensityFamily::Exponential, &[0.0]).is_err());
        assert!(make_density_profile::<f64>(DensityFamily::Exponential, &[0.6]).is_err());
        assert!(make_density_profile::<f64>(DensityFamily::Exponential, &[0.5]).is_ok());
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let profiles = [
            alg(2.0, 3.0),
            alg(1.0, 4.5),
            make_density_profile(DensityFamily::Exponential, &[0.3]).unwrap(),
        ];
        let h = 1e-5;
        for p in profiles {
            for &y in &[-3.0, -0.7, 0.0, 0.4, 2.2, 7.5] {
                let fd1 = (p.value(y + h) - p.value(y - h)) / (2.0 * h);
                let fd2 = (p.d1(y + h) - p.d1(y - h)) / (2.0 * h);
                let scale = p.value(y).max(1e-30);
                assert!((fd1 - p.d1(y)).abs() / scale < 1e-7, "{p:?} d1 at {y}");
                assert!((fd2 - p.d2(y)).abs() / scale < 1e-6, "{p:?} d2 at {y}");
            }
        }
    }

    #[test]
    fn regime_thresholds() {
        assert_eq!(Regime::classify(2.0), Regime::Slow);
        assert_eq!(Regime::classify(2.0 + 1e-12), Regime::Fast);
        assert_eq!(Regime::classify(3.999), Regime::Fast);
        assert_eq!(Regime::classify(4.0), Regime::VeryFast);
        assert_eq!(alg(1.0, 0.5).regime(), Regime::Slow);
        let e = make_density_profile(DensityFamily::Exponential, &[0.2]).unwrap();
        assert_eq!(e.regime(), Regime::VeryFast);
    }

    #[test]
    fn hypotheses_for_very_fast_profile() {
        let rep = check_hypotheses(&default_fields(alg(1.0, 4.0)), 100.0, 2001).unwrap();
        assert_eq!(rep.regime, Regime::VeryFast);
        assert!(rep.k3_est.is_some());
        assert!(rep.k1_est.is_finite() && rep.k1_est > 0.0);
        assert!(rep.liminf_ok);
        assert!(rep.g0_norm.is_finite());
        let slow = check_hypotheses(&default_fields(alg(1.0, 2.0)), 100.0, 2001).unwrap();
        assert_eq!(slow.k3_est, None);
    }

    #[test]
    fn k1_vanishes_along_the_constant_limit() {
        for ell in [1e-6, 1e-9, 1e-12] {
            let rep = check_hypotheses(&default_fields(alg(1.0, ell)), 100.0, 1001).unwrap();
            assert!(rep.k1_est <= 2.0 * ell, "ell={ell} k1={}", rep.k1_est);
        }
    }

    #[test]
    fn log_derivative_peak_of_quadratic_decay() {
        // Dense sampling oracle: |ϱ₀′|/ϱ₀ = 2|y|/(1+y²), maximal (= 1) at |y| = 1.
        let p = alg(1.0, 2.0);
        let n = 200_001;
        let (mut best, mut at) = (0.0_f64, 0.0_f64);
        for i in 0..n {
            let y = -100.0 + 200.0 * i as f64 / (n - 1) as f64;
            let r = p.d1(y).abs() / p.value(y);
            if r > best {
                best = r;
                at = y;
            }
        }
        assert!((best - 1.0).abs() < 1e-6);
        assert!((at.abs() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn g0_matches_recomputation() {
        let f = default_fields(alg(1.0, 3.0));
        for &y in &[-2.0, -0.5, 0.0, 0.3, 1.7] {
            let direct = f.gas.mu() * f.v0.d1(y) - f.gas.r_gas() * f.profile.value(y) * f.theta0.value(y);
            assert!((f.g0(y) - direct).abs() <= 1e-12 * direct.abs().max(1e-300));
            let h = 1e-5;
            let fd = (f.g0(y + h) - f.g0(y - h)) / (2.0 * h);
            assert!((fd - f.g0_prime(y)).abs() < 1e-8);
        }
    }

    #[test]
    fn extension_examples() {
        let f = default_fields(alg(1.0, 4.0));
        let ext = truncate_and_extend(&f, -1.5, 0.7).unwrap();
        assert_eq!(ext.v(0.7), f.v0.value(0.7));
        assert!(ext.dv(1.7).abs() < 1e-15);
        assert!(ext.dv(-2.5).abs() < 1e-15);
        assert_eq!(ext.theta(-2.5), 0.0);
        assert_eq!(ext.theta(1.7), 0.0);
        for i in 0..=100 {
            let y = (-1.5 + 2.2 * i as f64 / 100.0).min(0.7);
            assert_eq!(ext.theta(y), f.theta0.value(y));
        }
        assert!(truncate_and_extend(&f, 1.0, 1.0).is_err());
    }

    #[test]
    fn extension_is_c1_at_the_junction() {
        let f = default_fields(alg(1.0, 4.0));
        let beta = 0.8;
        let ext = truncate_and_extend(&f, -0.8, beta).unwrap();
        let taylor = |h: f64| f.v0.value(beta) + f.v0.d1(beta) * h;
        let mut prev: Option<f64> = None;
        for k in 2..10 {
            let h = 0.5_f64.powi(k);
            let err = (ext.v(beta + h) - taylor(h)).abs().max((ext.v(beta - h) - taylor(-h)).abs());
            if let Some(p) = prev {
                // O(h²): halving h cuts the defect by about four.
                assert!(err < p * 0.3, "h={h} err={err} prev={p}");
            }
            prev = Some(err);
        }
    }

    #[test]
    fn cutoff_bounds() {
        let f = default_fields(alg(1.0, 4.0));
        let ext = truncate_and_extend(&f, -3.0, 3.0).unwrap();
        for i in 0..=2000 {
            let y = -4.0 + 8.0 * i as f64 / 2000.0;
            let (c, d1, d2) = ext.cutoff(y);
            assert!((0.0..=1.0).contains(&c));
            assert!(d1.abs() + d2.abs() <= CUTOFF_DERIVATIVE_BOUND);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let p = make_density_profile::<f32>(DensityFamily::Algebraic, &[1.0, 2.0]).unwrap();
        assert!((p.value(1.0) - 0.5).abs() < 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn profiles_are_even_positive_and_radially_nonincreasing(
                amp in 0.01f64..10.0, ell in 0.1f64..8.0, delta in 0.01f64..0.5,
                y in 0.0f64..200.0, dy in 0.0f64..5.0
            ) {
                for p in [alg(amp, ell), make_density_profile(DensityFamily::Exponential, &[delta]).unwrap()] {
                    prop_assert_eq!(p.value(y), p.value(-y));
                    prop_assert!(p.value(y) > 0.0 || p.value(y) == 0.0 && y > 30.0);
                    prop_assert!(p.value(y + dy) <= p.value(y));
                }
            }

            #[test]
            fn k1_estimate_dominates_every_sample(ell in 0.2f64..6.0, amp in 0.1f64..5.0) {
                let f = default_fields(alg(amp, ell));
                let rep = check_hypotheses(&f, 50.0, 500).unwrap();
                let tol = 1e-9 * rep.k1_est;
                for i in 0..500 {
                    let y = -50.0 + 100.0 * i as f64 / 499.0;
                    let p = f.profile;
                    prop_assert!(p.d1(y).abs() + p.d2(y).abs() <= (rep.k1_est + tol) * p.value(y));
                }
            }
        }
    }
}
