use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeEstimate<T> {
    /// Last extrapolated value.
    pub estimate: T,
    /// (u(P*) − u(P* − ℓ n))/ℓ for every ℓ.
    pub quotients: Vec<T>,
    /// Linear extrapolations to ℓ = 0 from consecutive quotient pairs.
    pub extrapolated: Vec<T>,
    /// Extrapolations monotone and the last two within 10% of the quotient scale.
    pub confident: bool,
    /// Difference of the last two extrapolations.
    pub spread: T,
}

impl<T: Real> SlopeEstimate<T> {
    /// Negative beyond the spread of the last two extrapolations.
    pub fn strictly_negative(&self) -> bool {
        self.confident && self.estimate + self.spread < T::zero()
    }
}

/// Extrapolate the outward difference quotient at a boundary point.
/// `samples` holds (ℓ, u(P* − ℓ n)) with ℓ strictly decreasing toward 0.
pub fn hopf_slope_estimate<T: Real>(u_star: T, samples: &[(T, T)]) -> Result<SlopeEstimate<T>> {
    if samples.len() < 4 {
        return Err(Error::InsufficientSamples {
            needed: 4,
            have: samples.len(),
        });
    }
    if samples.iter().any(|s| !(s.0 > T::zero())) || samples.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(Error::InvalidParameter(
            "step lengths must be positive and strictly decreasing".into(),
        ));
    }
    let quotients: Vec<T> = samples.iter().map(|&(l, u)| (u_star - u) / l).collect();
    // q(ℓ) ≈ q0 + q1·ℓ, solved from consecutive pairs
    let extrapolated: Vec<T> = samples
        .windows(2)
        .zip(quotients.windows(2))
        .map(|(s, q)| (s[0].0 * q[1] - s[1].0 * q[0]) / (s[0].0 - s[1].0))
        .collect();
    let scale = quotients.iter().fold(T::zero(), |m, q| m.max(q.abs()));
    let noise = T::lit(1e-12) * scale.max(T::min_positive_value());
    let diffs: Vec<T> = extrapolated.windows(2).map(|w| w[1] - w[0]).collect();
    let rising = diffs.iter().all(|&d| d >= -noise);
    let falling = diffs.iter().all(|&d| d <= noise);
    if !(rising || falling) {
        return Err(Error::Inconclusive(format!(
            "extrapolated slopes are not monotone: {extrapolated:?}"
        )));
    }
    let n = extrapolated.len();
    let spread = (extrapolated[n - 1] - extrapolated[n - 2]).abs();
    Ok(SlopeEstimate {
        estimate: extrapolated[n - 1],
        confident: spread <= T::lit(0.1) * scale,
        spread,
        quotients,
        extrapolated,
    })
}
