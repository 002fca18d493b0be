//! Centered scalar coupling laws and the centered truncation J⁽¹⁾/J⁽²⁾.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::{Error, Result};

/// A scalar coupling law. All random kinds are centered: the Rademacher law is
/// ±1 equiprobable, the symmetric Pareto law has density ∝ |x|^(−α−1) on
/// |x| ≥ scale with equal weight on both signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisorderDistribution {
    Deterministic { value: f64 },
    Rademacher,
    Gaussian { sd: f64 },
    Uniform { half_width: f64 },
    SymmetricPareto { alpha: f64, scale: f64 },
}

impl DisorderDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DisorderDistribution::Deterministic { value } => value.is_finite(),
            DisorderDistribution::Rademacher => true,
            DisorderDistribution::Gaussian { sd } => sd.is_finite() && sd > 0.0,
            DisorderDistribution::Uniform { half_width } => half_width.is_finite() && half_width > 0.0,
            DisorderDistribution::SymmetricPareto { alpha, scale } => {
                alpha.is_finite() && alpha > 0.0 && scale.is_finite() && scale > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad distribution parameters: {self:?}")))
        }
    }

    pub fn is_random(&self) -> bool {
        !matches!(self, DisorderDistribution::Deterministic { .. })
    }

    /// One draw; deterministic given the generator state.
    pub fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> f64 {
        match *self {
            DisorderDistribution::Deterministic { value } => value,
            DisorderDistribution::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DisorderDistribution::Gaussian { sd } => {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            }
            DisorderDistribution::Uniform { half_width } => rng.gen_range(-half_width..half_width),
            DisorderDistribution::SymmetricPareto { alpha, scale } => {
                // |J| = s·U^(−1/α) by inversion; 1−gen() keeps U in (0, 1].
                let u: f64 = 1.0 - rng.gen::<f64>();
                let magnitude = scale * u.powf(-1.0 / alpha);
                if rng.gen::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }

    /// Closed-form E[|J|^p] for p ∈ [1, 2]; +∞ when the moment does not exist.
    pub fn moment_p(&self, p: f64) -> Result<f64> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("moment order p = {p} outside [1, 2]")));
        }
        Ok(match *self {
            DisorderDistribution::Deterministic { value } => value.abs().powf(p),
            DisorderDistribution::Rademacher => 1.0,
            DisorderDistribution::Gaussian { sd } => {
                sd.powf(p) * 2.0_f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0)
                    / std::f64::consts::PI.sqrt()
            }
            DisorderDistribution::Uniform { half_width } => half_width.powf(p) / (p + 1.0),
            DisorderDistribution::SymmetricPareto { alpha, scale } => {
                if p < alpha {
                    alpha * scale.powf(p) / (alpha - p)
                } else {
                    f64::INFINITY
                }
            }
        })
    }

    /// Outcome list (value, probability) for finitely-supported kinds.
    pub fn finite_outcomes(&self) -> Option<Vec<(f64, f64)>> {
        match *self {
            DisorderDistribution::Deterministic { value } => Some(vec![(value, 1.0)]),
            DisorderDistribution::Rademacher => Some(vec![(1.0, 0.5), (-1.0, 0.5)]),
            _ => None,
        }
    }

    /// Centering constant E[J·χ_[−R,R](J)]. Every random kind here is
    /// sign-symmetric, so the integrand is odd and the constant vanishes;
    /// deterministic couplings pass through the truncation uncentered.
    pub fn truncated_mean(&self, _r: f64) -> f64 {
        0.0
    }

    /// E[|J|·χ_{|J| > R}(J)] in closed form.
    pub fn tail_abs_mean(&self, r: f64) -> f64 {
        match *self {
            DisorderDistribution::Deterministic { value } => {
                if value.abs() > r {
                    value.abs()
                } else {
                    0.0
                }
            }
            DisorderDistribution::Rademacher => {
                if r < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            DisorderDistribution::Gaussian { sd } => {
                sd * (2.0 / std::f64::consts::PI).sqrt() * (-r * r / (2.0 * sd * sd)).exp()
            }
            DisorderDistribution::Uniform { half_width } => {
                if r >= half_width {
                    0.0
                } else {
                    (half_width * half_width - r * r) / (2.0 * half_width)
                }
            }
            DisorderDistribution::SymmetricPareto { alpha, scale } => {
                if alpha <= 1.0 {
                    f64::INFINITY
                } else if r <= scale {
                    alpha * scale / (alpha - 1.0)
                } else {
                    alpha * scale.powf(alpha) * r.powf(1.0 - alpha) / (alpha - 1.0)
                }
            }
        }
    }

    /// E[|J⁽²⁾|] for the centered truncation at cutoff R. With a zero
    /// centering constant this is exactly the tail expectation.
    pub fn truncation_remainder_abs_mean(&self, r: f64) -> f64 {
        self.tail_abs_mean(r) + self.truncated_mean(r).abs()
    }
}

/// The pair (J⁽¹⁾, J⁽²⁾) jointly sampled from one underlying coupling:
/// J⁽¹⁾ = J·χ_[−R,R](J) − E[J·χ_[−R,R](J)] and J⁽²⁾ = J − J⁽¹⁾.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedPair {
    pub underlying: DisorderDistribution,
    pub r_cutoff: f64,
    pub centering: f64,
}

impl TruncatedPair {
    /// Split a realized coupling into its bounded and tail parts. The parts
    /// sum back to `j` exactly.
    pub fn split(&self, j: f64) -> (f64, f64) {
        let bounded = if j.abs() <= self.r_cutoff { j } else { 0.0 };
        let j1 = bounded - self.centering;
        (j1, j - j1)
    }

    pub fn sample_pair<G: Rng + ?Sized>(&self, rng: &mut G) -> (f64, f64) {
        self.split(self.underlying.sample(rng))
    }

    /// Joint outcomes ((J⁽¹⁾, J⁽²⁾), probability) when the underlying law is
    /// finitely supported.
    pub fn finite_outcomes(&self) -> Option<Vec<((f64, f64), f64)>> {
        let base = self.underlying.finite_outcomes()?;
        Some(base.into_iter().map(|(j, p)| (self.split(j), p)).collect())
    }
}

/// Build the centered truncation of `dist` at cutoff `r`.
pub fn truncate(dist: DisorderDistribution, r: f64) -> Result<TruncatedPair> {
    dist.validate()?;
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("truncation cutoff R = {r} must be positive")));
    }
    Ok(TruncatedPair {
        underlying: dist,
        r_cutoff: r,
        centering: dist.truncated_mean(r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::rng;

    #[test]
    fn deterministic_sample_is_constant() {
        let d = DisorderDistribution::Deterministic { value: 1.5 };
        let mut r = rng::stream(0, 0);
        for _ in 0..10 {
            assert_eq!(d.sample(&mut r), 1.5);
        }
    }

    #[test]
    fn rademacher_support_is_signs() {
        let d = DisorderDistribution::Rademacher;
        let mut r = rng::stream(1, 0);
        for _ in 0..100 {
            let v = d.sample(&mut r);
            assert!(v == 1.0 || v == -1.0);
        }
    }

    #[test]
    fn pareto_support_respects_scale() {
        let d = DisorderDistribution::SymmetricPareto { alpha: 1.5, scale: 1.0 };
        let mut r = rng::stream(2, 0);
        for _ in 0..1000 {
            assert!(d.sample(&mut r).abs() >= 1.0);
        }
    }

    #[test]
    fn moment_closed_forms() {
        assert_eq!(DisorderDistribution::Rademacher.moment_p(2.0).unwrap(), 1.0);
        let pareto = DisorderDistribution::SymmetricPareto { alpha: 1.5, scale: 1.0 };
        assert!(pareto.moment_p(2.0).unwrap().is_infinite());
        assert_relative_eq!(pareto.moment_p(1.0).unwrap(), 3.0, max_relative = 1e-14);
        let gauss = DisorderDistribution::Gaussian { sd: 1.0 }.moment_p(2.0).unwrap();
        assert_relative_eq!(gauss, 1.0, max_relative = 1e-12);
        let unif = DisorderDistribution::Uniform { half_width: 2.0 };
        assert_relative_eq!(unif.moment_p(2.0).unwrap(), 4.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn moments_match_monte_carlo() {
        let cases = [
            DisorderDistribution::Gaussian { sd: 1.0 },
            DisorderDistribution::Uniform { half_width: 1.5 },
            DisorderDistribution::SymmetricPareto { alpha: 3.0, scale: 1.0 },
        ];
        let n = 1_000_000usize;
        for dist in cases {
            for p in [1.0, 2.0] {
                let m = dist.moment_p(p).unwrap();
                let mut r = rng::stream(7, 0);
                let samples: Vec<f64> = (0..n).map(|_| dist.sample(&mut r).abs().powf(p)).collect();
                let mean = samples.iter().sum::<f64>() / n as f64;
                let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                assert!(
                    (mean - m).abs() <= 3.0 * se,
                    "{dist:?} p={p}: mc {mean} vs exact {m} (se {se})"
                );
            }
        }
    }

    #[test]
    fn empirical_mean_is_centered() {
        let cases = [
            DisorderDistribution::Rademacher,
            DisorderDistribution::Gaussian { sd: 1.0 },
            DisorderDistribution::Uniform { half_width: 1.0 },
            DisorderDistribution::SymmetricPareto { alpha: 2.5, scale: 1.0 },
        ];
        let n = 1_000_000usize;
        for dist in cases {
            let mut r = rng::stream(11, 0);
            let samples: Vec<f64> = (0..n).map(|_| dist.sample(&mut r)).collect();
            let mean = samples.iter().sum::<f64>() / n as f64;
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!(mean.abs() <= 5.0 * se, "{dist:?}: mean {mean} se {se}");
        }
    }

    #[test]
    fn truncate_preserves_sum_per_draw() {
        let dist = DisorderDistribution::SymmetricPareto { alpha: 1.5, scale: 1.0 };
        let pair = truncate(dist, 5.0).unwrap();
        let mut ra = rng::stream(3, 0);
        let mut rb = rng::stream(3, 0);
        for _ in 0..1000 {
            let (j1, j2) = pair.sample_pair(&mut ra);
            let j = dist.sample(&mut rb);
            assert_eq!(j1 + j2, j); // bitwise, same stream
            assert!(j1.abs() <= pair.r_cutoff + pair.centering.abs());
        }
    }

    #[test]
    fn rademacher_truncated_above_support_has_zero_tail() {
        let pair = truncate(DisorderDistribution::Rademacher, 2.0).unwrap();
        let mut r = rng::stream(4, 0);
        for _ in 0..100 {
            let (j1, j2) = pair.sample_pair(&mut r);
            assert_eq!(j2, 0.0);
            assert!(j1 == 1.0 || j1 == -1.0);
        }
    }

    #[test]
    fn pareto_tail_mean_closed_form_matches_sampling() {
        let dist = DisorderDistribution::SymmetricPareto { alpha: 1.5, scale: 1.0 };
        // closed form: 3·R^(−1/2) for R ≥ 1
        assert_relative_eq!(dist.tail_abs_mean(100.0), 0.3, max_relative = 1e-14);
        let grid = [1.0, 4.0, 25.0, 100.0];
        let mut prev = f64::INFINITY;
        for &r in &grid {
            let v = dist.tail_abs_mean(r);
            assert!(v <= prev);
            prev = v;
        }
        let r = 4.0;
        let n = 1_000_000usize;
        let mut g = rng::stream(9, 0);
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let j = dist.sample(&mut g);
                if j.abs() > r {
                    j.abs()
                } else {
                    0.0
                }
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - dist.tail_abs_mean(r)).abs() <= 5.0 * se);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DisorderDistribution::Gaussian { sd: 0.0 }.validate().is_err());
        assert!(DisorderDistribution::SymmetricPareto { alpha: -1.0, scale: 1.0 }.validate().is_err());
        assert!(truncate(DisorderDistribution::Rademacher, 0.0).is_err());
    }

    #[test]
    fn config_schema_round_trips() {
        let json = r#"{"kind":"gaussian","sd":1.0}"#;
        let d: DisorderDistribution = serde_json::from_str(json).unwrap();
        assert_eq!(d, DisorderDistribution::Gaussian { sd: 1.0 });
        let json = r#"{"kind":"symmetric_pareto","alpha":1.5,"scale":1.0}"#;
        let d: DisorderDistribution = serde_json::from_str(json).unwrap();
        assert_eq!(d, DisorderDistribution::SymmetricPareto { alpha: 1.5, scale: 1.0 });
    }
}
