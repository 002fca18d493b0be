//! Quenched pressure p_Λ(β) = E[p_Λ(β, J)], computed two ways: exactly by
//! enumerating all disorder outcomes of finitely-supported laws (the oracle),
//! and by seeded parallel Monte Carlo with standard errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{DisorderDistribution, TruncatedPair};
use crate::engine;
use crate::model::{self, CouplingFamily, Hamiltonian, InteractionTerm, Region, Subset};
use crate::rng;
use crate::{Error, Result};

/// Hard cap on enumerated disorder outcomes.
pub const MAX_OUTCOMES: u64 = 1 << 20;

/// Hard cap on the number of random terms in exact disorder enumeration.
pub const MAX_RANDOM_TERMS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A finite disorder space over a fixed term list: each outcome is a
/// probability together with one coupling per term. Covers independent
/// products and jointly-dependent constructions (truncation pairs) alike.
#[derive(Debug, Clone)]
pub struct ExactEnsemble {
    region: Region,
    subsets: Vec<Subset>,
    multipliers: Vec<f64>,
    orbit_of: Vec<usize>,
    outcomes: Vec<(f64, Vec<f64>)>,
    independent: bool,
}

impl ExactEnsemble {
    /// Product ensemble of independent per-term laws.
    pub fn independent(
        region: Region,
        terms: Vec<(Subset, f64, DisorderDistribution)>,
    ) -> Result<Self> {
        let mut per_term: Vec<Vec<(f64, f64)>> = Vec::with_capacity(terms.len());
        let mut random_terms = 0usize;
        let mut total: u64 = 1;
        for (_, _, dist) in &terms {
            let outcomes = dist.finite_outcomes().ok_or_else(|| {
                Error::Unsupported(format!(
                    "exact disorder enumeration needs finitely-supported laws, got {dist:?}"
                ))
            })?;
            if outcomes.len() > 1 {
                random_terms += 1;
            }
            total = total
                .checked_mul(outcomes.len() as u64)
                .filter(|&t| t <= MAX_OUTCOMES)
                .ok_or_else(|| Error::Capacity("disorder outcome space exceeds 2^20".into()))?;
            per_term.push(outcomes);
        }
        if random_terms > MAX_RANDOM_TERMS {
            return Err(Error::Capacity(format!(
                "{random_terms} random terms exceed the exact-disorder cap {MAX_RANDOM_TERMS}"
            )));
        }
        let mut outcomes = Vec::with_capacity(total as usize);
        for mut idx in 0..total {
            let mut prob = 1.0;
            let mut js = Vec::with_capacity(terms.len());
            for choices in &per_term {
                let pick = (idx % choices.len() as u64) as usize;
                idx /= choices.len() as u64;
                let (value, p) = choices[pick];
                prob *= p;
                js.push(value);
            }
            outcomes.push((prob, js));
        }
        let (subsets, multipliers): (Vec<_>, Vec<_>) =
            terms.iter().map(|(s, l, _)| (*s, *l)).unzip();
        let orbit_of = vec![0; subsets.len()];
        Ok(ExactEnsemble { region, subsets, multipliers, orbit_of, outcomes, independent: true })
    }

    /// Ensemble of a translation-invariant family on a box, one independent
    /// draw per translate; terms keep their orbit provenance.
    pub fn from_family(family: &CouplingFamily, region: &Region) -> Result<Self> {
        let layout = model::layout(family, region)?;
        let terms: Vec<(Subset, f64, DisorderDistribution)> = layout
            .terms
            .iter()
            .map(|t| (t.subset, 1.0, family.orbits[t.orbit].distribution))
            .collect();
        let mut ens = Self::independent(layout.region.clone(), terms)?;
        ens.orbit_of = layout.terms.iter().map(|t| t.orbit).collect();
        Ok(ens)
    }

    /// Dependent ensemble from centered truncations: each base subset carries
    /// two terms, J⁽¹⁾ and J⁽²⁾, split from one underlying draw.
    pub fn dependent_truncated(
        region: Region,
        base: Vec<(Subset, DisorderDistribution)>,
        r_cutoff: f64,
    ) -> Result<Self> {
        let pairs: Vec<TruncatedPair> = base
            .iter()
            .map(|(_, dist)| crate::disorder::truncate(*dist, r_cutoff))
            .collect::<Result<Vec<_>>>()?;
        let per_base: Vec<Vec<((f64, f64), f64)>> = pairs
            .iter()
            .map(|p| {
                p.finite_outcomes().ok_or_else(|| {
                    Error::Unsupported("dependent enumeration needs finitely-supported laws".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total: u64 = 1;
        for choices in &per_base {
            total = total
                .checked_mul(choices.len() as u64)
                .filter(|&t| t <= MAX_OUTCOMES)
                .ok_or_else(|| Error::Capacity("disorder outcome space exceeds 2^20".into()))?;
        }
        let mut subsets = Vec::with_capacity(2 * base.len());
        for (s, _) in &base {
            subsets.push(*s);
            subsets.push(*s);
        }
        let mut outcomes = Vec::with_capacity(total as usize);
        for mut idx in 0..total {
            let mut prob = 1.0;
            let mut js = Vec::with_capacity(2 * base.len());
            for choices in &per_base {
                let pick = (idx % choices.len() as u64) as usize;
                idx /= choices.len() as u64;
                let ((j1, j2), p) = choices[pick];
                prob *= p;
                js.push(j1);
                js.push(j2);
            }
            outcomes.push((prob, js));
        }
        let multipliers = vec![1.0; subsets.len()];
        let orbit_of = vec![0; subsets.len()];
        Ok(ExactEnsemble { region, subsets, multipliers, orbit_of, outcomes, independent: false })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn n_terms(&self) -> usize {
        self.subsets.len()
    }

    pub fn subsets(&self) -> &[Subset] {
        &self.subsets
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn is_independent(&self) -> bool {
        self.independent
    }

    pub fn orbit_of(&self) -> &[usize] {
        &self.orbit_of
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    /// A copy with the multiplier of every term in `orbit` set to `lambda`.
    pub fn with_orbit_multiplier(&self, orbit: usize, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "orbit multiplier {lambda} must be finite and nonnegative"
            )));
        }
        let mut copy = self.clone();
        for (k, &o) in self.orbit_of.iter().enumerate() {
            if o == orbit {
                copy.multipliers[k] = lambda;
            }
        }
        Ok(copy)
    }

    fn hamiltonian_for(&self, couplings: &[f64]) -> Result<Hamiltonian<f64>> {
        let terms = self
            .subsets
            .iter()
            .zip(&self.multipliers)
            .zip(couplings)
            .map(|((s, &l), &j)| InteractionTerm::new(*s, l, j))
            .collect::<Result<Vec<_>>>()?;
        Hamiltonian::new(self.region.clone(), terms)
    }

    /// E over disorder of a per-realization functional of the Hamiltonian.
    pub fn expect<F: Fn(&Hamiltonian<f64>) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let mut acc = 0.0;
        for (prob, js) in &self.outcomes {
            acc += prob * f(&self.hamiltonian_for(js)?)?;
        }
        Ok(acc)
    }

    /// Quenched pressure density E[p_Λ(β, J)].
    pub fn quenched_pressure(&self, beta: f64) -> Result<f64> {
        self.expect(|h| Ok(engine::log_partition(h, beta)?.pressure_density))
    }

    /// Unnormalized quenched log-partition P_Λ = E[ln Z].
    pub fn quenched_log_z(&self, beta: f64) -> Result<f64> {
        self.expect(|h| Ok(engine::log_partition(h, beta)?.log_partition))
    }

    /// Quenched pressure of the prefix Hamiltonian (first `n` terms).
    pub fn quenched_pressure_prefix(&self, beta: f64, n: usize) -> Result<f64> {
        self.expect(|h| Ok(engine::log_partition(&h.prefix(n)?, beta)?.pressure_density))
    }

    /// E[f(J_k)] over the marginal of term k.
    pub fn term_marginal<F: Fn(f64) -> f64>(&self, k: usize, f: F) -> f64 {
        self.outcomes.iter().map(|(p, js)| p * f(self.multipliers[k] * js[k])).sum()
    }

    /// Analytic ∂P_Λ/∂λ for a common multiplier on `orbit`:
    /// E[Σ_{k ∈ orbit} β J_k ⟨σ_{X_k}⟩].
    pub fn quenched_dlogz_dlambda(&self, orbit: usize, beta: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (prob, js) in &self.outcomes {
            let h = self.hamiltonian_for(js)?;
            let mut inner = 0.0;
            for (k, &o) in self.orbit_of.iter().enumerate() {
                if o == orbit {
                    inner += beta * js[k] * engine::gibbs_expectation(&h, beta, self.subsets[k])?;
                }
            }
            acc += prob * inner;
        }
        Ok(acc)
    }
}

/// Exact quenched pressure over all disorder outcomes of a family.
pub fn quenched_exact(family: &CouplingFamily, region: &Region, beta: f64) -> Result<PressureEstimate> {
    let ens = ExactEnsemble::from_family(family, region)?;
    let mean = ens.quenched_pressure(beta)?;
    Ok(PressureEstimate {
        mean,
        std_error: 0.0,
        n_samples: ens.outcomes.len() as u64,
        exact: true,
        seed: None,
    })
}

/// Monte Carlo summary: the estimate plus order statistics that stay honest
/// under fat-tailed disorder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSummary {
    #[serde(flatten)]
    pub estimate: PressureEstimate,
    pub median: f64,
    pub iqr: f64,
}

/// Per-replica pressure samples, replica i drawn from stream (seed, i + 1).
/// Stream 0 is reserved for single-shot instantiation.
pub fn pressure_samples(
    family: &CouplingFamily,
    region: &Region,
    beta: f64,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n_samples}")));
    }
    let layout = model::layout(family, region)?;
    if layout.region.len() > engine::MAX_SITES {
        return Err(Error::Capacity(format!("region has {} sites", layout.region.len())));
    }
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i + 1);
            let h: Hamiltonian<f64> = model::hamiltonian_from_layout(family, &layout, &mut rng)?;
            Ok(engine::log_partition(&h, beta)?.pressure_density)
        })
        .collect()
}

fn summarize(samples: &[f64], seed: u64) -> McSummary {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std_error = (var / n).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("pressure samples are finite"));
    let quantile = |q: f64| -> f64 {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    };
    McSummary {
        estimate: PressureEstimate {
            mean,
            std_error,
            n_samples: samples.len() as u64,
            exact: false,
            seed: Some(seed),
        },
        median: quantile(0.5),
        iqr: quantile(0.75) - quantile(0.25),
    }
}

/// Seeded parallel Monte Carlo over disorder replicas. Sample i always uses
/// rng stream (seed, i + 1), so the result is identical at any worker count;
/// the final reduction is a fixed-order sequential sum.
pub fn quenched_mc(
    family: &CouplingFamily,
    region: &Region,
    beta: f64,
    n_samples: u64,
    seed: u64,
) -> Result<McSummary> {
    let samples = pressure_samples(family, region, beta, n_samples, seed)?;
    Ok(summarize(&samples, seed))
}

/// Annealed pressure (1/|Λ|) ln E[Z] for families whose random orbits are all
/// Gaussian. The Gaussian moment generating function gives a σ-independent
/// factor e^{β²λ²sd²/2} per random term, so
/// annealed = p_deterministic + (β²/2|Λ|)·Σ λ²sd².
pub fn annealed_pressure_gaussian(
    family: &CouplingFamily,
    region: &Region,
    beta: f64,
) -> Result<f64> {
    let layout = model::layout(family, region)?;
    let mut det_terms = Vec::new();
    let mut gaussian_quadratic = 0.0;
    for lt in &layout.terms {
        match family.orbits[lt.orbit].distribution {
            DisorderDistribution::Deterministic { value } => {
                det_terms.push(InteractionTerm::new(lt.subset, 1.0, value)?);
            }
            DisorderDistribution::Gaussian { sd } => {
                gaussian_quadratic += sd * sd; // λ = 1 per instantiated term
            }
            other => {
                return Err(Error::Unsupported(format!(
                    "annealed pressure needs gaussian or deterministic orbits, got {other:?}"
                )));
            }
        }
    }
    let det_h = Hamiltonian::new(layout.region.clone(), det_terms)?;
    let det_pressure = engine::log_partition(&det_h, beta)?.pressure_density;
    Ok(det_pressure + beta * beta * gaussian_quadratic / (2.0 * layout.region.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rademacher_bond_family() -> CouplingFamily {
        CouplingFamily::chain(DisorderDistribution::Rademacher)
    }

    #[test]
    fn deterministic_family_reduces_to_single_pressure() {
        let family = CouplingFamily::chain(DisorderDistribution::Deterministic { value: 1.0 });
        let region = Region::cube(1, 4).unwrap();
        let est = quenched_exact(&family, &region, 1.0).unwrap();
        assert!(est.exact);
        assert_eq!(est.std_error, 0.0);
        let h: Hamiltonian<f64> = model::instantiate(&family, &region, 0).unwrap();
        let direct = engine::log_partition(&h, 1.0).unwrap().pressure_density;
        assert_eq!(est.mean, direct);
    }

    #[test]
    fn single_rademacher_bond_matches_closed_form() {
        let family = rademacher_bond_family();
        let region = Region::cube(1, 2).unwrap();
        let est = quenched_exact(&family, &region, 1.0).unwrap();
        // both signs give the same Z since cosh is even
        assert_relative_eq!(est.mean, (4.0 * 1.0f64.cosh()).ln() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(est.mean, 0.9100376, epsilon = 1e-7);
    }

    #[test]
    fn beta_zero_quenched_pressure_is_ln_2() {
        let family = rademacher_bond_family();
        let region = Region::cube(1, 5).unwrap();
        let est = quenched_exact(&family, &region, 0.0).unwrap();
        assert_relative_eq!(est.mean, std::f64::consts::LN_2, epsilon = 1e-14);
    }

    #[test]
    fn mc_on_deterministic_family_has_zero_error() {
        let family = CouplingFamily::chain(DisorderDistribution::Deterministic { value: 1.0 });
        let region = Region::cube(1, 4).unwrap();
        let mc = quenched_mc(&family, &region, 1.0, 16, 3).unwrap();
        assert!(mc.estimate.std_error < 1e-12);
        let exact = quenched_exact(&family, &region, 1.0).unwrap();
        assert_relative_eq!(mc.estimate.mean, exact.mean, epsilon = 1e-14);
    }

    #[test]
    fn mc_agrees_with_exact_oracle() {
        // next-nearest bonds create loops, so the pressure genuinely varies
        // with the signs (a pure chain is gauge-equivalent to ferromagnetic)
        use crate::model::Orbit;
        let family = CouplingFamily::new(
            1,
            vec![
                Orbit {
                    sites: vec![vec![0], vec![1]],
                    distribution: DisorderDistribution::Rademacher,
                },
                Orbit {
                    sites: vec![vec![0], vec![2]],
                    distribution: DisorderDistribution::Rademacher,
                },
            ],
        )
        .unwrap();
        let region = Region::cube(1, 6).unwrap();
        let exact = quenched_exact(&family, &region, 1.0).unwrap();
        let mc = quenched_mc(&family, &region, 1.0, 10_000, 17).unwrap();
        assert!(mc.estimate.std_error > 1e-4);
        assert!((mc.estimate.mean - exact.mean).abs() <= 5.0 * mc.estimate.std_error);
    }

    #[test]
    fn mc_is_seed_deterministic_across_thread_counts() {
        let family = CouplingFamily::chain(DisorderDistribution::Gaussian { sd: 1.0 });
        let region = Region::cube(1, 5).unwrap();
        let run = || {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            pool.install(|| quenched_mc(&family, &region, 1.0, 500, 99).unwrap())
        };
        let single = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let multi = pool.install(|| quenched_mc(&family, &region, 1.0, 500, 99).unwrap());
        assert_eq!(single.estimate.mean.to_bits(), multi.estimate.mean.to_bits());
        assert_eq!(single.estimate.std_error.to_bits(), multi.estimate.std_error.to_bits());
    }

    #[test]
    fn annealed_closed_form_single_bond() {
        let family = CouplingFamily::chain(DisorderDistribution::Gaussian { sd: 1.0 });
        let region = Region::cube(1, 2).unwrap();
        let a = annealed_pressure_gaussian(&family, &region, 1.0).unwrap();
        assert_relative_eq!(a, std::f64::consts::LN_2 + 0.25, epsilon = 1e-14);
    }

    #[test]
    fn annealed_no_terms_is_ln_2() {
        let family = CouplingFamily::new(1, vec![]).unwrap();
        let region = Region::cube(1, 3).unwrap();
        let a = annealed_pressure_gaussian(&family, &region, 2.0).unwrap();
        assert_relative_eq!(a, std::f64::consts::LN_2, epsilon = 1e-14);
    }

    #[test]
    fn annealed_dominates_quenched() {
        let family = CouplingFamily::chain(DisorderDistribution::Gaussian { sd: 1.0 });
        let region = Region::cube(1, 6).unwrap();
        let mc = quenched_mc(&family, &region, 1.0, 4000, 5).unwrap();
        let a = annealed_pressure_gaussian(&family, &region, 1.0).unwrap();
        assert!(mc.estimate.mean <= a + 5.0 * mc.estimate.std_error);
    }

    #[test]
    fn unsupported_exact_disorder_is_rejected() {
        let family = CouplingFamily::chain(DisorderDistribution::Gaussian { sd: 1.0 });
        let region = Region::cube(1, 4).unwrap();
        assert!(matches!(
            quenched_exact(&family, &region, 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn truncated_dependent_ensemble_sums_back_to_underlying() {
        let region = Region::cube(1, 2).unwrap();
        let ens = ExactEnsemble::dependent_truncated(
            region,
            vec![(Subset(0b11), DisorderDistribution::Rademacher)],
            0.5,
        )
        .unwrap();
        assert!(!ens.is_independent());
        for (_, js) in &ens.outcomes {
            // J⁽¹⁾ + J⁽²⁾ equals the underlying ±1 draw; cutoff 0.5 puts all
            // mass in the tail part
            assert_eq!(js[0], 0.0);
            assert!(js[1] == 1.0 || js[1] == -1.0);
        }
    }
}
