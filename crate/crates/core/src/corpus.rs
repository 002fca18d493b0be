//! Seeded corpora of random test instances. Every generator is a pure
//! function of its seed, so the verification suites and the command line
//! exercise identical instances.

use rand::Rng;

use crate::disorder::DisorderDistribution;
use crate::model::{CouplingFamily, Hamiltonian, InteractionTerm, Orbit, Region, Subset};
use crate::quenched::ExactEnsemble;
use crate::rng;
use crate::Result;

/// Bundled nearest-neighbor chain with unit ferromagnetic bonds.
pub fn ferro_chain() -> CouplingFamily {
    CouplingFamily::chain(DisorderDistribution::Deterministic { value: 1.0 })
}

/// Bundled nearest-neighbor chain with standard Gaussian bonds.
pub fn gaussian_chain() -> CouplingFamily {
    CouplingFamily::chain(DisorderDistribution::Gaussian { sd: 1.0 })
}

/// Bundled nearest-neighbor chain with ±1 bonds.
pub fn rademacher_chain() -> CouplingFamily {
    CouplingFamily::chain(DisorderDistribution::Rademacher)
}

/// Bundled heavy-tailed chain: symmetric Pareto bonds with tail index 3/2,
/// finite mean, infinite variance.
pub fn pareto_chain() -> CouplingFamily {
    CouplingFamily::chain(DisorderDistribution::SymmetricPareto { alpha: 1.5, scale: 1.0 })
}

fn random_subset<G: Rng + ?Sized>(rng: &mut G, n_sites: usize, max_size: usize) -> Subset {
    let size = rng.gen_range(1..=max_size.min(n_sites));
    let mut indices: Vec<usize> = Vec::with_capacity(size);
    while indices.len() < size {
        let i = rng.gen_range(0..n_sites);
        if !indices.contains(&i) {
            indices.push(i);
        }
    }
    Subset::from_indices(&indices).expect("indices fit the bitmask")
}

/// A random multi-spin Hamiltonian with standard Gaussian couplings:
/// 2..=max_sites sites, 1..=max_terms terms, subsets of up to 3 sites.
pub fn gaussian_instance(seed: u64, max_sites: usize, max_terms: usize) -> Result<Hamiltonian<f64>> {
    let mut rng = rng::stream(seed, 0);
    let n_sites = rng.gen_range(2..=max_sites);
    let n_terms = rng.gen_range(1..=max_terms);
    let region = Region::cube(1, n_sites)?;
    let terms = (0..n_terms)
        .map(|_| {
            let subset = random_subset(&mut rng, n_sites, 3);
            let j: f64 = rng.sample(rand_distr::StandardNormal);
            InteractionTerm::new(subset, 1.0, j)
        })
        .collect::<Result<Vec<_>>>()?;
    Hamiltonian::new(region, terms)
}

/// Like `gaussian_instance` but with couplings uniform on [0, 2], so every
/// term is ferromagnetic.
pub fn nonnegative_instance(
    seed: u64,
    max_sites: usize,
    max_terms: usize,
) -> Result<Hamiltonian<f64>> {
    let mut rng = rng::stream(seed, 0);
    let n_sites = rng.gen_range(2..=max_sites);
    let n_terms = rng.gen_range(1..=max_terms);
    let region = Region::cube(1, n_sites)?;
    let terms = (0..n_terms)
        .map(|_| {
            let subset = random_subset(&mut rng, n_sites, 3);
            let j: f64 = rng.gen_range(0.0..2.0);
            InteractionTerm::new(subset, 1.0, j)
        })
        .collect::<Result<Vec<_>>>()?;
    Hamiltonian::new(region, terms)
}

/// An independent-product ensemble of ±1 couplings on random subsets, with
/// random nonnegative multipliers.
pub fn rademacher_ensemble(seed: u64, max_sites: usize, max_terms: usize) -> Result<ExactEnsemble> {
    let mut rng = rng::stream(seed, 0);
    let n_sites = rng.gen_range(2..=max_sites);
    let n_terms = rng.gen_range(1..=max_terms);
    let region = Region::cube(1, n_sites)?;
    let terms = (0..n_terms)
        .map(|_| {
            let subset = random_subset(&mut rng, n_sites, 3);
            let lambda = rng.gen_range(0.25..1.5);
            (subset, lambda, DisorderDistribution::Rademacher)
        })
        .collect();
    ExactEnsemble::independent(region, terms)
}

/// A dependent ensemble built by the centered truncation of ±1 couplings.
/// The cutoff alternates below and above the support, so both the trivial
/// and the fully-truncated split appear in the corpus.
pub fn truncated_ensemble(seed: u64, max_sites: usize, max_terms: usize) -> Result<ExactEnsemble> {
    let mut rng = rng::stream(seed, 0);
    let n_sites = rng.gen_range(2..=max_sites);
    let n_base = rng.gen_range(1..=max_terms / 2);
    let r_cutoff = if rng.gen_bool(0.5) { 0.5 } else { 2.0 };
    let region = Region::cube(1, n_sites)?;
    let base = (0..n_base)
        .map(|_| (random_subset(&mut rng, n_sites, 3), DisorderDistribution::Rademacher))
        .collect();
    ExactEnsemble::dependent_truncated(region, base, r_cutoff)
}

/// A small translation-invariant family on a 1D box with finitely-supported
/// disorder, sized for exact disorder enumeration. Returns the family, the
/// box, and the index of an orbit with random couplings.
pub fn exact_disorder_family(seed: u64) -> Result<(CouplingFamily, Region, usize)> {
    let mut rng = rng::stream(seed, 0);
    let side = rng.gen_range(3..=6usize);
    let representatives: [&[i64]; 4] = [&[0, 1], &[0, 2], &[0, 1, 2], &[0]];
    let rep = representatives[rng.gen_range(0..representatives.len())];
    let mut orbits = vec![Orbit {
        sites: rep.iter().map(|&c| vec![c]).collect(),
        distribution: DisorderDistribution::Rademacher,
    }];
    // optionally a deterministic field on top of the random orbit
    if rep != [0] && rng.gen_bool(0.5) {
        orbits.push(Orbit {
            sites: vec![vec![0]],
            distribution: DisorderDistribution::Deterministic { value: rng.gen_range(0.1..0.8) },
        });
    }
    let family = CouplingFamily::new(1, orbits)?;
    let region = Region::cube(1, side)?;
    Ok((family, region, 0))
}
