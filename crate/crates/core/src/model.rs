//! Finite regions of Z^d, interaction terms, Hamiltonians, and
//! translation-invariant coupling families.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::disorder::DisorderDistribution;
use crate::scalar::Real;
use crate::{Error, Result};

/// A lattice site: an integer d-vector.
pub type Site = Vec<i64>;

/// A finite indexed set of sites in Z^d. The primary case is the cube
/// [1, N]^d enumerated in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    dimension: usize,
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
    box_side: Option<usize>,
}

impl Region {
    /// The box [1, side]^d, sites in row-major order (first coordinate slowest).
    pub fn cube(dimension: usize, side: usize) -> Result<Region> {
        if dimension == 0 || side == 0 {
            return Err(Error::InvalidParameter(
                "cube needs dimension ≥ 1 and side ≥ 1".into(),
            ));
        }
        let count = (side as u128).checked_pow(dimension as u32).ok_or_else(|| {
            Error::Capacity(format!("{side}^{dimension} sites overflows"))
        })?;
        if count > u32::MAX as u128 {
            return Err(Error::Capacity(format!("{side}^{dimension} sites is too many")));
        }
        let mut sites = Vec::with_capacity(count as usize);
        let mut current = vec![1i64; dimension];
        loop {
            sites.push(current.clone());
            // row-major increment: last coordinate fastest
            let mut k = dimension;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                current[k] += 1;
                if current[k] <= side as i64 {
                    break;
                }
                current[k] = 1;
                if k == 0 {
                    let region = Self::from_sites_internal(dimension, sites, Some(side))?;
                    return Ok(region);
                }
            }
        }
    }

    /// An arbitrary finite region from an explicit site list.
    pub fn from_sites(dimension: usize, sites: Vec<Site>) -> Result<Region> {
        Self::from_sites_internal(dimension, sites, None)
    }

    fn from_sites_internal(
        dimension: usize,
        sites: Vec<Site>,
        box_side: Option<usize>,
    ) -> Result<Region> {
        if sites.is_empty() {
            return Err(Error::InvalidParameter("region must contain at least one site".into()));
        }
        let mut index = HashMap::with_capacity(sites.len());
        for (i, s) in sites.iter().enumerate() {
            if s.len() != dimension {
                return Err(Error::InvalidParameter(format!(
                    "site {s:?} has wrong dimension (expected {dimension})"
                )));
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate site {s:?}")));
            }
        }
        Ok(Region { dimension, sites, index, box_side })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a region holds at least one site by construction
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site_index(&self, site: &[i64]) -> Option<usize> {
        self.index.get(site).copied()
    }

    /// Side length when this region was built as a cube.
    pub fn box_side(&self) -> Option<usize> {
        self.box_side
    }
}

/// A subset of region sites as a bitmask over site indices. Capacity is 32
/// sites, the engine-wide limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subset(pub u32);

impl Subset {
    pub fn from_indices(indices: &[usize]) -> Result<Subset> {
        let mut bits = 0u32;
        for &i in indices {
            if i >= 32 {
                return Err(Error::Capacity(format!("site index {i} exceeds bitmask width 32")));
            }
            bits |= 1 << i;
        }
        Ok(Subset(bits))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn min_index(self) -> u32 {
        self.0.trailing_zeros()
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32usize).filter(move |i| bits & (1 << i) != 0)
    }

    /// σ_X for the configuration bitmask (set bit = spin −1).
    pub fn sign_in(self, config: u32) -> i8 {
        if (self.0 & config).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    fn within(self, n_sites: usize) -> bool {
        n_sites >= 32 || self.0 >> n_sites == 0
    }
}

/// One term λ_X · J_X · σ_X of a Hamiltonian. The multiplier λ and the
/// realized coupling J are kept separate so that differentiating in λ stays
/// possible downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionTerm<R: Real> {
    subset: Subset,
    multiplier: R,
    coupling: R,
}

impl<R: Real> InteractionTerm<R> {
    pub fn new(subset: Subset, multiplier: R, coupling: R) -> Result<Self> {
        if subset.is_empty() {
            return Err(Error::InvalidParameter("interaction subset must be nonempty".into()));
        }
        if !(multiplier >= R::zero()) || !multiplier.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "multiplier {multiplier} must be finite and nonnegative"
            )));
        }
        if !coupling.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling {coupling} must be finite")));
        }
        Ok(InteractionTerm { subset, multiplier, coupling })
    }

    pub fn subset(&self) -> Subset {
        self.subset
    }

    pub fn multiplier(&self) -> R {
        self.multiplier
    }

    pub fn coupling(&self) -> R {
        self.coupling
    }

    /// The effective coupling λ·J.
    pub fn effective(&self) -> R {
        self.multiplier * self.coupling
    }

    pub fn with_multiplier(&self, multiplier: R) -> Result<Self> {
        Self::new(self.subset, multiplier, self.coupling)
    }

    pub fn with_coupling(&self, coupling: R) -> Result<Self> {
        Self::new(self.subset, self.multiplier, coupling)
    }
}

/// A region together with an ordered term list. The ordering realizes the
/// tuples (X₁, …, X_N) and their prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian<R: Real> {
    region: Region,
    terms: Vec<InteractionTerm<R>>,
}

impl<R: Real> Hamiltonian<R> {
    pub fn new(region: Region, terms: Vec<InteractionTerm<R>>) -> Result<Self> {
        for t in &terms {
            if !t.subset.within(region.len()) {
                return Err(Error::InvalidParameter(format!(
                    "term subset {:?} has bits outside the region ({} sites)",
                    t.subset,
                    region.len()
                )));
            }
        }
        Ok(Hamiltonian { region, terms })
    }

    pub fn free(region: Region) -> Self {
        Hamiltonian { region, terms: Vec::new() }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn terms(&self) -> &[InteractionTerm<R>] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// The Hamiltonian restricted to the first `n` terms, on the same region.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.terms.len() {
            return Err(Error::InvalidParameter(format!(
                "prefix length {n} exceeds term count {}",
                self.terms.len()
            )));
        }
        Ok(Hamiltonian { region: self.region.clone(), terms: self.terms[..n].to_vec() })
    }

    /// −H(σ) = Σ λ_n J_n σ_{X_n} for a configuration bitmask.
    pub fn interaction_sum(&self, config: u32) -> R {
        let mut total = R::zero();
        for t in &self.terms {
            let s = R::of(t.subset.sign_in(config) as f64);
            total = total + t.effective() * s;
        }
        total
    }

    pub fn map_terms<F>(&self, f: F) -> Result<Self>
    where
        F: FnMut(usize, &InteractionTerm<R>) -> Result<InteractionTerm<R>>,
    {
        let mut f = f;
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| f(i, t))
            .collect::<Result<Vec<_>>>()?;
        Hamiltonian::new(self.region.clone(), terms)
    }
}

/// One translation orbit: a representative subset containing the origin and
/// the coupling law shared by all its translates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub sites: Vec<Site>,
    pub distribution: DisorderDistribution,
}

impl Orbit {
    fn canonical_key(&self) -> Vec<Site> {
        // translate the lexicographically smallest site to the origin
        let min = self.sites.iter().min().expect("orbit is nonempty").clone();
        let mut shifted: Vec<Site> = self
            .sites
            .iter()
            .map(|s| s.iter().zip(&min).map(|(a, b)| a - b).collect())
            .collect();
        shifted.sort();
        shifted
    }
}

/// Translation-invariant coupling specification: distributions attached to
/// representative subsets containing the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingFamily {
    pub dimension: usize,
    pub orbits: Vec<Orbit>,
}

impl CouplingFamily {
    pub fn new(dimension: usize, orbits: Vec<Orbit>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let origin = vec![0i64; dimension];
        let mut keys: Vec<Vec<Site>> = Vec::new();
        for orbit in &orbits {
            if orbit.sites.is_empty() {
                return Err(Error::InvalidParameter("orbit representative must be nonempty".into()));
            }
            for s in &orbit.sites {
                if s.len() != dimension {
                    return Err(Error::InvalidParameter(format!(
                        "orbit site {s:?} has wrong dimension (expected {dimension})"
                    )));
                }
            }
            let mut dedup = orbit.sites.clone();
            dedup.sort();
            dedup.dedup();
            if dedup.len() != orbit.sites.len() {
                return Err(Error::InvalidParameter("orbit representative has duplicate sites".into()));
            }
            if !orbit.sites.contains(&origin) {
                return Err(Error::InvalidParameter(format!(
                    "orbit representative {:?} does not contain the origin",
                    orbit.sites
                )));
            }
            orbit.distribution.validate()?;
            let key = orbit.canonical_key();
            if keys.contains(&key) {
                return Err(Error::InvalidParameter(format!(
                    "orbit representative {:?} repeats an existing translation orbit",
                    orbit.sites
                )));
            }
            keys.push(key);
        }
        Ok(CouplingFamily { dimension, orbits })
    }

    /// Nearest-neighbor family in one dimension with the given law on bonds.
    pub fn chain(distribution: DisorderDistribution) -> Self {
        CouplingFamily::new(
            1,
            vec![Orbit { sites: vec![vec![0], vec![1]], distribution }],
        )
        .expect("the chain family is always valid")
    }

    /// Maximum coordinate extent of any representative.
    pub fn range(&self) -> i64 {
        let mut range = 0;
        for orbit in &self.orbits {
            for k in 0..self.dimension {
                let lo = orbit.sites.iter().map(|s| s[k]).min().unwrap_or(0);
                let hi = orbit.sites.iter().map(|s| s[k]).max().unwrap_or(0);
                range = range.max(hi - lo);
            }
        }
        range
    }

    pub fn is_deterministic(&self) -> bool {
        self.orbits.iter().all(|o| !o.distribution.is_random())
    }
}

/// A term position produced by translating a family onto a region: the
/// realized subset and the orbit it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutTerm {
    pub subset: Subset,
    pub orbit: usize,
}

/// The deterministic part of instantiation: every translate of every orbit
/// representative that fits in the box, in canonical order.
#[derive(Debug, Clone)]
pub struct TermLayout {
    pub region: Region,
    pub terms: Vec<LayoutTerm>,
}

/// Enumerate term positions for `family` on a box region, sorted by
/// (minimum site index, subset size, bitmask). The fixed canonical order is
/// what makes prefixes and seeded draws reproducible.
pub fn layout(family: &CouplingFamily, region: &Region) -> Result<TermLayout> {
    let side = region.box_side().ok_or_else(|| {
        Error::UnsupportedRegion("coupling families instantiate on box regions only".into())
    })? as i64;
    if family.dimension != region.dimension() {
        return Err(Error::InvalidParameter(format!(
            "family dimension {} does not match region dimension {}",
            family.dimension,
            region.dimension()
        )));
    }
    if family.range() > side {
        return Err(Error::InvalidParameter(format!(
            "family range {} exceeds box side {side}",
            family.range()
        )));
    }
    let d = family.dimension;
    let mut terms = Vec::new();
    for (orbit_idx, orbit) in family.orbits.iter().enumerate() {
        // per-coordinate translation window keeping every site in [1, side]
        let mut lo = vec![0i64; d];
        let mut hi = vec![0i64; d];
        for k in 0..d {
            let min_c = orbit.sites.iter().map(|s| s[k]).min().unwrap();
            let max_c = orbit.sites.iter().map(|s| s[k]).max().unwrap();
            lo[k] = 1 - min_c;
            hi[k] = side - max_c;
        }
        if (0..d).any(|k| lo[k] > hi[k]) {
            continue;
        }
        let mut shift = lo.clone();
        'translates: loop {
            let mut indices = Vec::with_capacity(orbit.sites.len());
            for s in &orbit.sites {
                let translated: Site = s.iter().zip(&shift).map(|(a, b)| a + b).collect();
                let idx = region.site_index(&translated).ok_or_else(|| {
                    Error::InvalidParameter(format!("translated site {translated:?} missing from region"))
                })?;
                indices.push(idx);
            }
            terms.push(LayoutTerm { subset: Subset::from_indices(&indices)?, orbit: orbit_idx });
            // odometer over the translation window
            let mut k = d;
            loop {
                if k == 0 {
                    break 'translates;
                }
                k -= 1;
                shift[k] += 1;
                if shift[k] <= hi[k] {
                    break;
                }
                shift[k] = lo[k];
                if k == 0 {
                    break 'translates;
                }
            }
        }
    }
    terms.sort_by_key(|t| (t.subset.min_index(), t.subset.len(), t.subset.0));
    Ok(TermLayout { region: region.clone(), terms })
}

/// Instantiate a concrete Hamiltonian: deterministic couplings are copied
/// verbatim, random couplings are drawn independently per translate in
/// canonical term order.
pub fn instantiate_with_rng<R: Real, G: Rng + ?Sized>(
    family: &CouplingFamily,
    region: &Region,
    rng: &mut G,
) -> Result<Hamiltonian<R>> {
    let layout = layout(family, region)?;
    hamiltonian_from_layout(family, &layout, rng)
}

pub fn hamiltonian_from_layout<R: Real, G: Rng + ?Sized>(
    family: &CouplingFamily,
    layout: &TermLayout,
    rng: &mut G,
) -> Result<Hamiltonian<R>> {
    let terms = layout
        .terms
        .iter()
        .map(|lt| {
            let j = family.orbits[lt.orbit].distribution.sample(rng);
            InteractionTerm::new(lt.subset, R::one(), R::of(j))
        })
        .collect::<Result<Vec<_>>>()?;
    Hamiltonian::new(layout.region.clone(), terms)
}

/// Seeded instantiation; stream 0 of the counter-based generator.
pub fn instantiate<R: Real>(
    family: &CouplingFamily,
    region: &Region,
    rng_seed: u64,
) -> Result<Hamiltonian<R>> {
    let mut rng = crate::rng::stream(rng_seed, 0);
    instantiate_with_rng(family, region, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderDistribution;

    fn det(v: f64) -> DisorderDistribution {
        DisorderDistribution::Deterministic { value: v }
    }

    #[test]
    fn cube_enumerates_row_major() {
        let r = Region::cube(2, 2).unwrap();
        assert_eq!(
            r.sites(),
            &[vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]
        );
        assert_eq!(r.site_index(&[2, 1]), Some(2));
        assert_eq!(r.box_side(), Some(2));
    }

    #[test]
    fn chain_family_on_four_sites_gives_three_bonds() {
        let family = CouplingFamily::chain(det(1.0));
        let region = Region::cube(1, 4).unwrap();
        let h: Hamiltonian<f64> = instantiate(&family, &region, 0).unwrap();
        assert_eq!(h.n_terms(), 3);
        let subsets: Vec<u32> = h.terms().iter().map(|t| t.subset().0).collect();
        assert_eq!(subsets, vec![0b0011, 0b0110, 0b1100]);
        assert!(h.terms().iter().all(|t| t.coupling() == 1.0));
    }

    #[test]
    fn empty_family_yields_zero_terms() {
        let family = CouplingFamily::new(1, vec![]).unwrap();
        let region = Region::cube(1, 5).unwrap();
        let h: Hamiltonian<f64> = instantiate(&family, &region, 0).unwrap();
        assert_eq!(h.n_terms(), 0);
    }

    #[test]
    fn instantiation_is_deterministic_in_the_seed() {
        let family = CouplingFamily::chain(DisorderDistribution::Gaussian { sd: 1.0 });
        let region = Region::cube(1, 6).unwrap();
        let a: Hamiltonian<f64> = instantiate(&family, &region, 42).unwrap();
        let b: Hamiltonian<f64> = instantiate(&family, &region, 42).unwrap();
        assert_eq!(a.terms(), b.terms());
        let c: Hamiltonian<f64> = instantiate(&family, &region, 43).unwrap();
        assert_ne!(a.terms(), c.terms());
    }

    #[test]
    fn term_counts_match_translation_counting() {
        let chain = CouplingFamily::chain(det(1.0));
        for n in 2..=8 {
            let region = Region::cube(1, n).unwrap();
            let h: Hamiltonian<f64> = instantiate(&chain, &region, 0).unwrap();
            assert_eq!(h.n_terms(), n - 1);
        }
        let nn2d = CouplingFamily::new(
            2,
            vec![
                Orbit { sites: vec![vec![0, 0], vec![1, 0]], distribution: det(1.0) },
                Orbit { sites: vec![vec![0, 0], vec![0, 1]], distribution: det(1.0) },
            ],
        )
        .unwrap();
        for n in 2..=5 {
            let region = Region::cube(2, n).unwrap();
            let h: Hamiltonian<f64> = instantiate(&nn2d, &region, 0).unwrap();
            assert_eq!(h.n_terms(), 2 * n * (n - 1));
        }
    }

    #[test]
    fn translation_consistency_at_interior_sites() {
        // every interior site of a chain touches the same multiset of orbits
        let family = CouplingFamily::chain(DisorderDistribution::Rademacher);
        let region = Region::cube(1, 8).unwrap();
        let lay = layout(&family, &region).unwrap();
        let incident = |site: usize| -> Vec<usize> {
            let mut v: Vec<usize> = lay
                .terms
                .iter()
                .filter(|t| t.subset.contains(site))
                .map(|t| t.orbit)
                .collect();
            v.sort();
            v
        };
        for site in 1..7 {
            assert_eq!(incident(site), incident(1));
        }
    }

    #[test]
    fn non_box_region_is_rejected() {
        let family = CouplingFamily::chain(det(1.0));
        let region = Region::from_sites(1, vec![vec![1], vec![2], vec![5]]).unwrap();
        let err = instantiate::<f64>(&family, &region, 0).unwrap_err();
        assert!(matches!(err, Error::UnsupportedRegion(_)));
    }

    #[test]
    fn prefix_contract() {
        let family = CouplingFamily::chain(det(1.0));
        let region = Region::cube(1, 4).unwrap();
        let h: Hamiltonian<f64> = instantiate(&family, &region, 0).unwrap();
        assert_eq!(h.prefix(0).unwrap().n_terms(), 0);
        assert_eq!(h.prefix(3).unwrap(), h);
        let p2 = h.prefix(2).unwrap();
        assert_eq!(
            p2.terms().iter().map(|t| t.subset().0).collect::<Vec<_>>(),
            vec![0b0011, 0b0110]
        );
        assert!(h.prefix(4).is_err());
    }

    #[test]
    fn family_invariants_enforced() {
        // representative must contain the origin
        assert!(CouplingFamily::new(
            1,
            vec![Orbit { sites: vec![vec![1], vec![2]], distribution: det(1.0) }]
        )
        .is_err());
        // two representatives of the same translation orbit are rejected
        assert!(CouplingFamily::new(
            1,
            vec![
                Orbit { sites: vec![vec![0], vec![1]], distribution: det(1.0) },
                Orbit { sites: vec![vec![-1], vec![0]], distribution: det(2.0) },
            ]
        )
        .is_err());
    }

    #[test]
    fn term_invariants_enforced() {
        assert!(InteractionTerm::<f64>::new(Subset(0), 1.0, 1.0).is_err());
        assert!(InteractionTerm::<f64>::new(Subset(1), -0.5, 1.0).is_err());
        assert!(InteractionTerm::<f64>::new(Subset(1), 1.0, f64::NAN).is_err());
    }
}
