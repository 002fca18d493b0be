//! Property-based invariants of the enumeration engine and the disorder
//! machinery on randomized instances.

use proptest::prelude::*;

use quenchlab_core::disorder::{truncate, DisorderDistribution};
use quenchlab_core::model::{Hamiltonian, InteractionTerm, Region, Subset};
use quenchlab_core::{corpus, engine, model, rng};

fn arb_hamiltonian() -> impl Strategy<Value = (Hamiltonian<f64>, f64)> {
    (2usize..=16, 1usize..=10, 0u64..1 << 32, 0.0f64..3.0).prop_map(
        |(n_sites, n_terms, seed, beta)| {
            use rand::Rng;
            let mut rng = rng::stream(seed, 0);
            let region = Region::cube(1, n_sites).unwrap();
            let terms = (0..n_terms)
                .map(|_| {
                    let size = rng.gen_range(1..=3.min(n_sites));
                    let mut indices = Vec::new();
                    while indices.len() < size {
                        let i = rng.gen_range(0..n_sites);
                        if !indices.contains(&i) {
                            indices.push(i);
                        }
                    }
                    let j: f64 = rng.sample(rand_distr::StandardNormal);
                    InteractionTerm::new(Subset::from_indices(&indices).unwrap(), 1.0, j).unwrap()
                })
                .collect();
            (Hamiltonian::new(region, terms).unwrap(), beta)
        },
    )
}

fn arb_distribution() -> impl Strategy<Value = DisorderDistribution> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(|value| DisorderDistribution::Deterministic { value }),
        Just(DisorderDistribution::Rademacher),
        (0.1f64..3.0).prop_map(|sd| DisorderDistribution::Gaussian { sd }),
        (0.1f64..3.0).prop_map(|half_width| DisorderDistribution::Uniform { half_width }),
        ((1.1f64..3.0), (0.1f64..2.0))
            .prop_map(|(alpha, scale)| DisorderDistribution::SymmetricPareto { alpha, scale }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gray_walk_matches_naive_enumeration((h, beta) in arb_hamiltonian()) {
        let fast = engine::log_partition(&h, beta).unwrap().log_partition;
        let slow = engine::log_partition_naive(&h, beta).unwrap().log_partition;
        let scale = fast.abs().max(1.0);
        prop_assert!((fast - slow).abs() / scale <= 1e-12);
    }

    #[test]
    fn expectations_stay_in_unit_interval((h, beta) in arb_hamiltonian()) {
        for t in h.terms() {
            let e = engine::gibbs_expectation(&h, beta, t.subset()).unwrap();
            prop_assert!((-1.0..=1.0).contains(&e));
        }
    }

    #[test]
    fn beta_zero_pressure_is_ln_2((h, _) in arb_hamiltonian()) {
        let p = engine::log_partition(&h, 0.0).unwrap().pressure_density;
        prop_assert!((p - std::f64::consts::LN_2).abs() <= 1e-13);
    }

    #[test]
    fn ratio_identity_on_random_instances((h, beta) in arb_hamiltonian()) {
        for n in 0..h.n_terms() {
            let prefix = h.prefix(n).unwrap();
            let log_ratio =
                engine::log_partition_ratio(&prefix, &h.terms()[n], beta).unwrap();
            let quotient =
                engine::log_partition(&h.prefix(n + 1).unwrap(), beta).unwrap().log_partition
                    - engine::log_partition(&prefix, beta).unwrap().log_partition;
            prop_assert!((log_ratio - quotient).abs() <= 1e-11 * quotient.abs().max(1.0));
        }
    }

    #[test]
    fn truncation_split_reassembles_exactly(
        dist in arb_distribution(),
        r in 0.1f64..10.0,
        seed in 0u64..1 << 32,
    ) {
        use rand::Rng;
        let pair = truncate(dist, r).unwrap();
        let mut rng = rng::stream(seed, 0);
        for _ in 0..50 {
            let j: f64 = rng.sample(rand::distributions::Uniform::new(-20.0, 20.0));
            let (j1, j2) = pair.split(j);
            prop_assert_eq!((j1 + j2).to_bits(), j.to_bits());
        }
    }

    #[test]
    fn instantiation_is_seed_deterministic(seed in 0u64..1 << 32) {
        let family = corpus::gaussian_chain();
        let region = Region::cube(1, 5).unwrap();
        let a: Hamiltonian<f64> = model::instantiate(&family, &region, seed).unwrap();
        let b: Hamiltonian<f64> = model::instantiate(&family, &region, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
