//! Randomized structural properties spanning the circuit, graph,
//! percolation, and permanent modules.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use percolo::circuit::{build_unitary, unitarity_residual, Circuit, InputSpec};
use percolo::graph::{lightcone_bipartite, max_degree, Arch};
use percolo::oracle::naive_permanent;
use percolo::percolation::{connected_components, remove_vertices};
use percolo::permanent::permanent;
use percolo::sampler::exact_component_distribution;
use percolo::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_circuit(modes: usize, depth: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Circuit::random(modes, depth, &mut rng)
}

fn spaced_inputs(modes: usize) -> InputSpec {
    InputSpec::single_photons(&(0..modes).step_by(2).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn built_unitaries_are_unitary(modes in 2usize..10, depth in 0usize..5, seed in any::<u64>()) {
        let c = random_circuit(modes, depth, seed);
        let u = build_unitary(&c).unwrap();
        prop_assert!(unitarity_residual(&u) <= 1e-10);
    }

    #[test]
    fn lightcone_misses_only_exact_zeros(modes in 2usize..9, depth in 0usize..4, seed in any::<u64>()) {
        // every matrix entry outside the lightcone graph's edges is an exact
        // structural zero of the unitary
        let c = random_circuit(modes, depth, seed);
        let input = spaced_inputs(modes);
        let g = lightcone_bipartite(&c, &input).unwrap();
        let u = build_unitary(&c).unwrap();
        for (slot, &a) in g.a_vertices().iter().enumerate() {
            let nbrs: BTreeSet<usize> = g.neighbors(slot).iter().copied().collect();
            for w in 0..modes {
                if !nbrs.contains(&w) {
                    prop_assert_eq!(u[(a, w)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn lightcone_degree_bounded_by_depth(modes in 2usize..9, depth in 0usize..4, seed in any::<u64>()) {
        let c = random_circuit(modes, depth, seed);
        let g = lightcone_bipartite(&c, &spaced_inputs(modes)).unwrap();
        prop_assert!(max_degree(&g) <= 1 << depth);
        prop_assert_eq!(g.delta(), max_degree(&g));
    }

    #[test]
    fn generated_graphs_have_exact_input_degree(
        n in 1usize..40,
        delta in 1usize..9,
        seed in any::<u64>(),
        nonlocal in any::<bool>(),
    ) {
        let arch = if nonlocal { Arch::Nonlocal } else { Arch::OneD };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = arch.generate(n, delta, &mut rng).unwrap();
        prop_assert_eq!(g.num_a(), n);
        prop_assert_eq!(g.m_total(), 8 * n);
        for slot in 0..n {
            prop_assert_eq!(g.neighbors(slot).len(), delta);
            prop_assert!(g.neighbors(slot).iter().all(|&b| b < 8 * n));
        }
        prop_assert!(g.delta() >= delta);
    }

    #[test]
    fn components_partition_kept_vertices(
        n in 1usize..30,
        delta in 1usize..6,
        eta in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Arch::Nonlocal.generate(n, delta, &mut rng).unwrap();
        let mask = remove_vertices(&g, eta, &mut rng);
        let comps = connected_components(&g, &mask);

        // kept slots exactly partitioned, removed slots exactly complement
        let mut seen = BTreeSet::new();
        for comp in &comps.components {
            for &slot in &comp.a_subset {
                prop_assert!(mask.kept()[slot]);
                prop_assert!(seen.insert(slot), "slot {} in two components", slot);
            }
        }
        let removed: BTreeSet<usize> = comps.removed.iter().copied().collect();
        for slot in 0..n {
            prop_assert_eq!(seen.contains(&slot) ^ removed.contains(&slot), true);
        }

        // B-sides are disjoint and no kept vertex reaches outside its own
        // component's B-set (otherwise two components would be connected)
        let mut b_seen: BTreeSet<usize> = BTreeSet::new();
        for comp in &comps.components {
            let b_set: BTreeSet<usize> = comp.b_subset.iter().copied().collect();
            for &b in &b_set {
                prop_assert!(b_seen.insert(b), "output {} in two components", b);
            }
            for &slot in &comp.a_subset {
                for nb in g.neighbors(slot) {
                    prop_assert!(b_set.contains(nb));
                }
            }
        }
        prop_assert_eq!(
            comps.max_size,
            comps.sizes().into_iter().max().unwrap_or(0)
        );
    }

    #[test]
    fn ryser_matches_naive_permanent(size in 2usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(size, size, |_, _| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let fast = permanent(&m).unwrap();
        let slow = naive_permanent(&m).unwrap();
        prop_assert!((fast - slow).norm() <= 1e-9 * slow.norm().max(1.0));
    }

    #[test]
    fn exact_distributions_are_normalized(
        modes in 2usize..5,
        depth in 1usize..3,
        photons in 1usize..4,
        seed in any::<u64>(),
    ) {
        let c = random_circuit(modes, depth, seed);
        let u = build_unitary(&c).unwrap();
        let mut occ = vec![0usize; modes];
        for k in 0..photons {
            occ[k % modes] += 1;
        }
        let dist = exact_component_distribution(&u, &occ).unwrap();
        let total: f64 = dist.values().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(dist.values().all(|&p| p >= 0.0));
    }
}
