use proptest::prelude::*;
use xifv_core::coalescent::{simulate_jump_chain, simulate_poisson_construction};
use xifv_core::combinatorics::{bell, enumerate_partitions, stirling2, Partition};
use xifv_core::duality::{
    generator_integral_form, generator_partition_form, simulate_function_dual, simulate_wf_jump, GeneratorTerms, MomentFunction,
};
use xifv_core::lookdown::{iid_initial, run_coupled, simulate_lookdown, trace_ancestry, MutationModel};
use xifv_core::rates::{block_counting_rates, block_counting_rates_power_sums};
use xifv_core::simplex::XiSpec;

fn atoms() -> impl Strategy<Value = XiSpec> {
    let atom = (0.05f64..1.0, proptest::collection::vec(0.01f64..1.0, 1..4)).prop_map(|(w, m)| {
        let total: f64 = m.iter().sum::<f64>() * 1.2;
        (w, m.into_iter().map(|x| x / total).collect::<Vec<_>>())
    });
    (0.0f64..1.0, proptest::collection::vec(atom, 1..3)).prop_map(|(a, atoms)| XiSpec::finite_atoms(a, atoms).unwrap())
}

fn frequencies(k: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, k).prop_filter_map("nonzero", |v| {
        let s: f64 = v.iter().sum();
        (s > 1e-3).then(|| v.iter().map(|x| x / s).collect())
    })
}

#[test]
fn partition_counts() {
    for n in 1..=8 {
        let all = enumerate_partitions(n).unwrap();
        assert_eq!(all.len() as u128, bell(n));
        assert_eq!((1..=n).map(|p| stirling2(n, p)).sum::<u128>(), bell(n));
        for p in &all {
            assert_eq!(&Partition::from_rgs(&p.rgs()).unwrap(), p);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn block_rates_agree_across_methods(xi in atoms(), n in 2usize..8) {
        let a = block_counting_rates(&xi, n).unwrap();
        let b = block_counting_rates_power_sums(&xi, n).unwrap();
        for k in 1..n {
            prop_assert!((a.rate(k) - b.rate(k)).abs() <= 1e-12 * (1.0 + a.rate(k)));
            prop_assert!(a.rate(k) >= 0.0);
        }
    }

    #[test]
    fn generator_forms_agree(xi in atoms(), mu in frequencies(3), seed in any::<u64>(), n in 1usize..4) {
        let mut s = seed;
        let f = MomentFunction::from_fn(n, 3, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        }).unwrap();
        let m = MutationModel::uniform_flip(0.3, 3).unwrap();
        for terms in [GeneratorTerms::multiple_mergers(), GeneratorTerms::full(Some(m))] {
            let a = generator_integral_form(&xi, &f, &mu, &terms).unwrap();
            let b = generator_partition_form(&xi, &f, &mu, &terms).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn coalescent_paths_coarsen(xi in atoms(), n in 1usize..9, seed in any::<u64>()) {
        let jc = simulate_jump_chain(&xi, n, f64::INFINITY, seed).unwrap();
        let (pc, _) = simulate_poisson_construction(&xi, n, f64::INFINITY, seed).unwrap();
        for path in [&jc, &pc] {
            prop_assert_eq!(path.current().num_blocks(), 1);
            for w in path.states().windows(2) {
                prop_assert!(w[1].is_coarsening_of(&w[0]));
                prop_assert!(w[1].num_blocks() < w[0].num_blocks());
            }
            prop_assert!(path.times().windows(2).all(|w| w[0] < w[1]));
        }
        prop_assert_eq!(simulate_jump_chain(&xi, n, f64::INFINITY, seed).unwrap(), jc);
    }

    #[test]
    fn coupling_identity(xi in atoms(), seed in any::<u64>(), levels in 2usize..25) {
        let m = MutationModel::uniform_flip(0.4, 2).unwrap();
        let run = run_coupled(&xi, &m, iid_initial(levels, &[0.5, 0.5], seed).unwrap(), 2.0, seed).unwrap();
        prop_assert!(run.identity_holds());
        prop_assert!(run.empirical_measures_agree());
    }

    #[test]
    fn lookdown_nests_in_levels(xi in atoms(), seed in any::<u64>(), l in 2usize..10, extra in 1usize..10) {
        let m = MutationModel::uniform_flip(0.7, 3).unwrap();
        let small = simulate_lookdown(&xi, &m, iid_initial(l, &[0.2, 0.3, 0.5], seed).unwrap(), 1.5, seed).unwrap();
        let big = simulate_lookdown(&xi, &m, iid_initial(l + extra, &[0.2, 0.3, 0.5], seed).unwrap(), 1.5, seed).unwrap();
        prop_assert_eq!(&small.final_state.types[..], &big.final_state.types[..l]);
        let trace = trace_ancestry(&big.log, 1.5, l + extra).unwrap();
        prop_assert!(trace.respects_level_bound());
    }

    #[test]
    fn wf_paths_absorb(y0 in 0.0f64..1.0, seed in any::<u64>(), a in 0.0f64..2.0) {
        let xi = XiSpec::finite_atoms(a, vec![(1.0, vec![0.5, 0.5])]).unwrap();
        let path = simulate_wf_jump(&xi, y0, 3.0, seed).unwrap();
        prop_assert!(path.values.iter().all(|x| (0.0..=1.0).contains(x)));
        if let Some(i) = path.values.iter().position(|&x| x == 0.0 || x == 1.0) {
            prop_assert!(path.values[i..].iter().all(|v| *v == path.values[i]));
            prop_assert_eq!(path.absorption_time(), Some(path.times[i]));
        }
    }

    #[test]
    fn function_dual_contracts(xi in atoms(), seed in any::<u64>(), n in 1usize..5) {
        let m = MutationModel::uniform_flip(0.8, 2).unwrap();
        let f = MomentFunction::all_equal(n, 2).unwrap();
        let path = simulate_function_dual(&xi, &m, &f, 2.0, seed).unwrap();
        for w in path.states.windows(2) {
            prop_assert!(w[1].rho.n() <= w[0].rho.n());
        }
        for s in &path.states {
            prop_assert!(s.rho.norm_inf() <= f.norm_inf() + 1e-12);
        }
    }
}
