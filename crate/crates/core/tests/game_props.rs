mod common;

use std::collections::BTreeSet;

use patronet::game::*;
use patronet::indices::compute_indices;
use patronet::Execution;
use proptest::prelude::*;

#[test]
fn constructed_profiles_pass_on_grid() {
    for p in common::passing_grid().iter().step_by(7) {
        let eq = construct_clientelism_equilibrium(p).unwrap();
        let report = verify_spne(p, &eq.profile).unwrap();
        assert!(report.passed(), "n={} b={} theta={}: {:?}", p.n, p.b, p.theta,
            report.failures().map(|r| r.description()).collect::<Vec<_>>());
        let client = eq.outcome.min_client_work().unwrap();
        let other = eq.outcome.max_nonclient_work().unwrap();
        assert!(client > other);
    }
}

#[test]
fn consent_inequality_holds_on_grid() {
    assert!(common::passing_grid().iter().all(marginal_client_inequality_holds));
}

#[test]
fn pruned_equilibria_are_full_space_equilibria() {
    for n in 1..=4 {
        for (b, theta) in [(3.0, 0.7), (4.0, 0.6), (5.0, 0.7)] {
            let p = GameParams::new(n, b, theta, 1.1, 100.0, 0.1).unwrap();
            let sets = partition_sets(&p);
            let pi0: BTreeSet<usize> = sets.pi0.into_iter().collect();
            let pi1: BTreeSet<usize> = sets.pi1.into_iter().collect();
            let consent = [pi0, pi1.clone(), pi1];
            let pruned = enumerate_equilibria(&p, consent.clone(), StrategySpace::Pruned, 8, Execution::Sequential).unwrap();
            let full = enumerate_equilibria(&p, consent, StrategySpace::Full, 8, Execution::Parallel).unwrap();
            let full_parts: BTreeSet<_> = full.partitions.iter().map(|c| c.partition.clone()).collect();
            for pc in &pruned.partitions {
                assert!(full_parts.contains(&pc.partition), "n={n} b={b}: {:?}", pc.partition);
            }
            assert!(full.profiles_examined >= pruned.profiles_examined);
            if check_restrictions(&p).all_pass() {
                let eq = construct_clientelism_equilibrium(&p).unwrap();
                assert!(full_parts.contains(&OutcomePartition::of(&eq.profile)));
            }
        }
    }
}

#[test]
fn brute_force_is_execution_independent() {
    let p = GameParams::new(7, 3.0, 0.7, 1.1, 100.0, 0.1).unwrap();
    let a = brute_force_equilibria(&p, 8, Execution::Sequential).unwrap();
    let b = brute_force_equilibria(&p, 8, Execution::Parallel).unwrap();
    assert_eq!(a.partitions, b.partitions);
    assert_eq!(a.equilibria, b.equilibria);
}

#[test]
fn export_and_benchmark_contrast() {
    for p in common::passing_grid().iter().step_by(5) {
        let eq = construct_clientelism_equilibrium(p).unwrap();
        let net = equilibrium_to_network(p, &eq.profile);
        let run = compute_indices(std::slice::from_ref(&net), Execution::Sequential);
        assert_eq!(run.patron_reports[0].patrons.len(), 1);
        for h in run.households.iter().filter(|h| h.is_client) {
            assert_eq!(h.concentration_raw, 4);
        }
        for capped in [false, true] {
            let bench = construct_benchmark(p, 1, capped).unwrap();
            let run = compute_indices(std::slice::from_ref(&bench.network), Execution::Sequential);
            let max = run.households.iter().map(|h| h.concentration_raw).max().unwrap();
            assert_eq!(max, if capped { 1 } else { 2 });
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pi_sets_nest_and_partition(n in 1usize..60, b in 1u32..8, theta_pct in 0u32..=100) {
        let p = GameParams::new(n, f64::from(b), f64::from(theta_pct) / 100.0, 1.1, 100.0, 0.1).unwrap();
        let sets = partition_sets(&p);
        let pi0: BTreeSet<_> = sets.pi0.iter().copied().collect();
        let pi_u: BTreeSet<_> = sets.pi_u.iter().copied().collect();
        prop_assert!(sets.pi1.iter().all(|a| pi0.contains(a)));
        prop_assert!(pi0.is_disjoint(&pi_u));
        prop_assert_eq!(pi0.len() + pi_u.len(), n);
    }

    #[test]
    fn clients_weakly_fall_with_b(n in 5usize..30, theta_pct in 50u32..90) {
        let theta = f64::from(theta_pct) / 100.0;
        let counts: Vec<usize> = (2..8)
            .map(|b| partition_sets(&GameParams::new(n, f64::from(b), theta, 1.1, 100.0, 0.1).unwrap()).pi0.len())
            .collect();
        prop_assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
    }
}
