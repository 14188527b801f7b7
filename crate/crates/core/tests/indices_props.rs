mod common;

use patronet::graph::{EntityId, ServiceCategory, ServiceEdge, VillageNetwork};
use patronet::indices::{compute_indices, household_profile, LinkClass};
use patronet::Execution;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn network(seed: u64) -> VillageNetwork {
    common::random_network(&mut ChaCha8Rng::seed_from_u64(seed), 20, 60)
}

fn with_edge(net: &VillageNetwork, edge: ServiceEdge, external: Option<EntityId>) -> VillageNetwork {
    VillageNetwork::from_parts(
        net.village_id(),
        net.sampled_households().iter().cloned(),
        net.external_providers().iter().cloned().chain(external),
        net.edges().iter().cloned().chain([edge]),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_edge_scan_oracle(seed in any::<u64>()) {
        let net = network(seed);
        let diffs = common::compare_with_oracle(&net);
        prop_assert!(diffs.is_empty(), "{diffs:?}");
    }

    #[test]
    fn classes_partition_the_sample(seed in any::<u64>()) {
        let net = network(seed);
        let run = compute_indices(std::slice::from_ref(&net), Execution::Sequential);
        prop_assert_eq!(run.households.len(), net.sampled_households().len());
        let count = |c| run.households.iter().filter(|h| h.link_class == c).count();
        prop_assert_eq!(
            count(LinkClass::NonReceiver) + count(LinkClass::ReciprocalOnly) + count(LinkClass::Unidirectional),
            net.sampled_households().len()
        );
        for h in &run.households {
            match h.link_class {
                LinkClass::NonReceiver => prop_assert_eq!(
                    (h.degree_reciprocal, h.degree_unidirectional, h.concentration_raw, h.weighted_raw),
                    (0, 0, 0, 0)
                ),
                LinkClass::ReciprocalOnly => {
                    prop_assert_eq!(h.degree_unidirectional, 0);
                    prop_assert_eq!(h.concentration_raw, 0);
                }
                LinkClass::Unidirectional => prop_assert!(h.concentration_raw > 0),
            }
            if h.is_client {
                prop_assert!(!h.patron_ids.is_empty());
                prop_assert_eq!(h.link_class, LinkClass::Unidirectional);
            }
        }
    }

    #[test]
    fn weighted_dominates_raw(seed in any::<u64>()) {
        let net = network(seed);
        for hh in net.sampled_households() {
            let p = household_profile(&net, hh.as_str()).unwrap();
            prop_assert!(p.weighted_concentration >= p.concentration);
            let single_sphere = net.providers_of(hh.as_str()).all(|k| {
                let r = net.relation_between(hh.as_str(), k.as_str()).unwrap();
                r.reciprocal || r.spheres == 1
            });
            prop_assert_eq!(p.weighted_concentration == p.concentration, single_sphere);
        }
    }

    #[test]
    fn new_unidirectional_provider_never_lowers_indices(seed in any::<u64>(), pick in any::<prop::sample::Index>(), cat in 0usize..10) {
        let net = network(seed);
        let hh = pick.get(&net.sampled_households().iter().cloned().collect::<Vec<_>>()).clone();
        let fresh = EntityId::new("fresh-provider");
        let grown = with_edge(
            &net,
            ServiceEdge::new(hh.clone(), fresh.clone(), ServiceCategory::ALL[cat]),
            Some(fresh),
        );
        let before = household_profile(&net, hh.as_str()).unwrap();
        let after = household_profile(&grown, hh.as_str()).unwrap();
        prop_assert_eq!(after.degrees.unidirectional, before.degrees.unidirectional + 1);
        prop_assert_eq!(after.concentration, before.concentration + 1);
    }

    #[test]
    fn reverse_edge_cancels_pair(seed in any::<u64>(), cat in 0usize..10) {
        let net = network(seed);
        let Some(edge) = net.edges().iter().find(|e| {
            net.is_sampled(e.receiver.as_str())
                && net.relation_between(e.receiver.as_str(), e.provider.as_str()).unwrap().is_unidirectional()
        }) else {
            return Ok(());
        };
        let (x, k) = (edge.receiver.clone(), edge.provider.clone());
        let d = u64::from(net.relation_between(x.as_str(), k.as_str()).unwrap().unidirectional_links);
        let grown = with_edge(&net, ServiceEdge::new(k, x.clone(), ServiceCategory::ALL[cat]), None);
        let before = household_profile(&net, x.as_str()).unwrap();
        let after = household_profile(&grown, x.as_str()).unwrap();
        prop_assert_eq!(after.concentration, before.concentration - d * d);
        prop_assert_eq!(after.degrees.unidirectional, before.degrees.unidirectional - 1);
        prop_assert_eq!(after.degrees.reciprocal, before.degrees.reciprocal + 1);
        if before.degrees.unidirectional == 1 {
            prop_assert_eq!(after.link_class, LinkClass::ReciprocalOnly);
        }
    }
}

#[test]
fn pooled_z_scores_match_across_execution_modes() {
    let nets: Vec<_> = (0..12).map(|s| {
        let n = network(s);
        VillageNetwork::from_parts(
            format!("V{s}"),
            n.sampled_households().iter().cloned(),
            n.external_providers().iter().cloned(),
            n.edges().iter().cloned(),
        )
    }).collect();
    let a = compute_indices(&nets, Execution::Sequential);
    let b = compute_indices(&nets, Execution::Parallel);
    assert_eq!(a.households, b.households);
    assert_eq!(a.patron_reports, b.patron_reports);
}
