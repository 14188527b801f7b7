//! Synthetic village networks induced by game outcomes.

use num_traits::Zero;
use serde::Serialize;

use super::{qser, Elite, GameError, GameParams, Rational, StrategyProfile};
use crate::graph::{EntityId, ServiceCategory, ServiceEdge, VillageNetwork};

pub fn poor_id(agent: usize) -> EntityId {
    EntityId::new(format!("poor-{agent}"))
}

pub fn elite_id(elite: Elite) -> EntityId {
    EntityId::new(format!("elite-{}", elite.index()))
}

/// Resource `r_1` is exported as credit, `r_2` as welfare access.
fn services(elite: Elite) -> &'static [ServiceCategory] {
    match elite {
        Elite::Zero => &[ServiceCategory::Credit, ServiceCategory::WelfareAccess],
        Elite::One => &[ServiceCategory::Credit],
        Elite::Two => &[ServiceCategory::WelfareAccess],
    }
}

/// Village whose sampled households are the poor agents and whose external
/// providers are the three elites; every link becomes one unreciprocated
/// edge per resource the patron controls.
pub fn equilibrium_to_network(p: &GameParams, profile: &StrategyProfile) -> VillageNetwork {
    let edges = p.poor_agents().flat_map(|agent| {
        profile
            .link_of(agent)
            .into_iter()
            .flat_map(move |e| services(e).iter().map(move |&s| ServiceEdge::new(poor_id(agent), elite_id(e), s)))
    });
    VillageNetwork::from_parts(
        "equilibrium",
        p.poor_agents().map(poor_id),
        Elite::ALL.map(elite_id),
        edges.collect::<Vec<_>>(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchmarkAgent {
    pub agent: usize,
    pub providers: Vec<EntityId>,
    /// Lifetime market cost of resources not obtained through a link.
    #[serde(with = "qser")]
    pub market_cost: Rational,
}

/// Benchmark economy without elections.
#[derive(Debug, Clone, Serialize)]
pub struct Benchmark {
    pub replicas: usize,
    pub one_link_cap: bool,
    pub agents: Vec<BenchmarkAgent>,
    #[serde(skip)]
    pub network: VillageNetwork,
}

fn replica_id(elite: Elite, replica: usize, replicas: usize) -> EntityId {
    if replicas == 1 {
        elite_id(elite)
    } else {
        EntityId::new(format!("elite-{}.{replica}", elite.index()))
    }
}

/// Lifetime costs `(link with 0, link with one single-resource elite plus
/// market for the other, links with both single-resource elites)` of an agent
/// with search cost `s` when no election takes place.
pub fn benchmark_link_costs(p: &GameParams, s: Rational) -> (Rational, Rational, Rational) {
    (p.c, Rational::from_integer(2) * s, Rational::zero())
}

/// Without elections nobody links to elite 0. With `one_link_cap` each poor
/// agent links to one single-resource elite (round-robin over the
/// `2 * replicas` providers) and buys the other resource at market; without
/// it each agent links to one replica of each type.
pub fn construct_benchmark(
    p: &GameParams,
    replicas: usize,
    one_link_cap: bool,
) -> Result<Benchmark, GameError> {
    if replicas == 0 {
        return Err(GameError::InvalidParam {
            name: "replicas",
            reason: "must be at least 1".into(),
        });
    }
    let mut providers_all = Vec::new();
    for r in 0..replicas {
        providers_all.push((Elite::One, replica_id(Elite::One, r, replicas)));
        providers_all.push((Elite::Two, replica_id(Elite::Two, r, replicas)));
    }
    let mut agents = Vec::with_capacity(p.n);
    let mut edges = Vec::new();
    for (i, agent) in p.poor_agents().enumerate() {
        let s = p.search_cost(agent)?;
        let chosen: Vec<(Elite, EntityId)> = if one_link_cap {
            vec![providers_all[i % providers_all.len()].clone()]
        } else {
            vec![
                (Elite::One, replica_id(Elite::One, i % replicas, replicas)),
                (Elite::Two, replica_id(Elite::Two, i % replicas, replicas)),
            ]
        };
        for (elite, id) in &chosen {
            for &svc in services(*elite) {
                edges.push(ServiceEdge::new(poor_id(agent), id.clone(), svc));
            }
        }
        let (_, one_link, both) = benchmark_link_costs(p, s);
        agents.push(BenchmarkAgent {
            agent,
            providers: chosen.into_iter().map(|(_, id)| id).collect(),
            market_cost: if one_link_cap { one_link } else { both },
        });
    }
    let network = VillageNetwork::from_parts(
        "benchmark",
        p.poor_agents().map(poor_id),
        std::iter::once(elite_id(Elite::Zero)).chain(providers_all.into_iter().map(|(_, id)| id)),
        edges,
    );
    Ok(Benchmark {
        replicas,
        one_link_cap,
        agents,
        network,
    })
}
