use serde::Serialize;

use super::{EntityId, VillageNetwork};

/// A single broken network invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Id listed both as a sampled household and an external provider.
    OverlappingEntity { id: EntityId },
    /// Edge endpoint missing from both entity sets.
    DanglingEndpoint {
        receiver: EntityId,
        provider: EntityId,
        missing: EntityId,
    },
    SelfEdge { id: EntityId },
    /// Neither endpoint is a sampled household, so no respondent reported it.
    UnreportedEdge {
        receiver: EntityId,
        provider: EntityId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub village_id: String,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every invariant violation of `net`. Never fails.
pub fn validate_network(net: &VillageNetwork) -> ValidationReport {
    let mut violations: Vec<Violation> = net
        .sampled_households()
        .intersection(net.external_providers())
        .map(|id| Violation::OverlappingEntity { id: id.clone() })
        .collect();

    for e in net.edges() {
        if e.receiver == e.provider {
            violations.push(Violation::SelfEdge {
                id: e.receiver.clone(),
            });
        }
        let mut dangling = false;
        for end in [&e.receiver, &e.provider] {
            if !net.contains(end.as_str()) {
                dangling = true;
                violations.push(Violation::DanglingEndpoint {
                    receiver: e.receiver.clone(),
                    provider: e.provider.clone(),
                    missing: end.clone(),
                });
            }
        }
        if !dangling
            && !net.is_sampled(e.receiver.as_str())
            && !net.is_sampled(e.provider.as_str())
        {
            violations.push(Violation::UnreportedEdge {
                receiver: e.receiver.clone(),
                provider: e.provider.clone(),
            });
        }
    }
    ValidationReport {
        village_id: net.village_id().to_owned(),
        violations,
    }
}
