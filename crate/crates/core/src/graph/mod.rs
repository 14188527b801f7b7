//! Multiplex directed service graphs for one village.
//!
//! An edge points from the receiver of a service to its provider. A village
//! carries two disjoint entity sets: the sampled households (respondents) and
//! external providers who were named by respondents but not surveyed.

mod csv_io;
mod validate;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use csv_io::{parse_village_csv, parse_village_file, write_village_csv, ParsedVillage};
pub use validate::{validate_network, ValidationReport, Violation};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("input contains no data rows")]
    Empty,
    #[error("unknown entity `{0}`")]
    UnknownEntity(EntityId),
    #[error("`{0}` is not a sampled household")]
    NotSampled(EntityId),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Opaque entity identifier (household or provider).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        EntityId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for EntityId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        EntityId(s.to_owned())
    }
}

impl From<String> for EntityId {
    fn from(s: String) -> Self {
        EntityId(s)
    }
}

/// Sphere of life a service belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sphere {
    Economic,
    Political,
    Social,
}

/// The ten surveyed service items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceCategory {
    InputPurchase,
    LandTenancy,
    OutputSale,
    Labour,
    Credit,
    /// Access to welfare schemes other than the workfare programme itself.
    WelfareAccess,
    PoliticalGuidance,
    EmploymentDispute,
    ReligiousGuidance,
    FamilyDispute,
}

impl ServiceCategory {
    pub const ALL: [ServiceCategory; 10] = [
        ServiceCategory::InputPurchase,
        ServiceCategory::LandTenancy,
        ServiceCategory::OutputSale,
        ServiceCategory::Labour,
        ServiceCategory::Credit,
        ServiceCategory::WelfareAccess,
        ServiceCategory::PoliticalGuidance,
        ServiceCategory::EmploymentDispute,
        ServiceCategory::ReligiousGuidance,
        ServiceCategory::FamilyDispute,
    ];

    pub fn sphere(self) -> Sphere {
        use ServiceCategory::*;
        match self {
            InputPurchase | LandTenancy | OutputSale | Labour | Credit => Sphere::Economic,
            WelfareAccess | PoliticalGuidance | EmploymentDispute => Sphere::Political,
            ReligiousGuidance | FamilyDispute => Sphere::Social,
        }
    }

    pub fn token(self) -> &'static str {
        use ServiceCategory::*;
        match self {
            InputPurchase => "input_purchase",
            LandTenancy => "land_tenancy",
            OutputSale => "output_sale",
            Labour => "labour",
            Credit => "credit",
            WelfareAccess => "welfare_access",
            PoliticalGuidance => "political_guidance",
            EmploymentDispute => "employment_dispute",
            ReligiousGuidance => "religious_guidance",
            FamilyDispute => "family_dispute",
        }
    }
}

impl fmt::Display for ServiceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ServiceCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ServiceCategory::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| format!("unknown service token `{s}`"))
    }
}

/// One service relation: `receiver` obtains `category` from `provider`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ServiceEdge {
    pub receiver: EntityId,
    pub provider: EntityId,
    pub category: ServiceCategory,
}

impl ServiceEdge {
    pub fn new(
        receiver: impl Into<EntityId>,
        provider: impl Into<EntityId>,
        category: ServiceCategory,
    ) -> Self {
        ServiceEdge {
            receiver: receiver.into(),
            provider: provider.into(),
            category,
        }
    }
}

type Adjacency = BTreeMap<EntityId, BTreeMap<EntityId, BTreeSet<ServiceCategory>>>;

/// Service graph of one village. Immutable once built.
#[derive(Debug, Clone)]
pub struct VillageNetwork {
    village_id: String,
    sampled: BTreeSet<EntityId>,
    external: BTreeSet<EntityId>,
    edges: BTreeSet<ServiceEdge>,
    // receiver -> provider -> categories
    received: Adjacency,
    // provider -> receiver -> categories
    provided: Adjacency,
}

impl PartialEq for VillageNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.village_id == other.village_id
            && self.sampled == other.sampled
            && self.external == other.external
            && self.edges == other.edges
    }
}

impl Eq for VillageNetwork {}

impl VillageNetwork {
    /// Builds a network without checking invariants; see [`validate_network`].
    pub fn from_parts(
        village_id: impl Into<String>,
        sampled: impl IntoIterator<Item = EntityId>,
        external: impl IntoIterator<Item = EntityId>,
        edges: impl IntoIterator<Item = ServiceEdge>,
    ) -> Self {
        let edges: BTreeSet<ServiceEdge> = edges.into_iter().collect();
        let mut received = Adjacency::new();
        let mut provided = Adjacency::new();
        for e in &edges {
            received
                .entry(e.receiver.clone())
                .or_default()
                .entry(e.provider.clone())
                .or_default()
                .insert(e.category);
            provided
                .entry(e.provider.clone())
                .or_default()
                .entry(e.receiver.clone())
                .or_default()
                .insert(e.category);
        }
        VillageNetwork {
            village_id: village_id.into(),
            sampled: sampled.into_iter().collect(),
            external: external.into_iter().collect(),
            edges,
            received,
            provided,
        }
    }

    pub fn village_id(&self) -> &str {
        &self.village_id
    }

    pub fn sampled_households(&self) -> &BTreeSet<EntityId> {
        &self.sampled
    }

    pub fn external_providers(&self) -> &BTreeSet<EntityId> {
        &self.external
    }

    pub fn edges(&self) -> &BTreeSet<ServiceEdge> {
        &self.edges
    }

    pub fn is_sampled(&self, id: &str) -> bool {
        self.sampled.contains(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.sampled.contains(id) || self.external.contains(id)
    }

    fn entity(&self, id: &str) -> Result<&EntityId, GraphError> {
        self.sampled
            .get(id)
            .or_else(|| self.external.get(id))
            .ok_or_else(|| GraphError::UnknownEntity(EntityId::from(id)))
    }

    pub(crate) fn sampled_entity(&self, id: &str) -> Result<&EntityId, GraphError> {
        match self.sampled.get(id) {
            Some(e) => Ok(e),
            None if self.external.contains(id) => Err(GraphError::NotSampled(id.into())),
            None => Err(GraphError::UnknownEntity(id.into())),
        }
    }

    /// Counterparts `household` receives at least one service from.
    pub fn providers_of(&self, household: &str) -> impl Iterator<Item = &EntityId> {
        self.received.get(household).into_iter().flat_map(|m| m.keys())
    }

    /// Every entity that provides at least one service to someone.
    pub fn providers(&self) -> impl Iterator<Item = &EntityId> {
        self.provided.keys()
    }

    /// Entities that receive at least one service from `provider`.
    pub fn receivers_of(&self, provider: &str) -> impl Iterator<Item = &EntityId> {
        self.provided.get(provider).into_iter().flat_map(|m| m.keys())
    }

    fn categories(&self, receiver: &str, provider: &str) -> BTreeSet<ServiceCategory> {
        self.received
            .get(receiver)
            .and_then(|m| m.get(provider))
            .cloned()
            .unwrap_or_default()
    }

    /// Pairwise relation between a sampled household and any counterpart.
    pub fn relation_between(
        &self,
        household: &str,
        counterpart: &str,
    ) -> Result<RelationSummary, GraphError> {
        let household = self.sampled_entity(household)?.clone();
        let counterpart = self.entity(counterpart)?.clone();
        Ok(self.relation_unchecked(household, counterpart))
    }

    pub(crate) fn relation_unchecked(
        &self,
        household: EntityId,
        counterpart: EntityId,
    ) -> RelationSummary {
        let services_received = self.categories(household.as_str(), counterpart.as_str());
        let services_provided = self.categories(counterpart.as_str(), household.as_str());
        RelationSummary::new(household, counterpart, services_received, services_provided)
    }
}

/// Directed view of the services flowing between a household and one
/// counterpart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationSummary {
    pub household: EntityId,
    pub counterpart: EntityId,
    pub services_received: BTreeSet<ServiceCategory>,
    pub services_provided: BTreeSet<ServiceCategory>,
    pub reciprocal: bool,
    /// Number of unreciprocated services received; zero for reciprocal pairs.
    pub unidirectional_links: u32,
    /// Distinct spheres among received services.
    pub spheres: u32,
}

impl RelationSummary {
    fn new(
        household: EntityId,
        counterpart: EntityId,
        services_received: BTreeSet<ServiceCategory>,
        services_provided: BTreeSet<ServiceCategory>,
    ) -> Self {
        // A single service in the reverse direction makes the whole pair reciprocal.
        let reciprocal = !services_received.is_empty() && !services_provided.is_empty();
        let unidirectional_links = if reciprocal {
            0
        } else {
            services_received.len() as u32
        };
        let spheres = services_received
            .iter()
            .map(|c| c.sphere())
            .collect::<BTreeSet<_>>()
            .len() as u32;
        RelationSummary {
            household,
            counterpart,
            services_received,
            services_provided,
            reciprocal,
            unidirectional_links,
            spheres,
        }
    }

    pub fn is_unidirectional(&self) -> bool {
        self.unidirectional_links > 0
    }
}
