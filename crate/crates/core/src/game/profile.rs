use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::params::{check_restrictions, partition_sets, PiSets, RestrictionReport};
use super::payoff::{elite_expected_payoff, poor_payoff, WinProbs};
use super::{qser, Candidate, Elite, GameError, GameParams, Rational, FIRST_POOR};

/// Pure strategies of the three elites (consent sets) and of every poor
/// agent (link and vote). Index `i` of `links`/`votes` is agent `3 + i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    pub consent: [BTreeSet<usize>; 3],
    pub links: Vec<Option<Elite>>,
    pub votes: Vec<Candidate>,
}

impl StrategyProfile {
    pub fn n(&self) -> usize {
        self.links.len()
    }

    pub fn link_of(&self, agent: usize) -> Option<Elite> {
        self.links[agent - FIRST_POOR]
    }

    pub fn vote_of(&self, agent: usize) -> Candidate {
        self.votes[agent - FIRST_POOR]
    }

    pub fn set_link(&mut self, agent: usize, link: Option<Elite>) {
        self.links[agent - FIRST_POOR] = link;
    }

    pub fn set_vote(&mut self, agent: usize, vote: Candidate) {
        self.votes[agent - FIRST_POOR] = vote;
    }

    pub fn consents(&self, elite: Elite, agent: usize) -> bool {
        self.consent[elite.index()].contains(&agent)
    }

    /// Votes per candidate in `[0, 1, 2, N]` order.
    pub fn tally(&self) -> [u32; 4] {
        let mut t = [0u32; 4];
        for v in &self.votes {
            t[v.index()] += 1;
        }
        t
    }

    pub fn clients(&self, elite: Elite) -> Vec<usize> {
        self.links
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(elite))
            .map(|(i, _)| FIRST_POOR + i)
            .collect()
    }

    /// Checks sizes, consent-set membership, and that every link was
    /// consented to.
    pub fn validate(&self, p: &GameParams) -> Result<(), GameError> {
        let bad = |m: String| Err(GameError::MalformedProfile(m));
        if self.links.len() != p.n || self.votes.len() != p.n {
            return bad(format!(
                "expected {} poor agents, got {} links and {} votes",
                p.n,
                self.links.len(),
                self.votes.len()
            ));
        }
        for (e, set) in Elite::ALL.iter().zip(&self.consent) {
            if let Some(a) = set.iter().find(|a| !p.poor_agents().contains(a)) {
                return bad(format!("consent set of elite {} names non-poor agent {a}", e.index()));
            }
        }
        for agent in p.poor_agents() {
            if let Some(e) = self.link_of(agent) {
                if !self.consents(e, agent) {
                    return bad(format!(
                        "agent {agent} linked to elite {} without consent",
                        e.index()
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RawAgent {
    agent: usize,
    link: Option<Elite>,
    vote: Candidate,
}

#[derive(Serialize, Deserialize)]
struct RawConsent {
    #[serde(rename = "0")]
    zero: BTreeSet<usize>,
    #[serde(rename = "1")]
    one: BTreeSet<usize>,
    #[serde(rename = "2")]
    two: BTreeSet<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    consent: RawConsent,
    agents: Vec<RawAgent>,
}

impl Serialize for StrategyProfile {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let [zero, one, two] = self.consent.clone();
        RawProfile {
            consent: RawConsent { zero, one, two },
            agents: self
                .links
                .iter()
                .zip(&self.votes)
                .enumerate()
                .map(|(i, (&link, &vote))| RawAgent {
                    agent: FIRST_POOR + i,
                    link,
                    vote,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StrategyProfile {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawProfile::deserialize(d)?;
        for (i, a) in raw.agents.iter().enumerate() {
            if a.agent != FIRST_POOR + i {
                return Err(serde::de::Error::custom(format!(
                    "agents must be listed in order from {FIRST_POOR}; found {} at position {i}",
                    a.agent
                )));
            }
        }
        Ok(StrategyProfile {
            consent: [raw.consent.zero, raw.consent.one, raw.consent.two],
            links: raw.agents.iter().map(|a| a.link).collect(),
            votes: raw.agents.iter().map(|a| a.vote).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EliteOutcome {
    pub elite: Elite,
    pub clients: u32,
    pub votes: u32,
    #[serde(with = "qser")]
    pub expected_payoff: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentOutcome {
    pub agent: usize,
    #[serde(with = "qser")]
    pub search_cost: Rational,
    pub link: Option<Elite>,
    pub vote: Candidate,
    #[serde(with = "qser")]
    pub expected_public_work: Rational,
    #[serde(with = "qser")]
    pub lifetime_payoff: Rational,
}

/// Everything induced by a strategy profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquilibriumOutcome {
    pub win_probabilities: WinProbs,
    pub elites: Vec<EliteOutcome>,
    pub agents: Vec<AgentOutcome>,
    pub pi_sets: PiSets,
}

impl EquilibriumOutcome {
    fn work_of(&self, linked: bool) -> impl Iterator<Item = Rational> + '_ {
        self.agents
            .iter()
            .filter(move |a| a.link.is_some() == linked)
            .map(|a| a.expected_public_work)
    }

    /// Smallest expected public work among linked agents.
    pub fn min_client_work(&self) -> Option<Rational> {
        self.work_of(true).min()
    }

    /// Largest expected public work among unlinked agents.
    pub fn max_nonclient_work(&self) -> Option<Rational> {
        self.work_of(false).max()
    }

    pub fn client_count(&self) -> usize {
        self.agents.iter().filter(|a| a.link.is_some()).count()
    }
}

/// Evaluates win probabilities, expected work, and payoffs of `profile`.
pub fn evaluate_profile(
    p: &GameParams,
    profile: &StrategyProfile,
) -> Result<EquilibriumOutcome, GameError> {
    profile.validate(p)?;
    let tally = profile.tally();
    let win = WinProbs::from_tally(&tally, p.n);
    let elites = Elite::ALL
        .iter()
        .map(|&e| {
            let clients = profile.clients(e).len() as u32;
            let votes = tally[e.index()];
            EliteOutcome {
                elite: e,
                clients,
                votes,
                expected_payoff: elite_expected_payoff(p, votes, clients),
            }
        })
        .collect();
    let agents = p
        .poor_agents()
        .map(|agent| {
            let s = p.search_cost(agent).expect("poor agent");
            let link = profile.link_of(agent);
            let from_elite = link.map_or(Rational::default(), |e| win.elite(e) * p.elite_work());
            AgentOutcome {
                agent,
                search_cost: s,
                link,
                vote: profile.vote_of(agent),
                expected_public_work: from_elite + win.non_native * p.b,
                lifetime_payoff: poor_payoff(p, s, link, &win),
            }
        })
        .collect();
    Ok(EquilibriumOutcome {
        win_probabilities: win,
        elites,
        agents,
        pi_sets: partition_sets(p),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equilibrium {
    pub params: GameParams,
    pub restrictions: RestrictionReport,
    pub profile: StrategyProfile,
    pub outcome: EquilibriumOutcome,
}

/// Builds the clientelism equilibrium: elite 0 consents to every agent with
/// `s_k >= b(1 - theta)/2`, elites 1 and 2 to those with `s_k >= b(1 - theta)`;
/// the former all link to and vote for 0, the rest stay unlinked and vote N.
pub fn construct_clientelism_equilibrium(p: &GameParams) -> Result<Equilibrium, GameError> {
    let restrictions = check_restrictions(p);
    if !restrictions.all_pass() {
        return Err(GameError::Restrictions(restrictions.failures().join(", ")));
    }
    let sets = partition_sets(p);
    let pi0: BTreeSet<usize> = sets.pi0.iter().copied().collect();
    let pi1: BTreeSet<usize> = sets.pi1.iter().copied().collect();
    let profile = StrategyProfile {
        consent: [pi0.clone(), pi1.clone(), pi1],
        links: p
            .poor_agents()
            .map(|a| pi0.contains(&a).then_some(Elite::Zero))
            .collect(),
        votes: p
            .poor_agents()
            .map(|a| {
                if pi0.contains(&a) {
                    Candidate::Elite0
                } else {
                    Candidate::NonNative
                }
            })
            .collect(),
    };
    let outcome = evaluate_profile(p, &profile)?;
    Ok(Equilibrium {
        params: p.clone(),
        restrictions,
        profile,
        outcome,
    })
}
