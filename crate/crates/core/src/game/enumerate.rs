//! Exhaustive search over pure poor-agent strategies for fixed consent sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::params::partition_sets;
use super::verify::Scanner;
use super::{Candidate, Elite, GameError, GameParams, StrategyProfile, FIRST_POOR};
use crate::exec::Execution;

pub const DEFAULT_MAX_N: usize = 8;

/// Which poor strategies are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategySpace {
    /// Unlinked agents vote N; linked agents vote for their patron or N.
    Pruned,
    /// Any consented link (or none) combined with a vote for any candidate.
    Full,
}

/// Client sets and vote tally shared by a class of equilibrium profiles.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OutcomePartition {
    /// Clients of elites 0, 1 and 2.
    pub clients: [Vec<usize>; 3],
    /// Votes for `[0, 1, 2, N]`.
    pub tally: [u32; 4],
}

impl OutcomePartition {
    pub fn of(profile: &StrategyProfile) -> Self {
        OutcomePartition {
            clients: Elite::ALL.map(|e| profile.clients(e)),
            tally: profile.tally(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionCount {
    pub partition: OutcomePartition,
    /// Equilibrium profiles mapping to this partition.
    pub profiles: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BruteForceResult {
    pub params: GameParams,
    pub space: StrategySpace,
    pub profiles_examined: u64,
    pub equilibria: u64,
    pub partitions: Vec<PartitionCount>,
}

impl BruteForceResult {
    pub fn is_unique(&self) -> bool {
        self.partitions.len() == 1
    }
}

fn agent_options(
    consent: &[BTreeSet<usize>; 3],
    agent: usize,
    space: StrategySpace,
) -> Vec<(Option<Elite>, Candidate)> {
    let links = std::iter::once(None).chain(
        Elite::ALL
            .into_iter()
            .filter(|e| consent[e.index()].contains(&agent))
            .map(Some),
    );
    links
        .flat_map(|link| {
            let votes: Vec<Candidate> = match (space, link) {
                (StrategySpace::Full, _) => Candidate::ALL.to_vec(),
                (StrategySpace::Pruned, None) => vec![Candidate::NonNative],
                (StrategySpace::Pruned, Some(e)) => vec![e.into(), Candidate::NonNative],
            };
            votes.into_iter().map(move |v| (link, v))
        })
        .collect()
}

/// Enumerates every poor strategy profile in `space` under the given consent
/// sets and keeps those with no profitable unilateral deviation.
pub fn enumerate_equilibria(
    p: &GameParams,
    consent: [BTreeSet<usize>; 3],
    space: StrategySpace,
    max_n: usize,
    exec: Execution,
) -> Result<BruteForceResult, GameError> {
    if p.n > max_n {
        return Err(GameError::TooLarge { n: p.n, max_n });
    }
    let options: Vec<Vec<(Option<Elite>, Candidate)>> = p
        .poor_agents()
        .map(|a| agent_options(&consent, a, space))
        .collect();
    let total: u64 = options.iter().map(|o| o.len() as u64).product();
    let template = StrategyProfile {
        consent,
        links: vec![None; p.n],
        votes: vec![Candidate::NonNative; p.n],
    };
    template.validate(p)?;

    let accepted = exec.filter_map_range(total, |mut index| {
        let mut profile = template.clone();
        for (i, opts) in options.iter().enumerate() {
            let radix = opts.len() as u64;
            let (link, vote) = opts[(index % radix) as usize];
            index /= radix;
            profile.set_link(FIRST_POOR + i, link);
            profile.set_vote(FIRST_POOR + i, vote);
        }
        Scanner::new(p, &profile)
            .is_equilibrium()
            .then(|| OutcomePartition::of(&profile))
    });

    let equilibria = accepted.len() as u64;
    let mut counts: BTreeMap<OutcomePartition, u64> = BTreeMap::new();
    for part in accepted {
        *counts.entry(part).or_default() += 1;
    }
    Ok(BruteForceResult {
        params: p.clone(),
        space,
        profiles_examined: total,
        equilibria,
        partitions: counts
            .into_iter()
            .map(|(partition, profiles)| PartitionCount {
                partition,
                profiles,
            })
            .collect(),
    })
}

/// Enumerates the pruned strategy space with elite 0 consenting to agents at
/// or above her voting threshold and elites 1, 2 to agents at or above
/// theirs.
pub fn brute_force_equilibria(
    p: &GameParams,
    max_n: usize,
    exec: Execution,
) -> Result<BruteForceResult, GameError> {
    let sets = partition_sets(p);
    let pi0: BTreeSet<usize> = sets.pi0.into_iter().collect();
    let pi1: BTreeSet<usize> = sets.pi1.into_iter().collect();
    enumerate_equilibria(p, [pi0, pi1.clone(), pi1], StrategySpace::Pruned, max_n, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{construct_clientelism_equilibrium, verify_spne};

    #[test]
    fn six_agents_have_one_partition() {
        let p = GameParams::new(6, 3.0, 0.7, 1.1, 100.0, 0.1).unwrap();
        let res = brute_force_equilibria(&p, DEFAULT_MAX_N, Execution::Parallel).unwrap();
        assert!(res.is_unique(), "{:?}", res.partitions);
        let part = &res.partitions[0].partition;
        assert_eq!(part.clients[0], vec![5, 6, 7, 8]);
        assert!(part.clients[1].is_empty() && part.clients[2].is_empty());
        assert_eq!(part.tally, [4, 0, 0, 2]);

        let eq = construct_clientelism_equilibrium(&p).unwrap();
        assert_eq!(*part, OutcomePartition::of(&eq.profile));
    }

    #[test]
    fn too_large() {
        let p = GameParams::reference();
        assert!(matches!(
            brute_force_equilibria(&p, DEFAULT_MAX_N, Execution::Sequential),
            Err(GameError::TooLarge { n: 10, max_n: 8 })
        ));
    }

    #[test]
    fn accepted_profiles_pass_the_verifier() {
        let p = GameParams::new(5, 3.0, 0.7, 1.1, 100.0, 0.1).unwrap();
        let sets = partition_sets(&p);
        let pi0: BTreeSet<usize> = sets.pi0.into_iter().collect();
        let pi1: BTreeSet<usize> = sets.pi1.into_iter().collect();
        let consent = [pi0, pi1.clone(), pi1];
        let options: Vec<_> = p
            .poor_agents()
            .map(|a| agent_options(&consent, a, StrategySpace::Pruned))
            .collect();
        let total: usize = options.iter().map(Vec::len).product();
        let mut accepted = 0;
        for mut index in 0..total {
            let mut profile = StrategyProfile {
                consent: consent.clone(),
                links: vec![None; p.n],
                votes: vec![Candidate::NonNative; p.n],
            };
            for (i, opts) in options.iter().enumerate() {
                let (l, v) = opts[index % opts.len()];
                index /= opts.len();
                profile.links[i] = l;
                profile.votes[i] = v;
            }
            let full = verify_spne(&p, &profile).unwrap().passed();
            assert_eq!(full, Scanner::new(&p, &profile).is_equilibrium());
            accepted += usize::from(full);
        }
        let res = brute_force_equilibria(&p, DEFAULT_MAX_N, Execution::Sequential).unwrap();
        assert_eq!(res.equilibria as usize, accepted);
        assert_eq!(res.profiles_examined as usize, total);
    }
}
