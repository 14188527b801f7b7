//! Unilateral-deviation scan of a strategy profile, stage by stage, in the
//! order of backward induction: votes, then links, then consent.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use super::payoff::{elite_expected_payoff, poor_payoff, WinProbs};
use super::{to_f64, Candidate, Elite, GameError, GameParams, Rational, StrategyProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Consent,
    Link,
    Vote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Deviation {
    Vote {
        from: Candidate,
        to: Candidate,
    },
    /// Re-link (or drop the link) and vote optimally afterwards.
    Link {
        from: Option<Elite>,
        to: Option<Elite>,
        vote: Candidate,
    },
    Grant {
        elite: Elite,
        agent: usize,
    },
    Withdraw {
        elite: Elite,
        agent: usize,
    },
}

fn link_name(l: Option<Elite>) -> String {
    l.map_or_else(|| "no link".to_owned(), |e| format!("elite {}", e.index()))
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Deviation::Vote { from, to } => write!(f, "vote for {to} instead of {from}"),
            Deviation::Link { from, to, vote } => write!(
                f,
                "switch from {} to {} and vote for {vote}",
                link_name(from),
                link_name(to)
            ),
            Deviation::Grant { elite, agent } => {
                write!(f, "elite {} grants consent to agent {agent}", elite.index())
            }
            Deviation::Withdraw { elite, agent } => {
                write!(f, "elite {} withdraws consent from agent {agent}", elite.index())
            }
        }
    }
}

/// Best unilateral deviation of one agent at one stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationRecord {
    pub stage: Stage,
    /// Elite (0-2) or poor agent (3 and up).
    pub agent: usize,
    /// `None` when the agent has no alternative at this stage.
    pub deviation: Option<Deviation>,
    pub gain: Rational,
}

impl DeviationRecord {
    pub fn pass(&self) -> bool {
        !self.gain.is_positive()
    }

    pub fn description(&self) -> String {
        match &self.deviation {
            Some(d) => format!("agent {}: {d} (gain {})", self.agent, self.gain),
            None => format!("agent {}: no alternative", self.agent),
        }
    }
}

impl Serialize for DeviationRecord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DeviationRecord", 6)?;
        st.serialize_field("stage", &self.stage)?;
        st.serialize_field("agent", &self.agent)?;
        st.serialize_field("deviation", &self.description())?;
        st.serialize_field("gain", &to_f64(&self.gain))?;
        st.serialize_field("gain_exact", &self.gain.to_string())?;
        st.serialize_field("pass", &self.pass())?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeviationReport {
    pub records: Vec<DeviationRecord>,
    #[serde(with = "super::qser")]
    pub max_gain: Rational,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl DeviationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Records with a strictly positive gain.
    pub fn failures(&self) -> impl Iterator<Item = &DeviationRecord> {
        self.records.iter().filter(|r| !r.pass())
    }

    pub fn record(&self, stage: Stage, agent: usize) -> Option<&DeviationRecord> {
        self.records
            .iter()
            .find(|r| r.stage == stage && r.agent == agent)
    }
}

pub(crate) struct Scanner<'a> {
    p: &'a GameParams,
    profile: &'a StrategyProfile,
    tally: [u32; 4],
    costs: Vec<Rational>,
}

fn moved(tally: [u32; 4], from: Candidate, to: Candidate) -> [u32; 4] {
    let mut t = tally;
    t[from.index()] -= 1;
    t[to.index()] += 1;
    t
}

/// Vote order tried for a given link: patron, then N, then everyone else.
/// Ties resolve to the earliest candidate.
fn vote_order(link: Option<Elite>) -> impl Iterator<Item = Candidate> {
    let first = link.map(Candidate::from);
    first
        .into_iter()
        .chain(std::iter::once(Candidate::NonNative))
        .chain(Candidate::ALL.into_iter().filter(move |c| Some(*c) != first && *c != Candidate::NonNative))
}

impl<'a> Scanner<'a> {
    pub(crate) fn new(p: &'a GameParams, profile: &'a StrategyProfile) -> Self {
        Scanner {
            p,
            profile,
            tally: profile.tally(),
            costs: p.poor_agents().map(|a| p.search_cost(a).expect("poor")).collect(),
        }
    }

    fn pay(&self, agent: usize, link: Option<Elite>, tally: &[u32; 4]) -> Rational {
        let win = WinProbs::from_tally(tally, self.p.n);
        poor_payoff(self.p, self.costs[agent - super::FIRST_POOR], link, &win)
    }

    fn current(&self, agent: usize) -> Rational {
        self.pay(agent, self.profile.link_of(agent), &self.tally)
    }

    /// Best vote after switching to `link`; returns the vote, the resulting
    /// tally and the agent's payoff.
    fn best_vote(&self, agent: usize, link: Option<Elite>) -> (Candidate, [u32; 4], Rational) {
        let own = self.profile.vote_of(agent);
        let mut best: Option<(Candidate, [u32; 4], Rational)> = None;
        for v in vote_order(link) {
            let t = moved(self.tally, own, v);
            let value = self.pay(agent, link, &t);
            if best.as_ref().is_none_or(|b| value > b.2) {
                best = Some((v, t, value));
            }
        }
        best.expect("at least one candidate")
    }

    pub(crate) fn vote_stage(&self, agent: usize) -> DeviationRecord {
        let link = self.profile.link_of(agent);
        let from = self.profile.vote_of(agent);
        let cur = self.current(agent);
        let (to, gain) = Candidate::ALL
            .into_iter()
            .filter(|&c| c != from)
            .map(|to| (to, self.pay(agent, link, &moved(self.tally, from, to)) - cur))
            .fold(None::<(Candidate, Rational)>, |best, (c, g)| match best {
                Some((_, bg)) if bg >= g => best,
                _ => Some((c, g)),
            })
            .expect("three alternatives");
        DeviationRecord {
            stage: Stage::Vote,
            agent,
            deviation: Some(Deviation::Vote { from, to }),
            gain,
        }
    }

    pub(crate) fn link_stage(&self, agent: usize) -> DeviationRecord {
        let from = self.profile.link_of(agent);
        let cur = self.current(agent);
        let options = std::iter::once(None)
            .chain(
                Elite::ALL
                    .into_iter()
                    .filter(|&e| self.profile.consents(e, agent))
                    .map(Some),
            )
            .filter(|&o| o != from);
        let mut best: Option<(Deviation, Rational)> = None;
        for to in options {
            let (vote, _, value) = self.best_vote(agent, to);
            let gain = value - cur;
            if best.as_ref().is_none_or(|b| gain > b.1) {
                best = Some((Deviation::Link { from, to, vote }, gain));
            }
        }
        match best {
            Some((d, gain)) => DeviationRecord {
                stage: Stage::Link,
                agent,
                deviation: Some(d),
                gain,
            },
            None => DeviationRecord {
                stage: Stage::Link,
                agent,
                deviation: None,
                gain: Rational::zero(),
            },
        }
    }

    /// Single-client consent changes of `elite`, with the affected agent
    /// re-optimising and everyone else held fixed.
    pub(crate) fn consent_stage(&self, elite: Elite) -> DeviationRecord {
        let l = elite.index();
        let clients = self.profile.clients(elite).len() as u32;
        let before = elite_expected_payoff(self.p, self.tally[l], clients);
        let mut best: Option<(Deviation, Rational)> = None;
        for agent in self.p.poor_agents() {
            let link = self.profile.link_of(agent);
            let (deviation, after) = if self.profile.consents(elite, agent) {
                if link != Some(elite) {
                    continue;
                }
                let options = std::iter::once(None).chain(
                    Elite::ALL
                        .into_iter()
                        .filter(|&e| e != elite && self.profile.consents(e, agent))
                        .map(Some),
                );
                let mut response: Option<([u32; 4], Rational)> = None;
                for o in options {
                    let (_, t, value) = self.best_vote(agent, o);
                    if response.as_ref().is_none_or(|r| value > r.1) {
                        response = Some((t, value));
                    }
                }
                let (t, _) = response.expect("unlinked is always available");
                (
                    Deviation::Withdraw { elite, agent },
                    elite_expected_payoff(self.p, t[l], clients - 1),
                )
            } else {
                let (_, t, value) = self.best_vote(agent, Some(elite));
                let after = if value > self.current(agent) {
                    elite_expected_payoff(self.p, t[l], clients + 1)
                } else {
                    before
                };
                (Deviation::Grant { elite, agent }, after)
            };
            let gain = after - before;
            if best.as_ref().is_none_or(|b| gain > b.1) {
                best = Some((deviation, gain));
            }
        }
        DeviationRecord {
            stage: Stage::Consent,
            agent: l,
            deviation: best.as_ref().map(|b| b.0),
            gain: best.map_or(Rational::zero(), |b| b.1),
        }
    }

    /// True when no agent has a strictly profitable deviation; stops at the
    /// first one found.
    pub(crate) fn is_equilibrium(&self) -> bool {
        self.p.poor_agents().all(|a| self.vote_stage(a).pass())
            && self.p.poor_agents().all(|a| self.link_stage(a).pass())
            && Elite::ALL.into_iter().all(|e| self.consent_stage(e).pass())
    }

    pub(crate) fn report(&self) -> DeviationReport {
        let mut records: Vec<DeviationRecord> =
            self.p.poor_agents().map(|a| self.vote_stage(a)).collect();
        records.extend(self.p.poor_agents().map(|a| self.link_stage(a)));
        records.extend(Elite::ALL.into_iter().map(|e| self.consent_stage(e)));
        let max_gain = records
            .iter()
            .map(|r| r.gain)
            .max()
            .unwrap_or_else(Rational::zero);
        let verdict = if max_gain.is_positive() {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        DeviationReport {
            records,
            max_gain,
            verdict,
        }
    }
}

/// Checks a profile for profitable unilateral deviations at every stage.
///
/// * Vote: each poor agent against every other candidate.
/// * Link: each poor agent against every consented elite and against staying
///   unlinked, re-voting optimally.
/// * Consent: each elite against granting or withdrawing consent for a
///   single agent, who then re-optimises. Larger consent changes are covered
///   by [`marginal_client_inequality_holds`](super::marginal_client_inequality_holds).
///
/// Ties count as best responses; the verdict fails only on a strictly
/// positive gain.
pub fn verify_spne(p: &GameParams, profile: &StrategyProfile) -> Result<DeviationReport, GameError> {
    profile.validate(p)?;
    Ok(Scanner::new(p, profile).report())
}
