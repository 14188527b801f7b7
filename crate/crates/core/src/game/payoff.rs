use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{qser, Candidate, Elite, GameError, GameParams, Rational};

/// Election lottery: each candidate wins with her vote share.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WinProbs {
    #[serde(rename = "alpha_0", with = "qser")]
    pub elite0: Rational,
    #[serde(rename = "alpha_1", with = "qser")]
    pub elite1: Rational,
    #[serde(rename = "alpha_2", with = "qser")]
    pub elite2: Rational,
    #[serde(rename = "beta", with = "qser")]
    pub non_native: Rational,
}

impl WinProbs {
    pub fn from_tally(tally: &[u32; 4], n: usize) -> WinProbs {
        let share = |v: u32| Rational::new(v as i128, n as i128);
        WinProbs {
            elite0: share(tally[0]),
            elite1: share(tally[1]),
            elite2: share(tally[2]),
            non_native: share(tally[3]),
        }
    }

    pub fn of(&self, c: Candidate) -> Rational {
        match c {
            Candidate::Elite0 => self.elite0,
            Candidate::Elite1 => self.elite1,
            Candidate::Elite2 => self.elite2,
            Candidate::NonNative => self.non_native,
        }
    }

    pub fn elite(&self, e: Elite) -> Rational {
        self.of(e.into())
    }
}

/// Lifetime payoff of a poor agent with search cost `s`, given win
/// probabilities that already include the agent's own vote.
///
/// Resource benefits are identical across channels and omitted; only public
/// work, search costs and the link cost enter.
pub(crate) fn poor_payoff(
    p: &GameParams,
    s: Rational,
    link: Option<Elite>,
    win: &WinProbs,
) -> Rational {
    let one = Rational::one();
    let two = Rational::from_integer(2);
    let from_n = win.non_native * p.b;
    match link {
        // Both resources through the link; both bought at market in period 2
        // if elite 0 loses and withdraws consent.
        Some(Elite::Zero) => {
            let a = win.elite0;
            a * p.elite_work() - (one - a) * two * s + from_n - p.c
        }
        // One resource through the free link, the other bought in both
        // periods; the linked resource is lost in period 2 if the patron
        // loses.
        Some(e) => {
            let a = win.elite(e);
            a * p.elite_work() - (one - a) * s + from_n - two * s
        }
        None => from_n - Rational::from_integer(4) * s,
    }
}

/// Expected lifetime payoff of poor `agent` under `beliefs`.
///
/// `beliefs` must be a probability vector over the four candidates that
/// accounts for the agent's own vote (the voted candidate has probability at
/// least `1/n`).
pub fn poor_expected_payoff(
    p: &GameParams,
    agent: usize,
    link: Option<Elite>,
    vote: Candidate,
    beliefs: &WinProbs,
) -> Result<Rational, GameError> {
    let s = p.search_cost(agent)?;
    let probs = Candidate::ALL.map(|c| beliefs.of(c));
    if probs.iter().any(Signed::is_negative) {
        return Err(GameError::Beliefs("negative win probability".into()));
    }
    let total: Rational = probs.iter().sum();
    if total != Rational::one() {
        return Err(GameError::Beliefs(format!(
            "win probabilities sum to {total}, not 1"
        )));
    }
    if beliefs.of(vote) < Rational::new(1, p.n as i128) {
        return Err(GameError::Beliefs(format!(
            "{vote} has less than one vote although agent {agent} votes for her"
        )));
    }
    Ok(poor_payoff(p, s, link, beliefs))
}

/// Expected payoff `(votes / n) [R - e clients theta b]` of an elite.
pub fn elite_expected_payoff(p: &GameParams, votes: u32, clients: u32) -> Rational {
    if votes == 0 {
        return Rational::zero();
    }
    let share = Rational::new(votes as i128, p.n as i128);
    share * (p.r - p.e * Rational::from_integer(clients as i128) * p.elite_work())
}
