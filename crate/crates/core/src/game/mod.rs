//! The two-period clientelism game: three elites, one non-native candidate,
//! and `n` poor voters with evenly spaced search costs.
//!
//! All arithmetic is exact ([`Rational`]); threshold comparisons such as
//! `s_k >= b(1 - theta)` must not depend on floating-point rounding.

mod enumerate;
mod export;
mod params;
mod payoff;
mod profile;
mod statics;
mod verify;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use enumerate::{
    brute_force_equilibria, enumerate_equilibria, BruteForceResult, OutcomePartition,
    PartitionCount, StrategySpace, DEFAULT_MAX_N,
};
pub use export::{
    benchmark_link_costs, construct_benchmark, elite_id, equilibrium_to_network, poor_id,
    Benchmark, BenchmarkAgent,
};
pub use params::{
    check_restrictions, marginal_client_inequality_holds, partition_sets, rational_from_f64,
    search_costs,
    voting_threshold, Check, GameParams, PiSets, RestrictionReport,
};
pub use payoff::{elite_expected_payoff, poor_expected_payoff, WinProbs};
pub use profile::{
    construct_clientelism_equilibrium, evaluate_profile, AgentOutcome, Equilibrium,
    EquilibriumOutcome, EliteOutcome, StrategyProfile,
};
pub use statics::{comparative_statics, GridSpec, StaticsRow};
pub use verify::{verify_spne, Deviation, DeviationRecord, DeviationReport, Stage, Verdict};

pub type Rational = Ratio<i128>;

/// Label of the first poor agent; poor agents are `3..=n + 2`.
pub const FIRST_POOR: usize = 3;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("parameter restrictions fail: {0}")]
    Restrictions(String),
    #[error("malformed strategy profile: {0}")]
    MalformedProfile(String),
    #[error("inconsistent beliefs: {0}")]
    Beliefs(String),
    #[error("n = {n} exceeds the enumeration limit {max_n}")]
    TooLarge { n: usize, max_n: usize },
    #[error("unknown poor agent {0}")]
    UnknownAgent(usize),
}

/// Elite 0 controls both resources; 1 and 2 control one each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Elite {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Elite {
    pub const ALL: [Elite; 3] = [Elite::Zero, Elite::One, Elite::Two];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Elite> {
        Elite::ALL.get(i).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Candidate {
    #[serde(rename = "0")]
    Elite0,
    #[serde(rename = "1")]
    Elite1,
    #[serde(rename = "2")]
    Elite2,
    #[serde(rename = "N")]
    NonNative,
}

impl Candidate {
    pub const ALL: [Candidate; 4] = [
        Candidate::Elite0,
        Candidate::Elite1,
        Candidate::Elite2,
        Candidate::NonNative,
    ];

    /// Position in a vote tally `[0, 1, 2, N]`.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl From<Elite> for Candidate {
    fn from(e: Elite) -> Self {
        Candidate::ALL[e.index()]
    }
}

impl std::fmt::Display for Candidate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Candidate::Elite0 => "elite 0",
            Candidate::Elite1 => "elite 1",
            Candidate::Elite2 => "elite 2",
            Candidate::NonNative => "N",
        })
    }
}

/// Nearest `f64` to an exact value.
pub fn to_f64(q: &Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

pub(crate) mod qser {
    use super::{to_f64, Rational};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(to_f64(q))
    }

    pub mod opt {
        use super::*;

        pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match q {
                Some(q) => s.serialize_f64(to_f64(q)),
                None => s.serialize_none(),
            }
        }
    }
}
