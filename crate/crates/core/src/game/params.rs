use num_traits::{One, Signed};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{qser, to_f64, Elite, GameError, Rational, FIRST_POOR};

/// Model primitives. Values are stored exactly; JSON numbers are read through
/// their shortest decimal representation, so `0.7` is exactly `7/10`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameParams {
    /// Number of poor agents.
    pub n: usize,
    /// Maximum per-capita public work.
    pub b: Rational,
    /// Elite delivery efficiency.
    pub theta: Rational,
    /// Cost of a link with elite 0.
    pub c: Rational,
    /// Ego rent from office.
    pub r: Rational,
    /// Per-unit effort cost.
    pub e: Rational,
}

const MAX_FRACTION_DIGITS: usize = 12;

/// Exact rational value of the shortest decimal that round-trips to `x`.
pub fn rational_from_f64(name: &'static str, x: f64) -> Result<Rational, GameError> {
    let bad = |reason: &str| GameError::InvalidParam {
        name,
        reason: reason.to_owned(),
    };
    if !x.is_finite() {
        return Err(bad("not finite"));
    }
    if x.abs() >= 1e15 {
        return Err(bad("magnitude too large"));
    }
    let text = format!("{x}");
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if frac_part.len() > MAX_FRACTION_DIGITS {
        return Err(bad("more than 12 decimal digits"));
    }
    let numer: i128 = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| bad("unparseable"))?;
    let denom = 10i128.pow(frac_part.len() as u32);
    let q = Rational::new(numer, denom);
    Ok(if negative { -q } else { q })
}

impl GameParams {
    pub fn new(n: usize, b: f64, theta: f64, c: f64, r: f64, e: f64) -> Result<Self, GameError> {
        Self::exact(
            n,
            rational_from_f64("b", b)?,
            rational_from_f64("theta", theta)?,
            rational_from_f64("c", c)?,
            rational_from_f64("R", r)?,
            rational_from_f64("e", e)?,
        )
    }

    pub fn exact(
        n: usize,
        b: Rational,
        theta: Rational,
        c: Rational,
        r: Rational,
        e: Rational,
    ) -> Result<Self, GameError> {
        let invalid = |name, reason: &str| GameError::InvalidParam {
            name,
            reason: reason.to_owned(),
        };
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if theta.is_negative() || theta > Rational::one() {
            return Err(invalid("theta", "must lie in [0, 1]"));
        }
        for (name, v) in [("b", &b), ("c", &c), ("R", &r), ("e", &e)] {
            if v.is_negative() {
                return Err(invalid(name, "must be non-negative"));
            }
        }
        Ok(GameParams { n, b, theta, c, r, e })
    }

    /// The reference point used throughout the tests: n = 10, b = 3,
    /// theta = 0.7, c = 1.1, R = 100, e = 0.1.
    pub fn reference() -> Self {
        GameParams::new(10, 3.0, 0.7, 1.1, 100.0, 0.1).expect("valid")
    }

    pub(crate) fn n_q(&self) -> Rational {
        Rational::from_integer(self.n as i128)
    }

    /// Public work an elected elite delivers per client.
    pub fn elite_work(&self) -> Rational {
        self.theta * self.b
    }

    /// `b (1 - theta)`, the efficiency gap of elites.
    pub fn gap(&self) -> Rational {
        self.b * (Rational::one() - self.theta)
    }

    /// Search cost of poor agent `agent` (labelled from 3).
    pub fn search_cost(&self, agent: usize) -> Result<Rational, GameError> {
        if agent < FIRST_POOR || agent >= FIRST_POOR + self.n {
            return Err(GameError::UnknownAgent(agent));
        }
        Ok(Rational::new((agent - FIRST_POOR + 1) as i128, self.n as i128))
    }

    pub fn poor_agents(&self) -> std::ops::Range<usize> {
        FIRST_POOR..FIRST_POOR + self.n
    }
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    b: f64,
    theta: f64,
    c: f64,
    #[serde(rename = "R")]
    r: f64,
    e: f64,
}

impl Serialize for GameParams {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawParams {
            n: self.n,
            b: to_f64(&self.b),
            theta: to_f64(&self.theta),
            c: to_f64(&self.c),
            r: to_f64(&self.r),
            e: to_f64(&self.e),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GameParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawParams::deserialize(d)?;
        GameParams::new(raw.n, raw.b, raw.theta, raw.c, raw.r, raw.e)
            .map_err(serde::de::Error::custom)
    }
}

/// Search costs `[1/n, 2/n, ..., 1]` of poor agents `3..=n + 2`.
pub fn search_costs(n: usize) -> Result<Vec<Rational>, GameError> {
    if n == 0 {
        return Err(GameError::InvalidParam {
            name: "n",
            reason: "must be at least 1".into(),
        });
    }
    Ok((1..=n as i128).map(|i| Rational::new(i, n as i128)).collect())
}

/// One restriction: whether it holds and by how much.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub pass: bool,
    /// Distance to the boundary; positive when satisfied with room to spare.
    #[serde(with = "qser")]
    pub slack: Rational,
}

impl Check {
    fn weak(slack: Rational) -> Check {
        Check {
            pass: !slack.is_negative(),
            slack,
        }
    }

    fn strict(slack: Rational) -> Check {
        Check {
            pass: slack.is_positive(),
            slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictionReport {
    /// `b >= 3`.
    pub a1: Check,
    /// `1 < c < min{2b(1 - theta), 2}`.
    pub a2: Check,
    /// `1/n < min{1, b(1 - theta)} - max{c/2, b(1 - theta)/2}`.
    pub a3: Check,
    /// `R >= 2 n e theta b`.
    pub rent: Check,
}

impl RestrictionReport {
    pub fn all_pass(&self) -> bool {
        self.a1.pass && self.a2.pass && self.a3.pass && self.rent.pass
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("a3", &self.a3),
            ("rent", &self.rent),
        ]
        .into_iter()
        .filter(|(_, c)| !c.pass)
        .map(|(name, _)| name)
        .collect()
    }
}

pub fn check_restrictions(p: &GameParams) -> RestrictionReport {
    let one = Rational::one();
    let two = Rational::from_integer(2);
    let gap = p.gap();
    let a1 = Check::weak(p.b - Rational::from_integer(3));

    let upper = (two * gap).min(two);
    let lower_slack = p.c - one;
    let upper_slack = upper - p.c;
    let a2 = Check {
        pass: lower_slack.is_positive() && upper_slack.is_positive(),
        slack: lower_slack.min(upper_slack),
    };

    let rhs = one.min(gap) - (p.c / two).max(gap / two);
    let a3 = Check::strict(rhs - one / p.n_q());

    let rent = Check::weak(p.r - two * p.n_q() * p.e * p.elite_work());
    RestrictionReport { a1, a2, a3, rent }
}

/// Checks `s [R - e m theta b] >= (s - 1) [R - e (m - 1) theta b]` for every
/// `1 <= s, m <= n`: an elite never loses by adding a client who votes for
/// her.
pub fn marginal_client_inequality_holds(p: &GameParams) -> bool {
    let tb = p.elite_work();
    (1..=p.n as i128).all(|s| {
        (1..=p.n as i128).all(|m| {
            let s_q = Rational::from_integer(s);
            let m_q = Rational::from_integer(m);
            let with = s_q * (p.r - p.e * m_q * tb);
            let without = (s_q - Rational::one()) * (p.r - p.e * (m_q - Rational::one()) * tb);
            with >= without
        })
    })
}

/// Poor agents split by the voting thresholds of elite 0 and elites 1/2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PiSets {
    /// `s_k >= b(1 - theta)/2`.
    pub pi0: Vec<usize>,
    /// `s_k >= b(1 - theta)`.
    pub pi1: Vec<usize>,
    /// Complement of `pi0`.
    pub pi_u: Vec<usize>,
}

pub fn partition_sets(p: &GameParams) -> PiSets {
    let t0 = voting_threshold(p, Elite::Zero);
    let t1 = voting_threshold(p, Elite::One);
    let mut sets = PiSets {
        pi0: Vec::new(),
        pi1: Vec::new(),
        pi_u: Vec::new(),
    };
    for agent in p.poor_agents() {
        let s = p.search_cost(agent).expect("poor agent");
        if s >= t0 {
            sets.pi0.push(agent);
        } else {
            sets.pi_u.push(agent);
        }
        if s >= t1 {
            sets.pi1.push(agent);
        }
    }
    sets
}

/// Search cost at or above which a client of `patron` votes for the patron.
///
/// Elite 0 withdraws access to both resources when she loses, elites 1 and 2
/// only to one, hence the factor of two.
pub fn voting_threshold(p: &GameParams, patron: Elite) -> Rational {
    match patron {
        Elite::Zero => p.gap() / Rational::from_integer(2),
        Elite::One | Elite::Two => p.gap(),
    }
}
