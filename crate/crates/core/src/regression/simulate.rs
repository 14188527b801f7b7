use std::collections::{BTreeMap, BTreeSet};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::cols::*;
use super::dataset::{truncate_days, ColumnKind, Dataset};
use super::suite::{build_model_suite, fit_model, VillageControls};
use super::RegressionError;
use crate::game::{construct_clientelism_equilibrium, equilibrium_to_network, GameParams};
use crate::graph::{EntityId, ServiceCategory, ServiceEdge, VillageNetwork};
use crate::indices::{compute_indices, HouseholdIndexRecord, LinkClass};
use crate::Execution;

const CASTE_SHARES: [f64; 5] = [0.341, 0.435, 0.148, 0.055, 0.021];
const EDUCATION_SHARES: [f64; 3] = [0.79, 0.161, 0.049];

/// Participation probability before the client effect lies in
/// [BASE_MIN, BASE_MAX]; effects are limited so it stays inside [0, 1].
const BASE_MIN: f64 = 0.05;
const BASE_MAX: f64 = 0.65;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomNetworkConfig {
    /// External elites per village.
    pub elites: usize,
    /// Probability a household receives services from one elite.
    pub elite_link: f64,
    /// Probability such a household gives something back.
    pub elite_reciprocate: f64,
    /// Probability a household receives from another sampled household.
    pub peer_link: f64,
    pub peer_reciprocate: f64,
    /// Probability of a one-off service from an outside provider.
    pub outside_link: f64,
    /// Probability that one sampled household serves eight others.
    pub household_patron: f64,
}

impl Default for RandomNetworkConfig {
    fn default() -> Self {
        RandomNetworkConfig {
            elites: 3,
            elite_link: 0.35,
            elite_reciprocate: 0.1,
            peer_link: 0.3,
            peer_reciprocate: 0.5,
            outside_link: 0.15,
            household_patron: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkSource {
    Random(RandomNetworkConfig),
    /// The clientelism equilibrium export plus random reciprocal peer links;
    /// households per village must equal `n`.
    Game(GameParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSizes {
    /// Additive client effect on the participation probability.
    pub participation_client: f64,
    /// Additive client effect on days worked by participants.
    pub days_client: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyConfig {
    pub villages: usize,
    pub households: usize,
    pub source: NetworkSource,
    pub effects: EffectSizes,
}

impl SurveyConfig {
    pub fn random(villages: usize, households: usize, client_effect: f64) -> Self {
        SurveyConfig {
            villages,
            households,
            source: NetworkSource::Random(RandomNetworkConfig::default()),
            effects: EffectSizes {
                participation_client: client_effect,
                days_client: 5.0,
            },
        }
    }

    fn validate(&self) -> Result<(), RegressionError> {
        let bad = |m: String| Err(RegressionError::InvalidConfig(m));
        if self.villages < 2 {
            return bad(format!("need at least 2 villages, got {}", self.villages));
        }
        if self.households < 2 {
            return bad(format!("need at least 2 households, got {}", self.households));
        }
        let e = self.effects;
        let lo = -BASE_MIN;
        let hi = 1.0 - BASE_MAX;
        if !(lo..=hi).contains(&e.participation_client) {
            return bad(format!(
                "participation effect {} outside [{lo}, {hi}]",
                e.participation_client
            ));
        }
        if !e.days_client.is_finite() || e.days_client.abs() > 100.0 {
            return bad(format!("days effect {} outside [-100, 100]", e.days_client));
        }
        match &self.source {
            NetworkSource::Random(r) => {
                let probs = [
                    r.elite_link,
                    r.elite_reciprocate,
                    r.peer_link,
                    r.peer_reciprocate,
                    r.outside_link,
                    r.household_patron,
                ];
                if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return bad("network probabilities must lie in [0, 1]".into());
                }
                if r.elites == 0 && r.elite_link > 0.0 {
                    return bad("elite_link > 0 needs at least one elite".into());
                }
            }
            NetworkSource::Game(p) => {
                if p.n != self.households {
                    return bad(format!(
                        "game n = {} but {} households per village",
                        p.n, self.households
                    ));
                }
            }
        }
        Ok(())
    }
}

struct HouseholdDraw {
    caste: u32,
    low_skilled: u64,
    education: u32,
    stable: bool,
    remittance: bool,
    land: f64,
    assets: u64,
    political: bool,
    mediates: bool,
    visits: bool,
    uniform: f64,
    days: f64,
}

impl HouseholdDraw {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let caste = WeightedIndex::new(CASTE_SHARES).expect("static weights");
        let education = WeightedIndex::new(EDUCATION_SHARES).expect("static weights");
        HouseholdDraw {
            caste: caste.sample(rng) as u32,
            low_skilled: Poisson::new(2.5).expect("positive").sample(rng) as u64,
            education: education.sample(rng) as u32,
            stable: rng.random_bool(0.121),
            remittance: rng.random_bool(0.171),
            // mean 1.46, sd about 2.6
            land: Gamma::new(0.315, 4.63).expect("positive").sample(rng),
            assets: Binomial::new(6, 0.3).expect("valid").sample(rng),
            political: rng.random_bool(0.062),
            mediates: rng.random_bool(0.22),
            visits: rng.random_bool(0.272),
            uniform: rng.random(),
            days: Gamma::new(1.5, 9.0).expect("positive").sample(rng),
        }
    }

    fn base_probability(&self, village_shift: f64) -> f64 {
        0.45 + village_shift - 0.10 * f64::from(self.stable)
            - 0.05 * f64::from(self.education > 0)
            + 0.01 * (self.low_skilled.min(6) as f64)
            - 0.01 * self.land.min(5.0)
            - 0.01 * self.assets as f64
            + 0.04 * f64::from(self.visits)
            - 0.04 * f64::from(self.remittance)
    }
}

struct VillageDraw {
    network: VillageNetwork,
    /// provider -> (political, business)
    patron_traits: BTreeMap<EntityId, (bool, bool)>,
    pradhan_caste: u32,
    shift: f64,
    characteristics: [f64; 4],
    households: BTreeMap<EntityId, HouseholdDraw>,
}

fn random_category(rng: &mut ChaCha8Rng) -> ServiceCategory {
    *ServiceCategory::ALL.choose(rng).expect("non-empty")
}

fn household_id(i: usize) -> EntityId {
    EntityId::new(format!("h{i:03}"))
}

fn random_network(
    village: &str,
    n: usize,
    cfg: &RandomNetworkConfig,
    rng: &mut ChaCha8Rng,
) -> VillageNetwork {
    let ids: Vec<EntityId> = (0..n).map(household_id).collect();
    let elites: Vec<EntityId> = (0..cfg.elites).map(|m| EntityId::new(format!("E{m}"))).collect();
    let mut external: BTreeSet<EntityId> = elites.iter().cloned().collect();
    let mut edges = Vec::new();
    for (i, hh) in ids.iter().enumerate() {
        if !elites.is_empty() && rng.random_bool(cfg.elite_link) {
            let elite = elites.choose(rng).expect("non-empty");
            let k = rng.random_range(1..=3);
            for cat in ServiceCategory::ALL.choose_multiple(rng, k) {
                edges.push(ServiceEdge::new(hh.clone(), elite.clone(), *cat));
            }
            if rng.random_bool(cfg.elite_reciprocate) {
                edges.push(ServiceEdge::new(elite.clone(), hh.clone(), random_category(rng)));
            }
        }
        if n > 1 && rng.random_bool(cfg.peer_link) {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            edges.push(ServiceEdge::new(hh.clone(), ids[j].clone(), random_category(rng)));
            if rng.random_bool(cfg.peer_reciprocate) {
                edges.push(ServiceEdge::new(ids[j].clone(), hh.clone(), random_category(rng)));
            }
        }
        if rng.random_bool(cfg.outside_link) {
            let outsider = EntityId::new(format!("X{i:03}"));
            edges.push(ServiceEdge::new(hh.clone(), outsider.clone(), random_category(rng)));
            external.insert(outsider);
        }
    }
    if n > 1 && rng.random_bool(cfg.household_patron) {
        let patron = rng.random_range(0..n);
        let others: Vec<usize> = (0..n).filter(|&j| j != patron).collect();
        for &j in others.choose_multiple(rng, 8.min(others.len())) {
            edges.push(ServiceEdge::new(ids[j].clone(), ids[patron].clone(), random_category(rng)));
        }
    }
    VillageNetwork::from_parts(village, ids, external, edges)
}

fn game_network(village: &str, base: &VillageNetwork, rng: &mut ChaCha8Rng) -> VillageNetwork {
    let poor: Vec<EntityId> = base.sampled_households().iter().cloned().collect();
    let mut edges: Vec<ServiceEdge> = base.edges().iter().cloned().collect();
    let n = poor.len();
    for i in 0..n {
        if n > 1 && rng.random_bool(0.3) {
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            edges.push(ServiceEdge::new(poor[i].clone(), poor[j].clone(), random_category(rng)));
            edges.push(ServiceEdge::new(poor[j].clone(), poor[i].clone(), random_category(rng)));
        }
    }
    VillageNetwork::from_parts(
        village,
        poor,
        base.external_providers().iter().cloned(),
        edges,
    )
}

fn village_seed_rng(seed: u64, village: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(village as u64);
    rng
}

fn draw_village(
    cfg: &SurveyConfig,
    game_base: Option<&VillageNetwork>,
    seed: u64,
    v: usize,
) -> VillageDraw {
    let mut rng = village_seed_rng(seed, v);
    let name = format!("V{:02}", v + 1);
    let network = match (&cfg.source, game_base) {
        (NetworkSource::Random(r), _) => random_network(&name, cfg.households, r, &mut rng),
        (NetworkSource::Game(_), Some(base)) => game_network(&name, base, &mut rng),
        (NetworkSource::Game(_), None) => unreachable!("game base built up front"),
    };
    let patron_traits = network
        .providers()
        .map(|p| (p.clone(), (rng.random_bool(0.5), rng.random_bool(0.4))))
        .collect();
    let pradhan_caste = WeightedIndex::new(CASTE_SHARES)
        .expect("static weights")
        .sample(&mut rng) as u32;
    let shift = rng.random_range(-0.1..=0.1);
    let characteristics = [
        rng.random_range(1.0..40.0),
        rng.random_range(0.3..0.95),
        Normal::<f64>::new(1100.0, 300.0)
            .expect("positive sd")
            .sample(&mut rng)
            .max(200.0),
        rng.random_range(0.0..0.7),
    ];
    let households = network
        .sampled_households()
        .iter()
        .map(|id| (id.clone(), HouseholdDraw::draw(&mut rng)))
        .collect();
    VillageDraw {
        network,
        patron_traits,
        pradhan_caste,
        shift,
        characteristics,
        households,
    }
}

/// Draws a synthetic survey: per village a network, its indices, household
/// covariates, and outcomes from a linear probability model with the given
/// client effect. Patron households are dropped. Reproducible from `seed`
/// whatever `exec` is.
pub fn simulate_survey(
    cfg: &SurveyConfig,
    seed: u64,
    exec: Execution,
) -> Result<Dataset, RegressionError> {
    cfg.validate()?;
    let game_base = match &cfg.source {
        NetworkSource::Game(p) => {
            let eq = construct_clientelism_equilibrium(p)?;
            Some(equilibrium_to_network(p, &eq.profile))
        }
        NetworkSource::Random(_) => None,
    };
    let draws = exec.map_range(cfg.villages, |v| draw_village(cfg, game_base.as_ref(), seed, v));
    let networks: Vec<VillageNetwork> = draws.iter().map(|d| d.network.clone()).collect();
    let run = compute_indices(&networks, exec);
    let scores: BTreeMap<&str, u64> = run
        .patron_reports
        .iter()
        .map(|r| (r.village_id.as_str(), r.clientelism_score))
        .collect();
    let by_village: BTreeMap<&str, &VillageDraw> = draws
        .iter()
        .map(|d| (d.network.village_id(), d))
        .collect();

    let rows: Vec<&HouseholdIndexRecord> = run
        .households
        .iter()
        .filter(|h| !h.is_patron_household)
        .collect();
    let mut builder = ColumnsBuilder::default();
    for rec in &rows {
        let village = by_village[rec.village_id.as_str()];
        let hh = &village.households[&rec.household];
        builder.push(rec, village, hh, scores[rec.village_id.as_str()], &cfg.effects)?;
    }
    let mut data = Dataset::new(
        rows.iter().map(|r| r.village_id.clone()).collect(),
        rows.iter().map(|r| r.household.as_str().to_owned()).collect(),
    )?;
    for (name, kind, values) in builder.columns {
        data.insert(name, kind, values)?;
    }
    Ok(data)
}

#[derive(Default)]
struct ColumnsBuilder {
    columns: Vec<(&'static str, ColumnKind, Vec<f64>)>,
}

impl ColumnsBuilder {
    fn set(&mut self, name: &'static str, kind: ColumnKind, value: f64) {
        match self.columns.iter_mut().find(|(n, _, _)| *n == name) {
            Some((_, _, values)) => values.push(value),
            None => self.columns.push((name, kind, vec![value])),
        }
    }

    fn push(
        &mut self,
        rec: &HouseholdIndexRecord,
        village: &VillageDraw,
        hh: &HouseholdDraw,
        score: u64,
        effects: &EffectSizes,
    ) -> Result<(), RegressionError> {
        use ColumnKind::*;
        let b = f64::from;
        let client = rec.is_client;
        let any_patron = |pred: fn(&(bool, bool)) -> bool| {
            rec.patron_ids
                .iter()
                .any(|p| village.patron_traits.get(p).is_some_and(pred))
        };
        let political = any_patron(|t| t.0);
        let business = any_patron(|t| t.1);
        let same_caste = hh.caste == village.pradhan_caste;

        let prob = hh.base_probability(village.shift) + effects.participation_client * b(client);
        let participates = hh.uniform < prob;
        let days = if participates {
            truncate_days((hh.days + effects.days_client * b(client)).max(0.0).round())?
        } else {
            0.0
        };

        self.set(PARTICIPATION, Binary, b(participates));
        self.set(DAYS_WORKED, Count, days);
        self.set(LINK_RECIPROCAL_ONLY, Binary, b(rec.link_class == LinkClass::ReciprocalOnly));
        self.set(LINK_UNIDIRECTIONAL, Binary, b(rec.link_class == LinkClass::Unidirectional));
        self.set(DEGREE_RECIPROCAL, Count, f64::from(rec.degree_reciprocal));
        self.set(DEGREE_UNIDIRECTIONAL, Count, f64::from(rec.degree_unidirectional));
        self.set(CONCENTRATION_Z, Continuous, rec.concentration_z);
        self.set(WEIGHTED_CONCENTRATION_Z, Continuous, rec.weighted_z);
        self.set(CLIENT, Binary, b(client));
        self.set(
            UNIDIRECTIONAL_NONCLIENT,
            Binary,
            b(!client && rec.link_class == LinkClass::Unidirectional),
        );
        self.set(CLIENT_POLITICAL, Binary, b(client && political));
        self.set(CLIENT_NONPOLITICAL, Binary, b(client && !political));
        self.set(CLIENT_BUSINESS, Binary, b(client && business));
        self.set(CLIENT_NONBUSINESS, Binary, b(client && !business));
        self.set(CLIENT_SAME_CASTE, Binary, b(client && same_caste));
        self.set(CLIENT_OTHER_CASTE, Binary, b(client && !same_caste));

        self.set(CASTE, Categorical, f64::from(hh.caste));
        self.set(LOW_SKILLED, Count, hh.low_skilled as f64);
        self.set(EDUCATION, Categorical, f64::from(hh.education));
        self.set(STABLE_OCCUPATION, Binary, b(hh.stable));
        self.set(REMITTANCE, Binary, b(hh.remittance));
        self.set(LAND, Continuous, hh.land);
        self.set(ASSETS, Count, hh.assets as f64);
        self.set(POLITICAL_MEMBER, Binary, b(hh.political));
        self.set(MEDIATES, Binary, b(hh.mediates));
        self.set(VISITS_OFFICIALS, Binary, b(hh.visits));

        let [distance, agri, rain, irrigated] = village.characteristics;
        self.set(DISTANCE_TOWN, Continuous, distance);
        self.set(AGRI_SHARE, Continuous, agri);
        self.set(RAINFALL, Continuous, rain);
        self.set(IRRIGATED, Continuous, irrigated);
        self.set(CLIENTELISM_SCORE, Count, score as f64);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedEstimate {
    pub seed: u64,
    pub estimate: f64,
    pub se: f64,
    pub p_value: f64,
}

/// Simulates one survey per seed and fits the fixed-effect client model on
/// participation. Results come back in seed order.
pub fn client_effect_experiment(
    cfg: &SurveyConfig,
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<SeedEstimate>, RegressionError> {
    cfg.validate()?;
    let spec = build_model_suite(PARTICIPATION)
        .into_iter()
        .find(|s| s.model == 5 && s.variant == VillageControls::FixedEffects)
        .expect("suite has model 5");
    exec.map(seeds, |&seed| {
        let data = simulate_survey(cfg, seed, Execution::Sequential)?;
        let fit = fit_model(&data, &spec)?;
        let i = fit.index_of(CLIENT).expect("client is a regressor");
        Ok(SeedEstimate {
            seed,
            estimate: fit.coef[i],
            se: fit.se(i),
            p_value: fit.p_value(i),
        })
    })
    .into_iter()
    .collect()
}
