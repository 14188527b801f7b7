//! Least squares with village fixed effects and cluster-robust covariance,
//! the household model suite, and a synthetic survey generator.

mod dataset;
mod ols;
mod simulate;
mod suite;
mod within;

use thiserror::Error;

pub use dataset::{
    read_dataset, truncate_days, write_dataset, Column, ColumnKind, ColumnMeta, Dataset,
    DatasetMeta, DAYS_CAP,
};
pub use ols::{ols_cluster_fit, FitResult};
pub use simulate::{
    client_effect_experiment, simulate_survey, EffectSizes, NetworkSource, RandomNetworkConfig,
    SeedEstimate, SurveyConfig,
};
pub use suite::{
    build_model_suite, fit_model, run_suite, suite_table_csv, FitSummary, ModelSpec, SuiteRow,
    VillageControls, HOUSEHOLD_CONTROLS, VILLAGE_CHARACTERISTICS,
};
pub use within::{demean_in_place, within_demean, Demeaned};

/// Canonical column names.
pub mod cols {
    pub const PARTICIPATION: &str = "participation";
    pub const DAYS_WORKED: &str = "days_worked";

    pub const LINK_RECIPROCAL_ONLY: &str = "link_reciprocal_only";
    pub const LINK_UNIDIRECTIONAL: &str = "link_unidirectional";
    pub const DEGREE_RECIPROCAL: &str = "degree_reciprocal";
    pub const DEGREE_UNIDIRECTIONAL: &str = "degree_unidirectional";
    pub const CONCENTRATION_Z: &str = "concentration_z";
    pub const WEIGHTED_CONCENTRATION_Z: &str = "weighted_concentration_z";
    pub const CLIENT: &str = "client";
    pub const UNIDIRECTIONAL_NONCLIENT: &str = "unidirectional_nonclient";
    pub const CLIENT_POLITICAL: &str = "client_political_patron";
    pub const CLIENT_NONPOLITICAL: &str = "client_nonpolitical_patron";
    pub const CLIENT_BUSINESS: &str = "client_business_patron";
    pub const CLIENT_NONBUSINESS: &str = "client_nonbusiness_patron";
    pub const CLIENT_SAME_CASTE: &str = "client_same_caste_pradhan";
    pub const CLIENT_OTHER_CASTE: &str = "client_other_caste_pradhan";

    pub const CASTE: &str = "caste";
    pub const LOW_SKILLED: &str = "low_skilled_members";
    pub const EDUCATION: &str = "education";
    pub const STABLE_OCCUPATION: &str = "stable_occupation";
    pub const REMITTANCE: &str = "remittance";
    pub const LAND: &str = "land_acres";
    pub const ASSETS: &str = "asset_index";
    pub const POLITICAL_MEMBER: &str = "political_member";
    pub const MEDIATES: &str = "mediates_disputes";
    pub const VISITS_OFFICIALS: &str = "visits_officials";

    pub const DISTANCE_TOWN: &str = "distance_town_km";
    pub const AGRI_SHARE: &str = "agri_share";
    pub const RAINFALL: &str = "rainfall_mm";
    pub const IRRIGATED: &str = "irrigated_share";
    pub const CLIENTELISM_SCORE: &str = "clientelism_score";
}

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{name}`: {reason}")]
    BadColumn { name: String, reason: String },
    #[error("row {row} has an empty group label")]
    EmptyGroup { row: usize },
    #[error("dataset has no rows")]
    EmptyData,
    #[error("design matrix is rank deficient; collinear columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("need at least two clusters, got {0}")]
    TooFewClusters(usize),
    #[error("need more observations ({n}) than regressors ({k})")]
    TooFewObservations { n: usize, k: usize },
    #[error("days worked must be non-negative, got {0}")]
    NegativeDays(f64),
    #[error("invalid simulation setting: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Game(#[from] crate::game::GameError),
}
