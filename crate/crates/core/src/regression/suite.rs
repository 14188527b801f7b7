use std::io::Write;

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use super::cols::*;
use super::dataset::{ColumnKind, Dataset};
use super::ols::{ols_cluster_fit, FitResult};
use super::within::demean_in_place;
use super::RegressionError;
use crate::Execution;

pub const HOUSEHOLD_CONTROLS: [&str; 10] = [
    CASTE,
    LOW_SKILLED,
    EDUCATION,
    STABLE_OCCUPATION,
    REMITTANCE,
    LAND,
    ASSETS,
    POLITICAL_MEMBER,
    MEDIATES,
    VISITS_OFFICIALS,
];

pub const VILLAGE_CHARACTERISTICS: [&str; 5] =
    [DISTANCE_TOWN, AGRI_SHARE, RAINFALL, IRRIGATED, CLIENTELISM_SCORE];

/// How village heterogeneity enters a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VillageControls {
    /// Village fixed effects via the within transformation.
    FixedEffects,
    /// Intercept plus [`VILLAGE_CHARACTERISTICS`].
    Characteristics,
    /// Intercept only.
    None,
}

impl VillageControls {
    pub fn as_str(self) -> &'static str {
        match self {
            VillageControls::FixedEffects => "fe",
            VillageControls::Characteristics => "village_chars",
            VillageControls::None => "pooled",
        }
    }
}

impl Serialize for VillageControls {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub model: u8,
    pub label: String,
    pub outcome: String,
    pub focal: Vec<String>,
    pub controls: Vec<String>,
    pub variant: VillageControls,
}

fn focal_sets() -> [(u8, &'static str, Vec<&'static str>); 9] {
    [
        (1, "link type", vec![LINK_RECIPROCAL_ONLY, LINK_UNIDIRECTIONAL]),
        (2, "degrees", vec![DEGREE_RECIPROCAL, DEGREE_UNIDIRECTIONAL]),
        (3, "concentration", vec![CONCENTRATION_Z, DEGREE_RECIPROCAL]),
        (4, "weighted concentration", vec![WEIGHTED_CONCENTRATION_Z, DEGREE_RECIPROCAL]),
        (5, "client", vec![CLIENT, DEGREE_RECIPROCAL]),
        (
            6,
            "client or unidirectional receiver",
            vec![UNIDIRECTIONAL_NONCLIENT, CLIENT, DEGREE_RECIPROCAL],
        ),
        (
            7,
            "political patron",
            vec![CLIENT_POLITICAL, CLIENT_NONPOLITICAL, DEGREE_RECIPROCAL],
        ),
        (
            8,
            "business patron",
            vec![CLIENT_BUSINESS, CLIENT_NONBUSINESS, DEGREE_RECIPROCAL],
        ),
        (
            9,
            "pradhan caste",
            vec![CLIENT_SAME_CASTE, CLIENT_OTHER_CASTE, DEGREE_RECIPROCAL],
        ),
    ]
}

/// Models 1 to 9 for `outcome`, each in the fixed-effect and the
/// village-characteristics variant (18 specs, model-major).
pub fn build_model_suite(outcome: &str) -> Vec<ModelSpec> {
    let controls: Vec<String> = HOUSEHOLD_CONTROLS.iter().map(|s| s.to_string()).collect();
    focal_sets()
        .into_iter()
        .flat_map(|(model, label, focal)| {
            [VillageControls::FixedEffects, VillageControls::Characteristics].map(|variant| {
                ModelSpec {
                    model,
                    label: label.to_owned(),
                    outcome: outcome.to_owned(),
                    focal: focal.iter().map(|s| s.to_string()).collect(),
                    controls: controls.clone(),
                    variant,
                }
            })
        })
        .collect()
}

/// Design columns for `names`, expanding categorical columns to indicators
/// for every observed level except the smallest.
fn design_columns(
    data: &Dataset,
    names: &[String],
) -> Result<(Vec<String>, Vec<Vec<f64>>), RegressionError> {
    let mut out_names = Vec::new();
    let mut out_cols = Vec::new();
    for name in names {
        let col = data.column(name)?;
        if col.kind == ColumnKind::Categorical {
            let mut levels: Vec<u64> = col.values.iter().map(|&v| v as u64).collect();
            levels.sort_unstable();
            levels.dedup();
            for level in levels.into_iter().skip(1) {
                out_names.push(format!("{name}={level}"));
                out_cols.push(
                    col.values
                        .iter()
                        .map(|&v| if v as u64 == level { 1.0 } else { 0.0 })
                        .collect(),
                );
            }
        } else {
            out_names.push(name.clone());
            out_cols.push(col.values.clone());
        }
    }
    Ok((out_names, out_cols))
}

/// Fits one specification, clustering by village.
pub fn fit_model(data: &Dataset, spec: &ModelSpec) -> Result<FitResult, RegressionError> {
    if data.is_empty() {
        return Err(RegressionError::EmptyData);
    }
    let mut regressors: Vec<String> = spec.focal.clone();
    regressors.extend(spec.controls.iter().cloned());
    if spec.variant == VillageControls::Characteristics {
        regressors.extend(VILLAGE_CHARACTERISTICS.iter().map(|s| s.to_string()));
    }
    let (mut names, mut columns) = design_columns(data, &regressors)?;
    if spec.variant != VillageControls::FixedEffects {
        names.insert(0, "const".into());
        columns.insert(0, vec![1.0; data.len()]);
    }
    let n = data.len();
    let mut x = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
    let mut y = DMatrix::from_column_slice(n, 1, data.values(&spec.outcome)?);
    let (groups, n_groups) = data.village_index();
    let absorbed = if spec.variant == VillageControls::FixedEffects {
        demean_in_place(&mut x, &groups, n_groups);
        demean_in_place(&mut y, &groups, n_groups);
        n_groups
    } else {
        0
    };
    let y = DVector::from_column_slice(y.as_slice());
    ols_cluster_fit(&x, &y, &names, &groups, absorbed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub est: f64,
    pub se: f64,
}

/// Serialisable view of one fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub model: u8,
    pub variant: VillageControls,
    pub outcome: String,
    pub coef: IndexMap<String, Estimate>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "G")]
    pub g: usize,
}

impl FitSummary {
    pub fn new(spec: &ModelSpec, fit: &FitResult) -> Self {
        FitSummary {
            model: spec.model,
            variant: spec.variant,
            outcome: spec.outcome.clone(),
            coef: fit
                .names
                .iter()
                .enumerate()
                .map(|(i, name)| {
                    (
                        name.clone(),
                        Estimate {
                            est: fit.coef[i],
                            se: fit.se(i),
                        },
                    )
                })
                .collect(),
            n: fit.n,
            g: fit.g,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteRow {
    pub spec: ModelSpec,
    pub result: Result<FitResult, String>,
}

/// Fits the full suite for each outcome. A failing model is reported in its
/// row and does not stop the others.
pub fn run_suite(data: &Dataset, outcomes: &[&str], exec: Execution) -> Vec<SuiteRow> {
    let specs: Vec<ModelSpec> = outcomes.iter().flat_map(|o| build_model_suite(o)).collect();
    exec.map(&specs, |spec| SuiteRow {
        spec: spec.clone(),
        result: fit_model(data, spec).map_err(|e| e.to_string()),
    })
}

/// One line per (model, variant, outcome) with the focal terms as
/// `name est (se)` joined by `; `.
pub fn suite_table_csv<W: Write>(writer: W, rows: &[SuiteRow]) -> Result<(), RegressionError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "label", "variant", "outcome", "N", "G", "focal", "error"])?;
    for row in rows {
        let s = &row.spec;
        let (n, g, focal, err) = match &row.result {
            Ok(fit) => {
                let terms: Vec<String> = s
                    .focal
                    .iter()
                    .filter_map(|name| {
                        let (est, se) = fit.estimate(name)?;
                        let i = fit.index_of(name)?;
                        Some(format!("{name} {est:.4}{} ({se:.4})", stars(fit.p_value(i))))
                    })
                    .collect();
                (fit.n.to_string(), fit.g.to_string(), terms.join("; "), String::new())
            }
            Err(e) => (String::new(), String::new(), String::new(), e.clone()),
        };
        w.write_record([
            s.model.to_string(),
            s.label.clone(),
            s.variant.as_str().to_owned(),
            s.outcome.clone(),
            n,
            g,
            focal,
            err,
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_shape() {
        let suite = build_model_suite(PARTICIPATION);
        assert_eq!(suite.len(), 18);
        let m1 = &suite[0];
        assert_eq!(m1.focal, [LINK_RECIPROCAL_ONLY, LINK_UNIDIRECTIONAL]);
        assert_eq!(m1.variant, VillageControls::FixedEffects);
        assert_eq!(suite[1].variant, VillageControls::Characteristics);
        assert_eq!(suite[8].focal, [CLIENT, DEGREE_RECIPROCAL]);
        assert_eq!(suite[4].focal, [CONCENTRATION_Z, DEGREE_RECIPROCAL]);
        assert_eq!(suite[6].focal, [WEIGHTED_CONCENTRATION_Z, DEGREE_RECIPROCAL]);
        for spec in &suite[8..] {
            assert!(spec.focal.iter().any(|f| f == DEGREE_RECIPROCAL));
        }
        assert_eq!(suite[10].focal.len(), 3);
        assert!(suite.iter().all(|s| s.controls.len() == HOUSEHOLD_CONTROLS.len()));
    }

    fn toy() -> Dataset {
        let v: Vec<String> = (0..12).map(|i| format!("v{}", i / 4)).collect();
        let h: Vec<String> = (0..12).map(|i| i.to_string()).collect();
        let mut d = Dataset::new(v, h).unwrap();
        let x = [0.0, 1.0, 2.0, 4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 1.0, 2.0, 2.0];
        let cat = [0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 1.0, 2.0, 1.0, 0.0, 2.0];
        let noise = [0.3, -0.1, 0.2, -0.4, 0.1, 0.0, -0.2, 0.5, -0.3, 0.2, 0.1, -0.4];
        let y: Vec<f64> = (0..12)
            .map(|i| (i / 4) as f64 * 3.0 + 0.5 * x[i] + cat[i] + noise[i])
            .collect();
        d.insert("y", ColumnKind::Continuous, y).unwrap();
        d.insert("x", ColumnKind::Continuous, x.to_vec()).unwrap();
        d.insert("cat", ColumnKind::Categorical, cat.to_vec()).unwrap();
        d
    }

    fn spec(variant: VillageControls) -> ModelSpec {
        ModelSpec {
            model: 0,
            label: "toy".into(),
            outcome: "y".into(),
            focal: vec!["x".into()],
            controls: vec!["cat".into()],
            variant,
        }
    }

    #[test]
    fn categorical_expansion() {
        let fit = fit_model(&toy(), &spec(VillageControls::None)).unwrap();
        assert_eq!(fit.names, ["const", "x", "cat=1", "cat=2"]);
        let fe = fit_model(&toy(), &spec(VillageControls::FixedEffects)).unwrap();
        assert_eq!(fe.names, ["x", "cat=1", "cat=2"]);
        assert_eq!((fe.absorbed, fe.g), (3, 3));
    }

    #[test]
    fn summary_json() {
        let s = spec(VillageControls::FixedEffects);
        let fit = fit_model(&toy(), &s).unwrap();
        let json = serde_json::to_value(FitSummary::new(&s, &fit)).unwrap();
        assert_eq!(json["variant"], "fe");
        assert_eq!(json["N"], 12);
        assert_eq!(json["G"], 3);
        assert!(json["coef"]["x"]["se"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn table_reports_errors_per_row() {
        let s = spec(VillageControls::FixedEffects);
        let mut bad = s.clone();
        bad.focal = vec!["missing".into()];
        let rows = vec![
            SuiteRow { result: fit_model(&toy(), &s).map_err(|e| e.to_string()), spec: s },
            SuiteRow { result: fit_model(&toy(), &bad).map_err(|e| e.to_string()), spec: bad },
        ];
        let mut buf = Vec::new();
        suite_table_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("unknown column `missing`"));
    }
}
