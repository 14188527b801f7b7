use std::io::{Read, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{cols, RegressionError};

/// Maximum number of workfare days per household and year.
pub const DAYS_CAP: f64 = 100.0;

/// Caps reported days worked at [`DAYS_CAP`].
pub fn truncate_days(v: f64) -> Result<f64, RegressionError> {
    if v < 0.0 || v.is_nan() {
        return Err(RegressionError::NegativeDays(v));
    }
    Ok(v.min(DAYS_CAP))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Binary,
    Count,
    Continuous,
    /// Non-negative integer codes; expanded to indicators when modelled.
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub kind: ColumnKind,
    pub values: Vec<f64>,
}

/// Household rows with a village label and typed numeric columns. Every cell
/// is present; binary columns hold 0/1, categorical columns integer codes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    village: Vec<String>,
    household: Vec<String>,
    columns: IndexMap<String, Column>,
}

impl Dataset {
    pub fn new(village: Vec<String>, household: Vec<String>) -> Result<Self, RegressionError> {
        if village.len() != household.len() {
            return Err(RegressionError::BadColumn {
                name: "household_id".into(),
                reason: format!("{} labels for {} rows", household.len(), village.len()),
            });
        }
        if let Some(row) = village.iter().position(String::is_empty) {
            return Err(RegressionError::EmptyGroup { row });
        }
        Ok(Dataset {
            village,
            household,
            columns: IndexMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.village.len()
    }

    pub fn is_empty(&self) -> bool {
        self.village.is_empty()
    }

    pub fn villages(&self) -> &[String] {
        &self.village
    }

    pub fn households(&self) -> &[String] {
        &self.household
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &Column)> {
        self.columns.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn column(&self, name: &str) -> Result<&Column, RegressionError> {
        self.columns
            .get(name)
            .ok_or_else(|| RegressionError::UnknownColumn(name.to_owned()))
    }

    pub fn values(&self, name: &str) -> Result<&[f64], RegressionError> {
        self.column(name).map(|c| c.values.as_slice())
    }

    /// Adds or replaces a column after checking it against its kind.
    pub fn insert(
        &mut self,
        name: impl Into<String>,
        kind: ColumnKind,
        values: Vec<f64>,
    ) -> Result<(), RegressionError> {
        let name = name.into();
        let bad = |reason: String| RegressionError::BadColumn {
            name: name.clone(),
            reason,
        };
        if values.len() != self.len() {
            return Err(bad(format!("{} values for {} rows", values.len(), self.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(bad(format!("missing or non-finite value in row {i}")));
        }
        let invalid = match kind {
            ColumnKind::Binary => values.iter().position(|&v| v != 0.0 && v != 1.0),
            ColumnKind::Count | ColumnKind::Categorical => {
                values.iter().position(|&v| v < 0.0 || v.fract() != 0.0)
            }
            ColumnKind::Continuous => None,
        };
        if let Some(i) = invalid {
            return Err(bad(format!("row {i} value {} is not a valid {kind:?}", values[i])));
        }
        if name == cols::DAYS_WORKED {
            if let Some(i) = values.iter().position(|&v| !(0.0..=DAYS_CAP).contains(&v)) {
                return Err(bad(format!("row {i} value {} outside [0, 100]", values[i])));
            }
        }
        self.columns.insert(name, Column { kind, values });
        Ok(())
    }

    /// Keeps the rows where `keep` is true.
    pub fn filter_rows(&self, keep: &[bool]) -> Dataset {
        let pick = |v: &[String]| -> Vec<String> {
            v.iter()
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|(s, _)| s.clone())
                .collect()
        };
        Dataset {
            village: pick(&self.village),
            household: pick(&self.household),
            columns: self
                .columns
                .iter()
                .map(|(name, c)| {
                    let values = c
                        .values
                        .iter()
                        .zip(keep)
                        .filter(|(_, k)| **k)
                        .map(|(v, _)| *v)
                        .collect();
                    (name.clone(), Column { kind: c.kind, values })
                })
                .collect(),
        }
    }

    /// Dense group index per row, in order of first appearance.
    pub fn village_index(&self) -> (Vec<usize>, usize) {
        group_index(&self.village)
    }
}

pub(crate) fn group_index(labels: &[String]) -> (Vec<usize>, usize) {
    let mut seen: IndexMap<&str, usize> = IndexMap::new();
    let idx = labels
        .iter()
        .map(|l| {
            let next = seen.len();
            *seen.entry(l.as_str()).or_insert(next)
        })
        .collect();
    (idx, seen.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
}

/// JSON sidecar describing the data columns of a dataset CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub columns: Vec<ColumnMeta>,
}

/// Writes the CSV (`village_id,household_id,<columns>`) and its metadata
/// sidecar.
pub fn write_dataset<W: Write, M: Write>(
    data: &Dataset,
    csv_out: W,
    meta_out: M,
) -> Result<(), RegressionError> {
    let mut w = csv::Writer::from_writer(csv_out);
    let mut header = vec!["village_id", "household_id"];
    header.extend(data.column_names());
    w.write_record(&header)?;
    for row in 0..data.len() {
        let mut rec = vec![data.village[row].clone(), data.household[row].clone()];
        rec.extend(data.columns.values().map(|c| format!("{}", c.values[row])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let meta = DatasetMeta {
        columns: data
            .columns
            .iter()
            .map(|(name, c)| ColumnMeta {
                name: name.clone(),
                kind: c.kind,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(meta_out, &meta)?;
    Ok(())
}

pub fn read_dataset<R: Read, M: Read>(csv_in: R, meta_in: M) -> Result<Dataset, RegressionError> {
    let meta: DatasetMeta = serde_json::from_reader(meta_in)?;
    let mut rdr = csv::Reader::from_reader(csv_in);
    let headers = rdr.headers()?.clone();
    let expected: Vec<&str> = ["village_id", "household_id"]
        .into_iter()
        .chain(meta.columns.iter().map(|c| c.name.as_str()))
        .collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(RegressionError::BadColumn {
            name: "header".into(),
            reason: "CSV header does not match the metadata sidecar".into(),
        });
    }
    let mut village = Vec::new();
    let mut household = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); meta.columns.len()];
    for rec in rdr.records() {
        let rec = rec?;
        village.push(rec[0].to_owned());
        household.push(rec[1].to_owned());
        for (j, col) in meta.columns.iter().enumerate() {
            let cell = rec[j + 2].trim();
            let v: f64 = cell.parse().map_err(|_| RegressionError::BadColumn {
                name: col.name.clone(),
                reason: format!("unparseable value `{cell}` in row {}", village.len()),
            })?;
            values[j].push(v);
        }
    }
    let mut data = Dataset::new(village, household)?;
    for (col, vals) in meta.columns.into_iter().zip(values) {
        data.insert(col.name, col.kind, vals)?;
    }
    Ok(data)
}
