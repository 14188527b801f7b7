use indexmap::IndexMap;

use super::dataset::{group_index, ColumnKind, Dataset};
use super::RegressionError;

/// Output of [`within_demean`].
#[derive(Debug, Clone, PartialEq)]
pub struct Demeaned {
    pub data: Dataset,
    /// Group label to per-column means of the original data.
    pub group_means: IndexMap<String, IndexMap<String, f64>>,
}

/// Subtracts group means from every column of `m` (rows in `groups`).
pub fn demean_in_place(
    m: &mut nalgebra::DMatrix<f64>,
    groups: &[usize],
    n_groups: usize,
) -> Vec<Vec<f64>> {
    assert_eq!(m.nrows(), groups.len());
    let mut counts = vec![0usize; n_groups];
    for &g in groups {
        counts[g] += 1;
    }
    let mut all_means = Vec::with_capacity(m.ncols());
    for mut col in m.column_iter_mut() {
        let mut sums = vec![0.0; n_groups];
        for (v, &g) in col.iter().zip(groups) {
            sums[g] += v;
        }
        let means: Vec<f64> = sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
            .collect();
        for (v, &g) in col.iter_mut().zip(groups) {
            *v -= means[g];
        }
        all_means.push(means);
    }
    all_means
}

/// Demeans every non-categorical column within the groups given by `group`,
/// which is either `village_id` or a categorical column.
pub fn within_demean(data: &Dataset, group: &str) -> Result<Demeaned, RegressionError> {
    if data.is_empty() {
        return Err(RegressionError::EmptyData);
    }
    let labels: Vec<String> = if group == "village_id" {
        data.villages().to_vec()
    } else {
        let col = data.column(group)?;
        if col.kind != ColumnKind::Categorical {
            return Err(RegressionError::BadColumn {
                name: group.to_owned(),
                reason: "grouping column must be categorical".into(),
            });
        }
        col.values.iter().map(|v| v.to_string()).collect()
    };
    let (idx, n_groups) = group_index(&labels);
    let mut label_of = vec![String::new(); n_groups];
    for (l, &g) in labels.iter().zip(&idx) {
        if label_of[g].is_empty() {
            label_of[g] = l.clone();
        }
    }

    let mut out = Dataset::new(data.villages().to_vec(), data.households().to_vec())?;
    let mut group_means: IndexMap<String, IndexMap<String, f64>> = label_of
        .iter()
        .map(|l| (l.clone(), IndexMap::new()))
        .collect();
    for (name, col) in data.columns() {
        if col.kind == ColumnKind::Categorical {
            out.insert(name, col.kind, col.values.clone())?;
            continue;
        }
        let mut m = nalgebra::DMatrix::from_column_slice(col.values.len(), 1, &col.values);
        let means = demean_in_place(&mut m, &idx, n_groups);
        for (g, mean) in means[0].iter().enumerate() {
            group_means[g].insert(name.to_owned(), *mean);
        }
        out.insert(name, ColumnKind::Continuous, m.as_slice().to_vec())?;
    }
    Ok(Demeaned {
        data: out,
        group_means,
    })
}
