use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::RegressionError;

/// Relative residual norm below which a column counts as collinear.
const RANK_TOL: f64 = 1e-9;

/// Least-squares coefficients with CR1 cluster-robust covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    /// CR1 cluster-robust covariance.
    pub cov: DMatrix<f64>,
    /// Homoskedastic covariance, s^2 (X'X)^-1 with N - K degrees of freedom.
    pub classical_cov: DMatrix<f64>,
    pub n: usize,
    pub k: usize,
    pub g: usize,
    /// Fixed-effect groups absorbed before the fit (0 when none).
    pub absorbed: usize,
    pub residual_df: usize,
    /// Degrees of freedom for t tests on cluster-robust SEs (G - 1).
    pub cluster_df: usize,
}

impl FitResult {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn se(&self, i: usize) -> f64 {
        self.cov[(i, i)].max(0.0).sqrt()
    }

    pub fn classical_se(&self, i: usize) -> f64 {
        self.classical_cov[(i, i)].max(0.0).sqrt()
    }

    pub fn estimate(&self, name: &str) -> Option<(f64, f64)> {
        self.index_of(name).map(|i| (self.coef[i], self.se(i)))
    }

    /// Two-sided p-value of the cluster-robust t statistic on G - 1 df.
    pub fn p_value(&self, i: usize) -> f64 {
        let se = self.se(i);
        if se == 0.0 {
            return if self.coef[i] == 0.0 { 1.0 } else { 0.0 };
        }
        let t = (self.coef[i] / se).abs();
        let dist = StudentsT::new(0.0, 1.0, self.cluster_df as f64)
            .expect("cluster_df is at least 1");
        2.0 * (1.0 - dist.cdf(t))
    }
}

/// Names of columns that lie in the span of the columns before them.
fn collinear_columns(x: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut bad = Vec::new();
    for (j, col) in x.column_iter().enumerate() {
        let orig = col.norm();
        let mut v = col.clone_owned();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dot(&v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let rest = v.norm();
        if orig == 0.0 || rest <= RANK_TOL * orig {
            bad.push(names[j].clone());
        } else {
            basis.push(v / rest);
        }
    }
    bad
}

/// Fits `y` on the columns of `x` and computes the cluster-robust sandwich
/// `c (X'X)^-1 [sum_g (X'u)_g (X'u)_g'] (X'X)^-1` with
/// `c = G/(G-1) * (N-1)/(N-K)`.
///
/// `clusters` holds a dense cluster index per row. `absorbed` is recorded in
/// the result and does not change the arithmetic.
pub fn ols_cluster_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    names: &[String],
    clusters: &[usize],
    absorbed: usize,
) -> Result<FitResult, RegressionError> {
    let (n, k) = x.shape();
    assert_eq!(names.len(), k, "one name per column");
    assert_eq!(y.len(), n, "one outcome per row");
    assert_eq!(clusters.len(), n, "one cluster per row");
    if n == 0 {
        return Err(RegressionError::EmptyData);
    }
    let bad = collinear_columns(x, names);
    if !bad.is_empty() {
        return Err(RegressionError::RankDeficient(bad));
    }
    let g = clusters.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; g];
    clusters.iter().for_each(|&c| seen[c] = true);
    let g = seen.iter().filter(|s| **s).count();
    if g < 2 {
        return Err(RegressionError::TooFewClusters(g));
    }
    if n <= k {
        return Err(RegressionError::TooFewObservations { n, k });
    }

    let qr = x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| RegressionError::RankDeficient(names.to_vec()))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| RegressionError::RankDeficient(names.to_vec()))?;
    let bread = &r_inv * r_inv.transpose();

    let resid = y - x * &beta;
    let n_slots = seen.len();
    let mut scores = DMatrix::<f64>::zeros(k, n_slots);
    for (i, &c) in clusters.iter().enumerate() {
        let u = resid[i];
        for j in 0..k {
            scores[(j, c)] += x[(i, j)] * u;
        }
    }
    let meat = &scores * scores.transpose();
    let factor = (g as f64 / (g - 1) as f64) * ((n - 1) as f64 / (n - k) as f64);
    let mut cov = &bread * meat * &bread * factor;
    symmetrize(&mut cov);

    let s2 = resid.norm_squared() / (n - k) as f64;
    let mut classical_cov = &bread * s2;
    symmetrize(&mut classical_cov);

    Ok(FitResult {
        names: names.to_vec(),
        coef: beta.iter().copied().collect(),
        cov,
        classical_cov,
        n,
        k,
        g,
        absorbed,
        residual_df: n - k,
        cluster_df: g - 1,
    })
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let k = m.nrows();
    for i in 0..k {
        for j in (i + 1)..k {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}
