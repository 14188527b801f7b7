#![allow(dead_code, clippy::manual_div_ceil, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use patronet::game::GameParams;
use patronet::regression::{ColumnKind, Dataset};
use patronet::graph::{EntityId, ServiceCategory, ServiceEdge, VillageNetwork};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Sphere of each category in declaration order.
const SPHERE_OF: [u8; 10] = [0, 0, 0, 0, 0, 1, 1, 1, 2, 2];

fn cat_index(c: ServiceCategory) -> usize {
    ServiceCategory::ALL.iter().position(|&x| x == c).unwrap()
}

pub fn random_network(rng: &mut ChaCha8Rng, max_households: usize, max_edges: usize) -> VillageNetwork {
    let h = rng.random_range(1..=max_households);
    let x = rng.random_range(0..=4);
    let sampled: Vec<EntityId> = (0..h).map(|i| EntityId::new(format!("h{i}"))).collect();
    let external: Vec<EntityId> = (0..x).map(|i| EntityId::new(format!("x{i}"))).collect();
    let all: Vec<(EntityId, bool)> = sampled
        .iter()
        .map(|s| (s.clone(), true))
        .chain(external.iter().map(|e| (e.clone(), false)))
        .collect();
    let m = rng.random_range(0..=max_edges);
    let mut edges = Vec::new();
    // favour repeated pairs so that multi-service and reverse links show up
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for _ in 0..m {
        let (r, p) = if !pairs.is_empty() && rng.random_bool(0.4) {
            let (r, p) = *pairs.choose(rng).unwrap();
            if rng.random_bool(0.5) { (p, r) } else { (r, p) }
        } else {
            (rng.random_range(0..all.len()), rng.random_range(0..all.len()))
        };
        if r == p || (!all[r].1 && !all[p].1) {
            continue;
        }
        pairs.push((r, p));
        let cat = ServiceCategory::ALL[rng.random_range(0..10)];
        edges.push(ServiceEdge::new(all[r].0.clone(), all[p].0.clone(), cat));
    }
    VillageNetwork::from_parts("R", sampled, external, edges)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleHousehold {
    pub class: &'static str,
    pub reciprocal: u32,
    pub unidirectional: u32,
    pub raw: u64,
    pub weighted: u64,
    pub client: bool,
    pub patrons: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    pub households: BTreeMap<String, OracleHousehold>,
    pub patrons: BTreeSet<String>,
    pub score: u64,
}

/// Recomputes every index by scanning the whole edge list for each query.
pub fn naive_oracle(net: &VillageNetwork) -> Oracle {
    let edges: Vec<(String, String, usize)> = net
        .edges()
        .iter()
        .map(|e| (e.receiver.to_string(), e.provider.to_string(), cat_index(e.category)))
        .collect();
    let sampled: Vec<String> = net.sampled_households().iter().map(|s| s.to_string()).collect();
    let everyone: Vec<String> = sampled
        .iter()
        .cloned()
        .chain(net.external_providers().iter().map(|s| s.to_string()))
        .collect();
    let received = |x: &str, k: &str| -> BTreeSet<usize> {
        edges
            .iter()
            .filter(|(r, p, _)| r == x && p == k)
            .map(|(_, _, c)| *c)
            .collect()
    };
    let gives_back = |x: &str, k: &str| edges.iter().any(|(r, p, _)| r == k && p == x);
    let unreciprocated = |x: &str, k: &str| -> u64 {
        if gives_back(x, k) {
            0
        } else {
            received(x, k).len() as u64
        }
    };

    let threshold = (sampled.len() as u64 + 19) / 20;
    let mut patrons = BTreeSet::new();
    let mut score = 0;
    for k in &everyone {
        let mut c = 0;
        let mut n = 0;
        for x in &sampled {
            let d = unreciprocated(x, k);
            if d > 0 {
                c += 1;
                n += d;
            }
        }
        if c >= threshold.max(1) {
            patrons.insert(k.clone());
            score += c * n;
        }
    }

    let mut households = BTreeMap::new();
    for x in &sampled {
        let mut hh = OracleHousehold {
            class: "NonReceiver",
            reciprocal: 0,
            unidirectional: 0,
            raw: 0,
            weighted: 0,
            client: false,
            patrons: BTreeSet::new(),
        };
        for k in &everyone {
            let recv = received(x, k);
            if recv.is_empty() {
                continue;
            }
            if gives_back(x, k) {
                hh.reciprocal += 1;
            } else {
                let d = recv.len() as u64;
                let w = recv.iter().map(|&c| SPHERE_OF[c]).collect::<BTreeSet<_>>().len() as u64;
                hh.unidirectional += 1;
                hh.raw += d * d;
                hh.weighted += w * d * d;
                if patrons.contains(k) {
                    hh.patrons.insert(k.clone());
                }
            }
        }
        hh.class = if hh.unidirectional > 0 {
            "Unidirectional"
        } else if hh.reciprocal > 0 {
            "ReciprocalOnly"
        } else {
            "NonReceiver"
        };
        hh.client = !hh.patrons.is_empty();
        households.insert(x.clone(), hh);
    }
    Oracle {
        households,
        patrons,
        score,
    }
}

/// Compares library indices of `net` with the oracle; returns mismatches.
pub fn compare_with_oracle(net: &VillageNetwork) -> Vec<String> {
    use patronet::indices::compute_indices;
    use patronet::Execution;
    let oracle = naive_oracle(net);
    let run = compute_indices(std::slice::from_ref(net), Execution::Sequential);
    let mut diffs = Vec::new();
    let report = &run.patron_reports[0];
    let lib_patrons: BTreeSet<String> = report.patrons.iter().map(|p| p.id.to_string()).collect();
    if lib_patrons != oracle.patrons {
        diffs.push(format!("patrons {lib_patrons:?} vs {:?}", oracle.patrons));
    }
    if report.clientelism_score != oracle.score {
        diffs.push(format!("score {} vs {}", report.clientelism_score, oracle.score));
    }
    for rec in &run.households {
        let o = &oracle.households[rec.household.as_str()];
        let lib = OracleHousehold {
            class: rec.link_class.as_str(),
            reciprocal: rec.degree_reciprocal,
            unidirectional: rec.degree_unidirectional,
            raw: rec.concentration_raw,
            weighted: rec.weighted_raw,
            client: rec.is_client,
            patrons: rec.patron_ids.iter().map(|p| p.to_string()).collect(),
        };
        if &lib != o {
            diffs.push(format!("{}: {lib:?} vs {o:?}", rec.household));
        }
    }
    diffs
}

/// Plain Gauss-Jordan inverse.
fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..k {
            if r != col {
                let f = m[r][col];
                for c in 0..2 * k {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    m.into_iter().map(|r| r[k..].to_vec()).collect()
}

/// Coefficients and CR1 covariance from explicit sums.
pub fn naive_sandwich(x: &DMatrix<f64>, y: &DVector<f64>, clusters: &[usize]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, k) = x.shape();
    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for i in 0..n {
        for a in 0..k {
            xty[a] += x[(i, a)] * y[i];
            for b in 0..k {
                xtx[a][b] += x[(i, a)] * x[(i, b)];
            }
        }
    }
    let inv = invert(&xtx);
    let beta: Vec<f64> = (0..k).map(|a| (0..k).map(|b| inv[a][b] * xty[b]).sum()).collect();
    let resid: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..k).map(|a| x[(i, a)] * beta[a]).sum::<f64>())
        .collect();
    let groups: BTreeSet<usize> = clusters.iter().copied().collect();
    let mut meat = vec![vec![0.0; k]; k];
    for &g in &groups {
        let mut s = vec![0.0; k];
        for i in (0..n).filter(|&i| clusters[i] == g) {
            for a in 0..k {
                s[a] += x[(i, a)] * resid[i];
            }
        }
        for a in 0..k {
            for b in 0..k {
                meat[a][b] += s[a] * s[b];
            }
        }
    }
    let g = groups.len() as f64;
    let factor = g / (g - 1.0) * (n as f64 - 1.0) / (n - k) as f64;
    let mut cov = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            let mut acc = 0.0;
            for c in 0..k {
                for d in 0..k {
                    acc += inv[a][c] * meat[c][d] * inv[d][b];
                }
            }
            cov[a][b] = factor * acc;
        }
    }
    (beta, cov)
}

/// Six rows, two clusters: constant plus one regressor.
pub fn sandwich_fixture() -> (DMatrix<f64>, DVector<f64>, Vec<usize>) {
    let xs = [1.0, 2.0, 4.0, 3.0, 5.0, 8.0];
    let ys = [2.0, 2.5, 5.0, 3.0, 6.5, 8.0];
    let x = DMatrix::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
    (x, DVector::from_column_slice(&ys), vec![0, 0, 0, 1, 1, 1])
}

/// Parameter grid over n in 5..=30 whose points all satisfy the
/// restrictions.
pub fn passing_grid() -> Vec<GameParams> {
    use patronet::game::{check_restrictions, GridSpec};
    let grid = GridSpec {
        n: (5..=30).collect(),
        b: vec![3.0, 4.0, 5.0],
        theta: vec![0.6, 0.7],
        c: vec![1.1],
        r: vec![100.0, 200.0],
        e: vec![0.1],
    };
    grid.points(&GameParams::reference())
        .unwrap()
        .into_iter()
        .filter(|p| check_restrictions(p).all_pass())
        .collect()
}

/// A small unbalanced panel with three regressors.
pub fn panel(seed: u64, villages: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<usize> = (0..villages).map(|_| rng.random_range(1..9)).collect();
    let n: usize = sizes.iter().sum();
    let village: Vec<String> = sizes
        .iter()
        .enumerate()
        .flat_map(|(v, &s)| std::iter::repeat_n(format!("v{v}"), s))
        .collect();
    let hh: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut d = Dataset::new(village.clone(), hh).unwrap();
    let offsets: Vec<f64> = (0..villages).map(|_| rng.random_range(-3.0..3.0)).collect();
    let vidx: Vec<usize> = village.iter().map(|v| v[1..].parse().unwrap()).collect();
    let x1: Vec<f64> = (0..n).map(|i| rng.random::<f64>() + 0.3 * offsets[vidx[i]]).collect();
    let x2: Vec<f64> = (0..n).map(|_| f64::from(rng.random_bool(0.4))).collect();
    let cat: Vec<f64> = (0..n).map(|_| rng.random_range(0..3) as f64).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| offsets[vidx[i]] + 0.7 * x1[i] - 0.4 * x2[i] + 0.2 * cat[i] + rng.random::<f64>())
        .collect();
    d.insert("y", ColumnKind::Continuous, y).unwrap();
    d.insert("x1", ColumnKind::Continuous, x1).unwrap();
    d.insert("x2", ColumnKind::Binary, x2).unwrap();
    d.insert("cat", ColumnKind::Categorical, cat).unwrap();
    d
}
