//! Household link classes, degrees, concentration indices, and patron/client
//! detection.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::graph::{EntityId, GraphError, VillageNetwork};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cannot standardise an empty pool")]
    EmptyPool,
    #[error("patron report for village `{report}` does not match network `{network}`")]
    ReportMismatch { report: String, network: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Receiver status of a sampled household.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkClass {
    NonReceiver,
    ReciprocalOnly,
    Unidirectional,
}

impl LinkClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkClass::NonReceiver => "NonReceiver",
            LinkClass::ReciprocalOnly => "ReciprocalOnly",
            LinkClass::Unidirectional => "Unidirectional",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Degrees {
    pub reciprocal: u32,
    pub unidirectional: u32,
}

/// Raw (un-standardised) indices of one household.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HouseholdProfile {
    pub link_class: LinkClass,
    pub degrees: Degrees,
    /// Sum of squared unidirectional link counts over providers.
    pub concentration: u64,
    /// Same sum with each term multiplied by the provider's sphere count.
    pub weighted_concentration: u64,
}

/// Computes every raw index of `household` in one pass over its
/// counterparts.
pub fn household_profile(net: &VillageNetwork, household: &str) -> Result<HouseholdProfile, GraphError> {
    let hh = net.sampled_entity(household)?;
    let mut degrees = Degrees::default();
    let mut concentration = 0u64;
    let mut weighted = 0u64;
    let mut receives = false;
    for provider in net.providers_of(household) {
        let rel = net.relation_unchecked(hh.clone(), provider.clone());
        receives = true;
        if rel.reciprocal {
            degrees.reciprocal += 1;
        } else {
            let d = u64::from(rel.unidirectional_links);
            degrees.unidirectional += 1;
            concentration += d * d;
            weighted += u64::from(rel.spheres) * d * d;
        }
    }
    let link_class = if !receives {
        LinkClass::NonReceiver
    } else if degrees.unidirectional == 0 {
        LinkClass::ReciprocalOnly
    } else {
        LinkClass::Unidirectional
    };
    Ok(HouseholdProfile {
        link_class,
        degrees,
        concentration,
        weighted_concentration: weighted,
    })
}

pub fn classify_household(net: &VillageNetwork, household: &str) -> Result<LinkClass, GraphError> {
    household_profile(net, household).map(|p| p.link_class)
}

/// Returns `(reciprocal, unidirectional)` degrees.
pub fn compute_degrees(net: &VillageNetwork, household: &str) -> Result<Degrees, GraphError> {
    household_profile(net, household).map(|p| p.degrees)
}

pub fn concentration(net: &VillageNetwork, household: &str, weighted: bool) -> Result<u64, GraphError> {
    household_profile(net, household).map(|p| {
        if weighted {
            p.weighted_concentration
        } else {
            p.concentration
        }
    })
}

/// Standardises `values` with the population standard deviation. A
/// zero-variance pool maps to all zeros.
pub fn zscore_pool(values: &[f64]) -> Result<Vec<f64>, IndexError> {
    if values.is_empty() {
        return Err(IndexError::EmptyPool);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatronEntry {
    pub id: EntityId,
    /// Distinct sampled households receiving an unreciprocated link.
    #[serde(rename = "c")]
    pub clients: u64,
    /// Unreciprocated links provided to sampled households.
    #[serde(rename = "n")]
    pub links: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatronReport {
    pub village_id: String,
    pub threshold_count: u64,
    pub patrons: Vec<PatronEntry>,
    pub clientelism_score: u64,
}

impl PatronReport {
    pub fn is_patron(&self, id: &str) -> bool {
        self.patrons.iter().any(|p| p.id.as_str() == id)
    }
}

/// Minimum client count for a patron: at least 5% of sampled households.
pub fn patron_threshold(sampled: usize) -> u64 {
    (sampled as u64).div_ceil(20)
}

pub fn detect_patrons(net: &VillageNetwork) -> PatronReport {
    let threshold_count = patron_threshold(net.sampled_households().len());
    let mut patrons = Vec::new();
    for provider in net.providers() {
        let (mut clients, mut links) = (0u64, 0u64);
        for receiver in net.receivers_of(provider.as_str()) {
            if !net.is_sampled(receiver.as_str()) {
                continue;
            }
            let rel = net.relation_unchecked(receiver.clone(), provider.clone());
            if rel.is_unidirectional() {
                clients += 1;
                links += u64::from(rel.unidirectional_links);
            }
        }
        if clients >= threshold_count.max(1) {
            patrons.push(PatronEntry {
                id: provider.clone(),
                clients,
                links,
            });
        }
    }
    let clientelism_score = patrons.iter().map(|p| p.clients * p.links).sum();
    PatronReport {
        village_id: net.village_id().to_owned(),
        threshold_count,
        patrons,
        clientelism_score,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ClientStatus {
    pub is_client: bool,
    pub patron_ids: BTreeSet<EntityId>,
    /// The household is itself a patron and is dropped from regression samples.
    pub is_patron_household: bool,
}

/// Client flags for every sampled household of `net`.
pub fn classify_clients(
    net: &VillageNetwork,
    report: &PatronReport,
) -> Result<BTreeMap<EntityId, ClientStatus>, IndexError> {
    let mismatch = || IndexError::ReportMismatch {
        report: report.village_id.clone(),
        network: net.village_id().to_owned(),
    };
    if report.village_id != net.village_id()
        || report.patrons.iter().any(|p| !net.contains(p.id.as_str()))
    {
        return Err(mismatch());
    }
    let mut out = BTreeMap::new();
    for hh in net.sampled_households() {
        let patron_ids: BTreeSet<EntityId> = report
            .patrons
            .iter()
            .filter(|p| {
                net.relation_unchecked(hh.clone(), p.id.clone())
                    .is_unidirectional()
            })
            .map(|p| p.id.clone())
            .collect();
        out.insert(
            hh.clone(),
            ClientStatus {
                is_client: !patron_ids.is_empty(),
                patron_ids,
                is_patron_household: report.is_patron(hh.as_str()),
            },
        );
    }
    Ok(out)
}

/// All indices of one sampled household, including pooled z-scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HouseholdIndexRecord {
    pub village_id: String,
    pub household: EntityId,
    pub link_class: LinkClass,
    pub degree_reciprocal: u32,
    pub degree_unidirectional: u32,
    pub concentration_raw: u64,
    pub concentration_z: f64,
    pub weighted_raw: u64,
    pub weighted_z: f64,
    pub is_client: bool,
    pub patron_ids: BTreeSet<EntityId>,
    pub is_patron_household: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexRun {
    pub households: Vec<HouseholdIndexRecord>,
    pub patron_reports: Vec<PatronReport>,
}

fn village_records(net: &VillageNetwork) -> (Vec<HouseholdIndexRecord>, PatronReport) {
    let report = detect_patrons(net);
    let clients = classify_clients(net, &report).expect("report built from the same network");
    let records = net
        .sampled_households()
        .iter()
        .map(|hh| {
            let p = household_profile(net, hh.as_str()).expect("sampled household");
            let status = &clients[hh];
            HouseholdIndexRecord {
                village_id: net.village_id().to_owned(),
                household: hh.clone(),
                link_class: p.link_class,
                degree_reciprocal: p.degrees.reciprocal,
                degree_unidirectional: p.degrees.unidirectional,
                concentration_raw: p.concentration,
                concentration_z: 0.0,
                weighted_raw: p.weighted_concentration,
                weighted_z: 0.0,
                is_client: status.is_client,
                patron_ids: status.patron_ids.clone(),
                is_patron_household: status.is_patron_household,
            }
        })
        .collect();
    (records, report)
}

/// Computes indices for every village, then standardises both concentration
/// indices over the pooled households of the whole run.
pub fn compute_indices(villages: &[VillageNetwork], exec: Execution) -> IndexRun {
    let per_village = exec.map(villages, village_records);
    let mut households = Vec::new();
    let mut patron_reports = Vec::with_capacity(per_village.len());
    for (records, report) in per_village {
        households.extend(records);
        patron_reports.push(report);
    }
    if !households.is_empty() {
        let raw: Vec<f64> = households.iter().map(|h| h.concentration_raw as f64).collect();
        let weighted: Vec<f64> = households.iter().map(|h| h.weighted_raw as f64).collect();
        let z = zscore_pool(&raw).expect("non-empty");
        let wz = zscore_pool(&weighted).expect("non-empty");
        for (h, (z, wz)) in households.iter_mut().zip(z.into_iter().zip(wz)) {
            h.concentration_z = z;
            h.weighted_z = wz;
        }
    }
    IndexRun {
        households,
        patron_reports,
    }
}

/// Writes the per-household table (`patron_ids` joined with `;`).
pub fn write_indices_csv<W: Write>(writer: W, records: &[HouseholdIndexRecord]) -> Result<(), IndexError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "village_id",
        "household_id",
        "link_class",
        "degree_reciprocal",
        "degree_unidirectional",
        "concentration_raw",
        "concentration_z",
        "weighted_raw",
        "weighted_z",
        "is_client",
        "is_patron",
        "patron_ids",
    ])?;
    let flag = |b: bool| if b { "1" } else { "0" };
    for r in records {
        let patrons: Vec<&str> = r.patron_ids.iter().map(EntityId::as_str).collect();
        w.write_record([
            r.village_id.as_str(),
            r.household.as_str(),
            r.link_class.as_str(),
            &r.degree_reciprocal.to_string(),
            &r.degree_unidirectional.to_string(),
            &r.concentration_raw.to_string(),
            &format!("{:.12}", r.concentration_z),
            &r.weighted_raw.to_string(),
            &format!("{:.12}", r.weighted_z),
            flag(r.is_client),
            flag(r.is_patron_household),
            &patrons.join(";"),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::v1;
    use crate::graph::{ServiceCategory::*, ServiceEdge};

    fn net(sampled: usize, external: &[&str], edges: Vec<ServiceEdge>) -> VillageNetwork {
        VillageNetwork::from_parts(
            "T",
            (0..sampled).map(|i| EntityId::new(format!("h{i}"))),
            external.iter().map(|&s| EntityId::from(s)),
            edges,
        )
    }

    #[test]
    fn v1_classes() {
        let v = v1();
        assert_eq!(classify_household(&v, "A").unwrap(), LinkClass::Unidirectional);
        assert_eq!(classify_household(&v, "B").unwrap(), LinkClass::ReciprocalOnly);
        assert_eq!(classify_household(&v, "C").unwrap(), LinkClass::ReciprocalOnly);
        let lone = net(1, &[], vec![]);
        assert_eq!(classify_household(&lone, "h0").unwrap(), LinkClass::NonReceiver);
        assert!(classify_household(&v, "nobody").is_err());
    }

    #[test]
    fn v1_degrees() {
        let v = v1();
        let d = compute_degrees(&v, "A").unwrap();
        assert_eq!((d.reciprocal, d.unidirectional), (0, 1));
        let d = compute_degrees(&v, "C").unwrap();
        assert_eq!((d.reciprocal, d.unidirectional), (1, 0));
        let lone = net(1, &[], vec![]);
        assert_eq!(compute_degrees(&lone, "h0").unwrap(), Degrees::default());
    }

    #[test]
    fn concentration_values() {
        let v = v1();
        assert_eq!(concentration(&v, "A", false).unwrap(), 4);
        assert_eq!(concentration(&v, "A", true).unwrap(), 8);
        assert_eq!(concentration(&v, "B", false).unwrap(), 0);
        assert_eq!(concentration(&v, "B", true).unwrap(), 0);

        // Three links from one provider vs one link from each of three.
        let single = net(
            1,
            &["P"],
            vec![
                ServiceEdge::new("h0", "P", Credit),
                ServiceEdge::new("h0", "P", Labour),
                ServiceEdge::new("h0", "P", LandTenancy),
            ],
        );
        assert_eq!(concentration(&single, "h0", false).unwrap(), 9);
        let spread = net(
            1,
            &["P", "Q", "R"],
            vec![
                ServiceEdge::new("h0", "P", Credit),
                ServiceEdge::new("h0", "Q", Credit),
                ServiceEdge::new("h0", "R", Credit),
            ],
        );
        assert_eq!(concentration(&spread, "h0", false).unwrap(), 3);
    }

    #[test]
    fn zscores() {
        let z = zscore_pool(&[4.0, 0.0, 0.0, 0.0]).unwrap();
        let expect = [3f64.sqrt(), -1.0 / 3f64.sqrt(), -1.0 / 3f64.sqrt(), -1.0 / 3f64.sqrt()];
        for (a, b) in z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((z[0] - 1.7321).abs() < 1e-4 && (z[1] + 0.5774).abs() < 1e-4);
        assert_eq!(zscore_pool(&[5.0, 5.0, 5.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(zscore_pool(&[7.0]).unwrap(), vec![0.0]);
        assert!(matches!(zscore_pool(&[]), Err(IndexError::EmptyPool)));
    }

    #[test]
    fn patron_threshold_boundary() {
        let build = |clients: usize| {
            let edges = (0..clients).map(|i| ServiceEdge::new(format!("h{i}"), "P", Credit));
            net(100, &["P"], edges.collect())
        };
        let r5 = detect_patrons(&build(5));
        assert_eq!(r5.threshold_count, 5);
        assert!(r5.is_patron("P"));
        assert!(!detect_patrons(&build(4)).is_patron("P"));
    }

    #[test]
    fn clientelism_score_two_patrons() {
        // (c, n) = (5, 8) and (6, 6) in a village of 100.
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push(ServiceEdge::new(format!("h{i}"), "P", Credit));
        }
        for i in 0..3 {
            edges.push(ServiceEdge::new(format!("h{i}"), "P", Labour));
        }
        for i in 10..16 {
            edges.push(ServiceEdge::new(format!("h{i}"), "Q", WelfareAccess));
        }
        let report = detect_patrons(&net(100, &["P", "Q"], edges));
        let stats: Vec<_> = report.patrons.iter().map(|p| (p.clients, p.links)).collect();
        assert_eq!(stats, [(5, 8), (6, 6)]);
        assert_eq!(report.clientelism_score, 76);
    }

    #[test]
    fn v1_patrons_and_clients() {
        let v = v1();
        let report = detect_patrons(&v);
        assert_eq!(report.threshold_count, 1);
        assert_eq!(
            report.patrons,
            vec![PatronEntry { id: "K".into(), clients: 1, links: 2 }]
        );
        assert_eq!(report.clientelism_score, 2);
        let clients = classify_clients(&v, &report).unwrap();
        assert!(clients["A"].is_client);
        assert_eq!(clients["A"].patron_ids, ["K".into()].into());
        for hh in ["B", "C", "D"] {
            assert!(!clients[hh].is_client);
        }
    }

    #[test]
    fn no_patrons_and_two_patrons() {
        let empty = net(3, &[], vec![]);
        let report = detect_patrons(&empty);
        assert!(report.patrons.is_empty());
        assert_eq!(report.clientelism_score, 0);
        assert!(classify_clients(&empty, &report).unwrap().values().all(|s| !s.is_client));

        let two = net(
            4,
            &["P", "Q"],
            vec![
                ServiceEdge::new("h0", "P", Credit),
                ServiceEdge::new("h0", "Q", Labour),
            ],
        );
        let report = detect_patrons(&two);
        let clients = classify_clients(&two, &report).unwrap();
        assert_eq!(clients["h0"].patron_ids.len(), 2);
    }

    #[test]
    fn sampled_patron_is_flagged() {
        let v = net(
            4,
            &[],
            vec![
                ServiceEdge::new("h1", "h0", Credit),
                ServiceEdge::new("h2", "h0", Credit),
            ],
        );
        let report = detect_patrons(&v);
        let clients = classify_clients(&v, &report).unwrap();
        assert!(clients["h0"].is_patron_household);
        assert!(!clients["h0"].is_client);
        assert!(clients["h1"].is_client);
    }

    #[test]
    fn mismatched_report() {
        let mut report = detect_patrons(&v1());
        report.village_id = "other".into();
        assert!(matches!(
            classify_clients(&v1(), &report),
            Err(IndexError::ReportMismatch { .. })
        ));
    }

    #[test]
    fn run_pools_zscores_across_villages() {
        let run = compute_indices(&[v1(), net(2, &[], vec![])], Execution::Sequential);
        assert_eq!(run.households.len(), 6);
        assert_eq!(run.patron_reports.len(), 2);
        let raw: Vec<f64> = run.households.iter().map(|h| h.concentration_raw as f64).collect();
        let z = zscore_pool(&raw).unwrap();
        for (h, z) in run.households.iter().zip(z) {
            assert_eq!(h.concentration_z, z);
        }
        let par = compute_indices(&[v1(), net(2, &[], vec![])], Execution::Parallel);
        assert_eq!(run, par);
    }

    #[test]
    fn csv_output_layout() {
        let run = compute_indices(&[v1()], Execution::Sequential);
        let mut buf = Vec::new();
        write_indices_csv(&mut buf, &run.households).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("village_id,household_id,link_class"));
        let a = lines.next().unwrap();
        assert!(a.starts_with("V1,A,Unidirectional,0,1,4,"));
        assert!(a.ends_with(",1,0,K"));
    }
}
