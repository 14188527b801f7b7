use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use super::{EntityId, GraphError, ServiceCategory, ServiceEdge, VillageNetwork};

const HEADER: [&str; 6] = [
    "village_id",
    "receiver_id",
    "provider_id",
    "service",
    "receiver_sampled",
    "provider_sampled",
];

/// One village read from an edge-list file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedVillage {
    pub network: VillageNetwork,
    /// Repeated `(receiver, provider, service)` rows that were dropped.
    pub duplicate_rows: usize,
}

#[derive(Default)]
struct VillageBuilder {
    flags: BTreeMap<EntityId, bool>,
    edges: BTreeSet<ServiceEdge>,
    duplicates: usize,
}

impl VillageBuilder {
    fn declare(&mut self, id: &EntityId, sampled: bool, line: u64) -> Result<(), GraphError> {
        match self.flags.get(id) {
            Some(&prev) if prev != sampled => Err(GraphError::Malformed {
                line,
                reason: format!("entity `{id}` is marked both sampled and external"),
            }),
            Some(_) => Ok(()),
            None => {
                self.flags.insert(id.clone(), sampled);
                Ok(())
            }
        }
    }

    fn finish(self, village_id: String) -> ParsedVillage {
        let (sampled, external): (Vec<_>, Vec<_>) =
            self.flags.into_iter().partition(|(_, s)| *s);
        ParsedVillage {
            network: VillageNetwork::from_parts(
                village_id,
                sampled.into_iter().map(|(id, _)| id),
                external.into_iter().map(|(id, _)| id),
                self.edges,
            ),
            duplicate_rows: self.duplicates,
        }
    }
}

fn parse_flag(raw: &str, column: &str, line: u64) -> Result<bool, GraphError> {
    match raw {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(GraphError::Malformed {
            line,
            reason: format!("`{column}` must be 0 or 1, got `{other}`"),
        }),
    }
}

/// Reads an edge-list CSV holding one or more villages, grouped by
/// `village_id` and returned in id order.
///
/// A row with empty `provider_id`, `service` and `provider_sampled` declares
/// an entity without any edge (a household that neither receives nor
/// provides).
pub fn parse_village_csv<R: Read>(reader: R) -> Result<Vec<ParsedVillage>, GraphError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().all(str::is_empty) {
        return Err(GraphError::Empty);
    }
    let mut cols = [usize::MAX; 6];
    for (i, h) in headers.iter().enumerate() {
        let Some(slot) = HEADER.iter().position(|&want| want == h.trim()) else {
            return Err(GraphError::Malformed {
                line: 1,
                reason: format!("unknown column `{h}`"),
            });
        };
        cols[slot] = i;
    }
    if let Some(missing) = cols.iter().position(|&c| c == usize::MAX) {
        return Err(GraphError::Malformed {
            line: 1,
            reason: format!("missing column `{}`", HEADER[missing]),
        });
    }

    let mut villages: BTreeMap<String, VillageBuilder> = BTreeMap::new();
    let mut rows = 0usize;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |slot: usize| record.get(cols[slot]).unwrap_or("").trim();
        let malformed = |reason: String| GraphError::Malformed { line, reason };
        rows += 1;

        let village = field(0);
        if village.is_empty() {
            return Err(malformed("empty village_id".into()));
        }
        let receiver = field(1);
        if receiver.is_empty() {
            return Err(malformed("empty receiver_id".into()));
        }
        let receiver = EntityId::from(receiver);
        let receiver_sampled = parse_flag(field(4), HEADER[4], line)?;
        let builder = villages.entry(village.to_owned()).or_default();

        let (provider, service) = (field(2), field(3));
        if provider.is_empty() && service.is_empty() && field(5).is_empty() {
            builder.declare(&receiver, receiver_sampled, line)?;
            continue;
        }
        if provider.is_empty() {
            return Err(malformed("empty provider_id".into()));
        }
        let category: ServiceCategory = service.parse().map_err(malformed)?;
        let provider = EntityId::from(provider);
        if provider == receiver {
            return Err(malformed(format!("self-edge on `{receiver}`")));
        }
        let provider_sampled = parse_flag(field(5), HEADER[5], line)?;
        if !receiver_sampled && !provider_sampled {
            return Err(malformed(
                "edge has no sampled endpoint to have reported it".into(),
            ));
        }
        builder.declare(&receiver, receiver_sampled, line)?;
        builder.declare(&provider, provider_sampled, line)?;
        if !builder
            .edges
            .insert(ServiceEdge::new(receiver, provider, category))
        {
            builder.duplicates += 1;
        }
    }
    if rows == 0 {
        return Err(GraphError::Empty);
    }
    Ok(villages
        .into_iter()
        .map(|(id, b)| b.finish(id))
        .collect())
}

pub fn parse_village_file(path: impl AsRef<Path>) -> Result<Vec<ParsedVillage>, GraphError> {
    let file = std::fs::File::open(path)?;
    parse_village_csv(std::io::BufReader::new(file))
}

/// Writes villages in the edge-list schema accepted by [`parse_village_csv`].
///
/// Entities without any edge are emitted as declaration rows so that the
/// output parses back to the same networks.
pub fn write_village_csv<W: Write>(
    writer: W,
    villages: &[VillageNetwork],
) -> Result<(), GraphError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    let flag = |b: bool| if b { "1" } else { "0" };
    for net in villages {
        let mut touched: BTreeSet<&EntityId> = BTreeSet::new();
        for e in net.edges() {
            touched.insert(&e.receiver);
            touched.insert(&e.provider);
            w.write_record([
                net.village_id(),
                e.receiver.as_str(),
                e.provider.as_str(),
                e.category.token(),
                flag(net.is_sampled(e.receiver.as_str())),
                flag(net.is_sampled(e.provider.as_str())),
            ])?;
        }
        let isolated = net
            .sampled_households()
            .iter()
            .map(|id| (id, true))
            .chain(net.external_providers().iter().map(|id| (id, false)))
            .filter(|(id, _)| !touched.contains(id));
        for (id, sampled) in isolated {
            w.write_record([net.village_id(), id.as_str(), "", "", flag(sampled), ""])?;
        }
    }
    w.flush()?;
    Ok(())
}
