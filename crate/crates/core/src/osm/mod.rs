//! OSM-XML import: drivable ways become directed road edges.

pub mod parse;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::geo::{self, EnhanceOptions, GeoPoint, GraphError, NodeId, RoadEdge, RoadGraph};

pub use parse::{parse_osm_xml, ParsedOsm, RawOsmEntity};

pub const KMH_PER_MS: f64 = 3.6;
pub const KM_PER_MILE: f64 = 1.609_344;

pub const DRIVABLE_HIGHWAYS: &[&str] = &[
    "motorway",
    "trunk",
    "primary",
    "secondary",
    "tertiary",
    "unclassified",
    "residential",
    "living_street",
    "service",
    "motorway_link",
    "trunk_link",
    "primary_link",
    "secondary_link",
    "tertiary_link",
];

#[derive(Debug, Error)]
pub enum OsmError {
    #[error("OSM-XML parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },
    #[error("the file contains no drivable road")]
    EmptyNetwork,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Both,
    /// One-way in the order the nodes are listed.
    Forward,
    /// One-way against the listed order (`oneway=-1`).
    Reverse,
}

impl Direction {
    pub fn is_oneway(self) -> bool {
        self != Direction::Both
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RejectReason {
    MissingHighway,
    NotDrivable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum WayClass {
    Drivable { direction: Direction, v_max: Option<f64> },
    Rejected(RejectReason),
}

/// Parses an OSM `maxspeed` value into m/s. Bare numbers are km/h; a `mph`
/// suffix switches to miles per hour. Symbolic values and ranges yield `None`.
pub fn parse_maxspeed(raw: &str) -> Option<f64> {
    let s = raw.trim();
    let (number, factor) = if let Some(n) = s.strip_suffix("mph") {
        (n.trim(), KM_PER_MILE)
    } else if let Some(n) = ["km/h", "kmh", "kph"].iter().find_map(|u| s.strip_suffix(u)) {
        (n.trim(), 1.0)
    } else {
        (s, 1.0)
    };
    let v: f64 = number.parse().ok()?;
    (v.is_finite() && v > 0.0).then(|| v * factor / KMH_PER_MS)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImportOptions {
    pub drivable: Vec<String>,
    pub enhance: EnhanceOptions,
}

impl Default for ImportOptions {
    fn default() -> Self {
        Self { drivable: DRIVABLE_HIGHWAYS.iter().map(|s| s.to_string()).collect(), enhance: EnhanceOptions::default() }
    }
}

pub fn classify_way(tags: &BTreeMap<String, String>, drivable: &[String]) -> WayClass {
    let Some(highway) = tags.get("highway") else {
        return WayClass::Rejected(RejectReason::MissingHighway);
    };
    if !drivable.iter().any(|d| d == highway) {
        return WayClass::Rejected(RejectReason::NotDrivable(highway.clone()));
    }
    let direction = match tags.get("oneway").map(|s| s.trim()) {
        Some("yes" | "true" | "1") => Direction::Forward,
        Some("-1") => Direction::Reverse,
        _ => Direction::Both,
    };
    let v_max = tags.get("maxspeed").and_then(|s| parse_maxspeed(s));
    WayClass::Drivable { direction, v_max }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ImportReport {
    pub nodes_extracted: usize,
    pub nodes_skipped: usize,
    pub ways_extracted: usize,
    pub ways_skipped_type: usize,
    pub ways_skipped_unknown_type: usize,
    pub ways_too_short: usize,
    pub edges_missing_vmax: usize,
    pub refs_dangling: usize,
    pub segments_degenerate: usize,
    pub nodes_in_network: usize,
    pub edges_in_network: usize,
}

impl fmt::Display for ImportReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("nodes_extracted", self.nodes_extracted),
            ("nodes_skipped", self.nodes_skipped),
            ("ways_extracted", self.ways_extracted),
            ("ways_skipped_type", self.ways_skipped_type),
            ("ways_skipped_unknown_type", self.ways_skipped_unknown_type),
            ("ways_too_short", self.ways_too_short),
            ("edges_missing_vmax", self.edges_missing_vmax),
            ("refs_dangling", self.refs_dangling),
            ("segments_degenerate", self.segments_degenerate),
            ("nodes_in_network", self.nodes_in_network),
            ("edges_in_network", self.edges_in_network),
        ];
        for (k, v) in rows {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// An imported network together with the OSM way each edge came from.
#[derive(Clone, Debug)]
pub struct OsmNetwork {
    pub graph: RoadGraph,
    pub edge_way: Vec<i64>,
    pub report: ImportReport,
}

/// Turns parsed entities into a cleaned and enhanced road graph.
pub fn build_graph(parsed: &ParsedOsm, opts: &ImportOptions) -> Result<OsmNetwork, OsmError> {
    let mut report = ImportReport {
        nodes_skipped: parsed.nodes_skipped,
        ways_too_short: parsed.ways_too_short,
        ..Default::default()
    };

    let mut coords: HashMap<i64, GeoPoint> = HashMap::new();
    for e in &parsed.entities {
        if let RawOsmEntity::Node { osm_id, lat, lon } = *e {
            report.nodes_extracted += 1;
            coords.entry(osm_id).or_insert(GeoPoint::new(lat, lon)?);
        }
    }

    let mut g = RoadGraph::new();
    let mut node_of: HashMap<i64, NodeId> = HashMap::new();
    let mut edge_at: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    let mut edges: Vec<(RoadEdge, i64)> = Vec::new();

    for e in &parsed.entities {
        let RawOsmEntity::Way { osm_id, refs, tags } = e else { continue };
        let direction = match classify_way(tags, &opts.drivable) {
            WayClass::Drivable { direction, v_max } => (direction, v_max),
            WayClass::Rejected(RejectReason::MissingHighway) => {
                report.ways_skipped_unknown_type += 1;
                continue;
            }
            WayClass::Rejected(RejectReason::NotDrivable(_)) => {
                report.ways_skipped_type += 1;
                continue;
            }
        };
        let (direction, v_max) = direction;
        report.ways_extracted += 1;

        let mut refs = refs.clone();
        if direction == Direction::Reverse {
            refs.reverse();
        }
        report.refs_dangling += refs.iter().filter(|r| !coords.contains_key(r)).count();
        for pair in refs.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (Some(&pa), Some(&pb)) = (coords.get(&a), coords.get(&b)) else { continue };
            if a == b || pa == pb {
                report.segments_degenerate += 1;
                continue;
            }
            let mut id = |osm: i64, p: GeoPoint| *node_of.entry(osm).or_insert_with(|| g.add_node(p));
            let (na, nb) = (id(a, pa), id(b, pb));
            let mut arcs = vec![(na, nb)];
            if direction == Direction::Both {
                arcs.push((nb, na));
            }
            for (from, to) in arcs {
                match edge_at.get(&(from, to)) {
                    Some(&k) => {
                        let keep = &mut edges[k].0.v_max;
                        if v_max.unwrap_or(f64::NEG_INFINITY) > keep.unwrap_or(f64::NEG_INFINITY) {
                            *keep = v_max;
                            edges[k].1 = *osm_id;
                        }
                    }
                    None => {
                        edge_at.insert((from, to), edges.len());
                        edges.push((RoadEdge { from, to, v_max, gcd: None, w_fast: None }, *osm_id));
                    }
                }
            }
        }
    }
    if edges.is_empty() {
        return Err(OsmError::EmptyNetwork);
    }
    report.edges_missing_vmax = edges.iter().filter(|(e, _)| e.v_max.is_none()).count();
    let mut source_way = Vec::with_capacity(edges.len());
    for (e, way) in edges {
        g.add_edge(e.from, e.to, e.v_max)?;
        source_way.push(way);
    }

    let cleaned = geo::largest_wcc_mapped(&g)?;
    let mut edge_way = vec![0; cleaned.graph.edge_count()];
    for (old, new) in cleaned.edge_map.iter().enumerate() {
        if let Some(new) = new {
            edge_way[new.index()] = source_way[old];
        }
    }
    let graph = geo::enhance(cleaned.graph, &opts.enhance)?;
    report.nodes_in_network = graph.node_count();
    report.edges_in_network = graph.edge_count();
    Ok(OsmNetwork { graph, edge_way, report })
}

pub fn import_osm(bytes: &[u8], opts: &ImportOptions) -> Result<OsmNetwork, OsmError> {
    build_graph(&parse_osm_xml(bytes)?, opts)
}
