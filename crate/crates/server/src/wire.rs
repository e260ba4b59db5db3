//! JSON payloads. Every top-level object carries `"v": 1`.

use serde::Serialize;

use drivesim::geo::RoadGraph;
use drivesim::sim::{SimSnapshot, StatSeries};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct WireVehicle {
    pub id: usize,
    pub lat: f64,
    pub lon: f64,
    pub heading_deg: f64,
    pub color_frac: f64,
    pub v: f64,
    pub v_limit: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WireFlags {
    pub training: bool,
    pub exploration: bool,
    pub paused: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WireSnapshot {
    pub v: u32,
    pub tick: u64,
    pub vehicles: Vec<WireVehicle>,
    pub flags: WireFlags,
    pub selected: Option<usize>,
    pub stats: Option<StatSeries>,
}

impl From<&SimSnapshot> for WireSnapshot {
    fn from(s: &SimSnapshot) -> Self {
        WireSnapshot {
            v: SCHEMA_VERSION,
            tick: s.tick,
            vehicles: s
                .vehicles
                .iter()
                .map(|v| WireVehicle {
                    id: v.id,
                    lat: v.lat,
                    lon: v.lon,
                    heading_deg: v.heading_deg,
                    color_frac: v.color_frac,
                    v: v.v,
                    v_limit: v.v_limit,
                })
                .collect(),
            flags: WireFlags { training: s.training, exploration: s.exploration, paused: s.paused },
            selected: s.selected,
            stats: s.stats.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WireStats {
    pub v: u32,
    pub id: usize,
    #[serde(flatten)]
    pub series: StatSeries,
}

#[derive(Clone, Debug, Serialize)]
struct WireNode {
    id: u32,
    lat: f64,
    lon: f64,
}

#[derive(Clone, Debug, Serialize)]
struct WireEdge {
    id: u32,
    from: u32,
    to: u32,
    v_max: Option<f64>,
    length: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
struct WireNetwork {
    v: u32,
    nodes: Vec<WireNode>,
    edges: Vec<WireEdge>,
}

pub fn network_json(g: &RoadGraph) -> String {
    let net = WireNetwork {
        v: SCHEMA_VERSION,
        nodes: g.node_ids().map(|n| WireNode { id: n.0, lat: g.node(n).lat(), lon: g.node(n).lon() }).collect(),
        edges: g
            .edge_ids()
            .map(|e| {
                let edge = g.edge(e);
                WireEdge { id: e.0, from: edge.from.0, to: edge.to.0, v_max: edge.v_max, length: edge.gcd }
            })
            .collect(),
    };
    serde_json::to_string(&net).expect("network serializes")
}

pub fn error_json(message: &str) -> String {
    serde_json::json!({ "v": SCHEMA_VERSION, "error": message }).to_string()
}
