//! Network file format.
//!
//! Layout: the four magic bytes `DSAR`, one format-version byte, then a UTF-8
//! JSON document:
//!
//! ```text
//! {"nodes":[{"id":0,"lat":..,"lon":..},..],
//!  "edges":[{"id":0,"from":0,"to":1,"vmax":..,"gcd":..,"wfast":..},..],
//!  "curves":[{"in":0,"out":1,"cx":..,"cy":..,"r":..|"inf","eo":..,"xo":..},..]}
//! ```
//!
//! Floats are written with 17 significant digits so that reading them back
//! yields the identical bit pattern. Missing edge attributes are `null`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::geo::geodesy::GeoPoint;
use crate::geo::graph::{Curve, EdgeId, NodeId, RoadEdge, RoadGraph};
use crate::geo::planar::Point2;

pub const MAGIC: &[u8; 4] = b"DSAR";
pub const FORMAT_VERSION: u8 = 0x01;

#[derive(Debug, Error)]
pub enum NetworkFileError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a network file (bad magic)")]
    BadMagic,
    #[error("unsupported network format version {0:#04x}")]
    VersionMismatch(u8),
    #[error("network file is truncated")]
    Truncated,
    #[error("malformed network document: {0}")]
    Malformed(String),
    #[error("network violates an invariant: {0}")]
    InvariantViolation(String),
}

fn num(out: &mut String, x: f64) {
    // `{:e}` with 16 fractional digits = 17 significant digits.
    write!(out, "{x:.16e}").expect("write to String");
}

fn opt_num(out: &mut String, x: Option<f64>) {
    match x {
        Some(v) => num(out, v),
        None => out.push_str("null"),
    }
}

pub fn encode_network(g: &RoadGraph) -> Vec<u8> {
    let mut s = String::with_capacity(64 * (g.node_count() + 2 * g.edge_count() + 2 * g.curve_count()));
    s.push_str("{\"nodes\":[");
    for (i, p) in g.nodes().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{{\"id\":{i},\"lat\":").unwrap();
        num(&mut s, p.lat());
        s.push_str(",\"lon\":");
        num(&mut s, p.lon());
        s.push('}');
    }
    s.push_str("],\"edges\":[");
    for (i, e) in g.edges().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{{\"id\":{i},\"from\":{},\"to\":{},\"vmax\":", e.from.0, e.to.0).unwrap();
        opt_num(&mut s, e.v_max);
        s.push_str(",\"gcd\":");
        opt_num(&mut s, e.gcd);
        s.push_str(",\"wfast\":");
        opt_num(&mut s, e.w_fast);
        s.push('}');
    }
    s.push_str("],\"curves\":[");
    for (i, c) in g.curves().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{{\"in\":{},\"out\":{},\"cx\":", c.in_edge.0, c.out_edge.0).unwrap();
        num(&mut s, c.center.x);
        s.push_str(",\"cy\":");
        num(&mut s, c.center.y);
        s.push_str(",\"r\":");
        if c.radius.is_infinite() {
            s.push_str("\"inf\"");
        } else {
            num(&mut s, c.radius);
        }
        s.push_str(",\"eo\":");
        num(&mut s, c.entry_offset);
        s.push_str(",\"xo\":");
        num(&mut s, c.exit_offset);
        s.push('}');
    }
    s.push_str("]}");

    let mut out = Vec::with_capacity(5 + s.len());
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(s.as_bytes());
    out
}

#[derive(Deserialize)]
struct NodeDoc {
    id: u32,
    lat: f64,
    lon: f64,
}

#[derive(Deserialize)]
struct EdgeDoc {
    id: u32,
    from: u32,
    to: u32,
    vmax: Option<f64>,
    gcd: Option<f64>,
    wfast: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RadiusDoc {
    Finite(f64),
    Tag(String),
}

#[derive(Deserialize)]
struct CurveDoc {
    #[serde(rename = "in")]
    in_edge: u32,
    out: u32,
    cx: f64,
    cy: f64,
    r: RadiusDoc,
    eo: f64,
    xo: f64,
}

#[derive(Deserialize)]
struct NetworkDoc {
    nodes: Vec<NodeDoc>,
    edges: Vec<EdgeDoc>,
    curves: Vec<CurveDoc>,
}

pub fn decode_network(bytes: &[u8]) -> Result<RoadGraph, NetworkFileError> {
    if bytes.len() < MAGIC.len() {
        return Err(NetworkFileError::Truncated);
    }
    if &bytes[..4] != MAGIC {
        return Err(NetworkFileError::BadMagic);
    }
    let Some(&version) = bytes.get(4) else {
        return Err(NetworkFileError::Truncated);
    };
    if version != FORMAT_VERSION {
        return Err(NetworkFileError::VersionMismatch(version));
    }
    let doc: NetworkDoc = serde_json::from_slice(&bytes[5..]).map_err(|e| {
        if e.is_eof() {
            NetworkFileError::Truncated
        } else {
            NetworkFileError::Malformed(e.to_string())
        }
    })?;
    let bad = |m: String| NetworkFileError::InvariantViolation(m);

    let mut g = RoadGraph::new();
    for (i, n) in doc.nodes.iter().enumerate() {
        if n.id as usize != i {
            return Err(bad(format!("node ids are not dense at position {i}")));
        }
        let p = GeoPoint::new(n.lat, n.lon).map_err(|e| bad(e.to_string()))?;
        g.add_node(p);
    }
    for (i, e) in doc.edges.iter().enumerate() {
        if e.id as usize != i {
            return Err(bad(format!("edge ids are not dense at position {i}")));
        }
        if e.from as usize >= g.node_count() || e.to as usize >= g.node_count() {
            return Err(bad(format!("edge e{i} references a missing node")));
        }
        if e.from == e.to {
            return Err(bad(format!("edge e{i} is a self loop")));
        }
        g.push_edge(RoadEdge { from: NodeId(e.from), to: NodeId(e.to), v_max: e.vmax, gcd: e.gcd, w_fast: e.wfast })
            .map_err(|e| bad(e.to_string()))?;
    }
    for c in &doc.curves {
        if c.in_edge as usize >= g.edge_count() || c.out as usize >= g.edge_count() {
            return Err(bad(format!("curve (e{},e{}) references a missing edge", c.in_edge, c.out)));
        }
        let radius = match &c.r {
            RadiusDoc::Finite(r) => *r,
            RadiusDoc::Tag(t) if t == "inf" => f64::INFINITY,
            RadiusDoc::Tag(t) => return Err(NetworkFileError::Malformed(format!("bad radius {t:?}"))),
        };
        let key = (EdgeId(c.in_edge), EdgeId(c.out));
        let curve = Curve {
            in_edge: key.0,
            out_edge: key.1,
            center: Point2::new(c.cx, c.cy),
            radius,
            entry_offset: c.eo,
            exit_offset: c.xo,
        };
        if g.curves.insert(key, curve).is_some() {
            return Err(bad(format!("duplicate curve (e{},e{})", c.in_edge, c.out)));
        }
    }
    let complete = g.edges().iter().all(|e| e.v_max.is_some() && e.gcd.is_some() && e.w_fast.is_some())
        && g.edge_ids().all(|a| g.outgoing(g.edge(a).to).iter().all(|&b| g.curves.contains_key(&(a, b))));
    g.enhanced = complete && (g.curve_count() > 0 || g.edge_count() == 0 || no_pairs(&g));
    g.validate().map_err(bad)?;
    Ok(g)
}

fn no_pairs(g: &RoadGraph) -> bool {
    g.edge_ids().all(|a| g.outgoing(g.edge(a).to).is_empty())
}

pub fn save_network(g: &RoadGraph, path: impl AsRef<Path>) -> Result<(), NetworkFileError> {
    fs::write(path, encode_network(g))?;
    Ok(())
}

pub fn load_network(path: impl AsRef<Path>) -> Result<RoadGraph, NetworkFileError> {
    decode_network(&fs::read(path)?)
}
