use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geo::geodesy::GeoPoint;
use crate::geo::planar::Point2;
use crate::geo::GraphError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A directed road segment. The three derived quantities stay `None` until
/// the corresponding enhancement pass ran.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadEdge {
    pub from: NodeId,
    pub to: NodeId,
    /// Speed limit in m/s.
    pub v_max: Option<f64>,
    /// Great-circle length in meters.
    pub gcd: Option<f64>,
    /// Fastest-path weight `gcd / v_max` in seconds.
    pub w_fast: Option<f64>,
}

impl RoadEdge {
    pub fn length(&self) -> f64 {
        self.gcd.unwrap_or(0.0)
    }

    pub fn is_reverse_of(&self, other: &RoadEdge) -> bool {
        self.from == other.to && self.to == other.from
    }
}

/// Circular arc joining an incoming edge to an outgoing edge at their shared
/// node. The center is expressed in the local tangent plane of that node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub in_edge: EdgeId,
    pub out_edge: EdgeId,
    pub center: Point2<f64>,
    /// `f64::INFINITY` for straight-through pairs.
    pub radius: f64,
    /// Distance before the shared node where the arc begins.
    pub entry_offset: f64,
    /// Distance after the shared node where the arc ends.
    pub exit_offset: f64,
}

impl Curve {
    pub fn is_straight(&self) -> bool {
        self.radius.is_infinite()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoadGraph {
    nodes: Vec<GeoPoint>,
    edges: Vec<RoadEdge>,
    outgoing: Vec<Vec<EdgeId>>,
    incoming: Vec<Vec<EdgeId>>,
    pub(crate) curves: BTreeMap<(EdgeId, EdgeId), Curve>,
    pub(crate) enhanced: bool,
}

impl RoadGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, p: GeoPoint) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(p);
        self.outgoing.push(Vec::new());
        self.incoming.push(Vec::new());
        self.enhanced = false;
        id
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId, v_max: Option<f64>) -> Result<EdgeId, GraphError> {
        for n in [from, to] {
            if n.index() >= self.nodes.len() {
                return Err(GraphError::UnknownNode(n));
            }
        }
        if from == to {
            return Err(GraphError::SelfLoop(from));
        }
        self.push_edge(RoadEdge { from, to, v_max, gcd: None, w_fast: None })
    }

    pub(crate) fn push_edge(&mut self, edge: RoadEdge) -> Result<EdgeId, GraphError> {
        let id = EdgeId(self.edges.len() as u32);
        self.outgoing[edge.from.index()].push(id);
        self.incoming[edge.to.index()].push(id);
        self.edges.push(edge);
        self.enhanced = false;
        Ok(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: NodeId) -> GeoPoint {
        self.nodes[id.index()]
    }

    pub fn edge(&self, id: EdgeId) -> &RoadEdge {
        &self.edges[id.index()]
    }

    pub(crate) fn edge_mut(&mut self, id: EdgeId) -> &mut RoadEdge {
        &mut self.edges[id.index()]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn nodes(&self) -> &[GeoPoint] {
        &self.nodes
    }

    pub fn edges(&self) -> &[RoadEdge] {
        &self.edges
    }

    pub fn outgoing(&self, n: NodeId) -> &[EdgeId] {
        &self.outgoing[n.index()]
    }

    pub fn incoming(&self, n: NodeId) -> &[EdgeId] {
        &self.incoming[n.index()]
    }

    pub fn find_edge(&self, from: NodeId, to: NodeId) -> Option<EdgeId> {
        self.outgoing(from).iter().copied().find(|&e| self.edge(e).to == to)
    }

    pub fn curve(&self, in_edge: EdgeId, out_edge: EdgeId) -> Option<&Curve> {
        self.curves.get(&(in_edge, out_edge))
    }

    pub fn curves(&self) -> impl Iterator<Item = &Curve> {
        self.curves.values()
    }

    pub fn curve_count(&self) -> usize {
        self.curves.len()
    }

    pub fn is_enhanced(&self) -> bool {
        self.enhanced
    }

    /// Number of distinct neighbours of `n` when edge direction is ignored.
    pub fn road_degree(&self, n: NodeId) -> usize {
        let mut nb: Vec<NodeId> = self
            .outgoing(n)
            .iter()
            .map(|&e| self.edge(e).to)
            .chain(self.incoming(n).iter().map(|&e| self.edge(e).from))
            .collect();
        nb.sort_unstable();
        nb.dedup();
        nb.len()
    }

    /// Intersections are nodes where at least three roads meet.
    pub fn is_intersection(&self, n: NodeId) -> bool {
        self.road_degree(n) >= 3
    }

    /// Keeps the nodes flagged in `keep` and every edge between two kept
    /// nodes. Ids are re-densified in their original order.
    pub(crate) fn retain_nodes(&self, keep: &[bool]) -> (RoadGraph, Vec<Option<NodeId>>, Vec<Option<EdgeId>>) {
        let mut out = RoadGraph::new();
        let mut node_map = vec![None; self.nodes.len()];
        for (i, p) in self.nodes.iter().enumerate() {
            if keep[i] {
                node_map[i] = Some(out.add_node(*p));
            }
        }
        let mut edge_map = vec![None; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if let (Some(f), Some(t)) = (node_map[e.from.index()], node_map[e.to.index()]) {
                let id = out.push_edge(RoadEdge { from: f, to: t, ..*e }).expect("mapped nodes exist");
                edge_map[i] = Some(id);
            }
        }
        for ((a, b), c) in &self.curves {
            if let (Some(na), Some(nb)) = (edge_map[a.index()], edge_map[b.index()]) {
                out.curves.insert((na, nb), Curve { in_edge: na, out_edge: nb, ..*c });
            }
        }
        out.enhanced = self.enhanced;
        (out, node_map, edge_map)
    }

    /// Checks the structural invariants; used after loading and in tests.
    pub fn validate(&self) -> Result<(), String> {
        for (i, e) in self.edges.iter().enumerate() {
            if e.from.index() >= self.nodes.len() || e.to.index() >= self.nodes.len() {
                return Err(format!("edge e{i} references a missing node"));
            }
            if e.from == e.to {
                return Err(format!("edge e{i} is a self loop"));
            }
            for (name, v) in [("vmax", e.v_max), ("gcd", e.gcd), ("wfast", e.w_fast)] {
                if let Some(v) = v {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(format!("edge e{i} has non-positive {name}"));
                    }
                }
            }
            if let (Some(v), Some(d), Some(w)) = (e.v_max, e.gcd, e.w_fast) {
                if (w * v - d).abs() > 1e-9 * d {
                    return Err(format!("edge e{i} has inconsistent fastest weight"));
                }
            }
        }
        for ((a, b), c) in &self.curves {
            if a.index() >= self.edges.len() || b.index() >= self.edges.len() {
                return Err(format!("curve ({a},{b}) references a missing edge"));
            }
            if self.edge(*a).to != self.edge(*b).from {
                return Err(format!("curve ({a},{b}) joins edges that do not meet"));
            }
            if !(c.radius > 0.0) {
                return Err(format!("curve ({a},{b}) has non-positive radius"));
            }
            if c.entry_offset > self.edge(*a).length() || c.exit_offset > self.edge(*b).length() {
                return Err(format!("curve ({a},{b}) extends past its edges"));
            }
        }
        if self.enhanced {
            for (i, e) in self.edges.iter().enumerate() {
                if e.v_max.is_none() || e.gcd.is_none() || e.w_fast.is_none() {
                    return Err(format!("enhanced graph has un-enhanced edge e{i}"));
                }
            }
            for a in self.edge_ids() {
                for &b in self.outgoing(self.edge(a).to) {
                    if !self.curves.contains_key(&(a, b)) {
                        return Err(format!("enhanced graph lacks curve ({a},{b})"));
                    }
                }
            }
        }
        Ok(())
    }
}
