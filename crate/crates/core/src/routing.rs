//! Single-pair Dijkstra over a road graph.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::geo::{EdgeId, NodeId, RoadEdge, RoadGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathMode {
    /// Minimize meters driven.
    Shortest,
    /// Minimize the fastest-path weight (time at the speed limit).
    Fastest,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RoutingError {
    #[error("start and goal are the same node")]
    SameNode,
    #[error("node {0} is not part of the graph")]
    UnknownNode(NodeId),
    #[error("edge {0} has a non-positive weight")]
    InvalidWeight(EdgeId),
    #[error("edge {0} lacks the weight for this mode")]
    NotEnhanced(EdgeId),
    #[error("goal is unreachable")]
    NoPath,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub total_cost: f64,
}

pub fn mode_weight(e: &RoadEdge, mode: PathMode) -> Option<f64> {
    match mode {
        PathMode::Shortest => e.gcd,
        PathMode::Fastest => e.w_fast,
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost, then on node id.
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn dijkstra(g: &RoadGraph, start: NodeId, goal: NodeId, mode: PathMode) -> Result<Path, RoutingError> {
    dijkstra_by(g, start, goal, |id| mode_weight(g.edge(id), mode).ok_or(RoutingError::NotEnhanced(id)))
}

/// Dijkstra with a caller-supplied edge weight. Every weight must be
/// strictly positive.
pub fn dijkstra_by<F>(g: &RoadGraph, start: NodeId, goal: NodeId, weight: F) -> Result<Path, RoutingError>
where
    F: Fn(EdgeId) -> Result<f64, RoutingError>,
{
    for n in [start, goal] {
        if n.index() >= g.node_count() {
            return Err(RoutingError::UnknownNode(n));
        }
    }
    if start == goal {
        return Err(RoutingError::SameNode);
    }
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut via: Vec<Option<EdgeId>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[start.index()] = 0.0;
    heap.push(Entry { cost: 0.0, node: start });

    while let Some(Entry { cost, node }) = heap.pop() {
        if settled[node.index()] {
            continue;
        }
        settled[node.index()] = true;
        if node == goal {
            break;
        }
        for &e in g.outgoing(node) {
            let w = weight(e)?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(RoutingError::InvalidWeight(e));
            }
            let to = g.edge(e).to;
            let cand = cost + w;
            if cand < dist[to.index()] {
                dist[to.index()] = cand;
                via[to.index()] = Some(e);
                heap.push(Entry { cost: cand, node: to });
            }
        }
    }
    if !settled[goal.index()] {
        return Err(RoutingError::NoPath);
    }
    let mut edges = Vec::new();
    let mut cur = goal;
    while let Some(e) = via[cur.index()] {
        edges.push(e);
        cur = g.edge(e).from;
    }
    edges.reverse();
    let mut nodes = vec![start];
    nodes.extend(edges.iter().map(|&e| g.edge(e).to));
    Ok(Path { nodes, edges, total_cost: dist[goal.index()] })
}
