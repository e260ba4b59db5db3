//! Arc-length view of a path: which edge, speed limit and curve apply at a
//! given distance from the start.

use thiserror::Error;

use crate::geo::{geodesy, initial_bearing_deg, EdgeId, GeoPoint, NodeId, RoadGraph};
use crate::routing::Path;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RouteError {
    #[error("path has no edges")]
    EmptyPath,
    #[error("edge {0} lacks a distance or speed limit")]
    NotEnhanced(EdgeId),
    #[error("path edges do not chain at position {0}")]
    Disconnected(usize),
}

/// Curve between two consecutive path edges, in absolute arc positions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Junction {
    pub node: NodeId,
    pub at: f64,
    pub entry: f64,
    pub exit: f64,
    /// `f64::INFINITY` when the path goes straight through.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Route {
    nodes: Vec<NodeId>,
    edges: Vec<EdgeId>,
    /// Arc position of every node; `offsets[0] == 0`.
    offsets: Vec<f64>,
    v_max: Vec<f64>,
    junctions: Vec<Junction>,
    intersection: Vec<bool>,
}

impl Route {
    pub fn new(g: &RoadGraph, path: &Path) -> Result<Self, RouteError> {
        if path.edges.is_empty() {
            return Err(RouteError::EmptyPath);
        }
        let mut offsets = vec![0.0];
        let mut v_max = Vec::with_capacity(path.edges.len());
        let mut nodes = vec![g.edge(path.edges[0]).from];
        for (i, &e) in path.edges.iter().enumerate() {
            let edge = g.edge(e);
            if edge.from != nodes[i] {
                return Err(RouteError::Disconnected(i));
            }
            let (Some(len), Some(v)) = (edge.gcd, edge.v_max) else {
                return Err(RouteError::NotEnhanced(e));
            };
            offsets.push(offsets[i] + len);
            v_max.push(v);
            nodes.push(edge.to);
        }
        let junctions = path
            .edges
            .windows(2)
            .enumerate()
            .map(|(i, pair)| {
                let at = offsets[i + 1];
                match g.curve(pair[0], pair[1]) {
                    Some(c) => Junction {
                        node: nodes[i + 1],
                        at,
                        entry: at - c.entry_offset,
                        exit: at + c.exit_offset,
                        radius: c.radius,
                    },
                    None => Junction { node: nodes[i + 1], at, entry: at, exit: at, radius: f64::INFINITY },
                }
            })
            .collect();
        let intersection = nodes.iter().map(|&n| g.is_intersection(n)).collect();
        Ok(Route { nodes, edges: path.edges.clone(), offsets, v_max, junctions, intersection })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn start(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn goal(&self) -> NodeId {
        *self.nodes.last().expect("route has nodes")
    }

    pub fn length(&self) -> f64 {
        *self.offsets.last().expect("route has nodes")
    }

    pub fn node_offset(&self, i: usize) -> f64 {
        self.offsets[i]
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn is_intersection(&self, i: usize) -> bool {
        self.intersection[i]
    }

    /// Index of the edge under arc position `s`. Node positions belong to the
    /// edge leaving them; the goal belongs to the last edge.
    pub fn edge_index_at(&self, s: f64) -> usize {
        let i = self.offsets.partition_point(|&o| o <= s);
        i.saturating_sub(1).min(self.edges.len() - 1)
    }

    pub fn edge_at(&self, s: f64) -> EdgeId {
        self.edges[self.edge_index_at(s)]
    }

    pub fn v_max_at(&self, s: f64) -> f64 {
        self.v_max[self.edge_index_at(s)]
    }

    /// Radius of the curve whose span contains `s`, infinite on straights.
    pub fn radius_at(&self, s: f64) -> f64 {
        let i = self.edge_index_at(s);
        // Only the junctions at either end of the current edge can cover `s`.
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(self.junctions.len());
        self.junctions[lo..hi].iter().find(|j| j.entry <= s && s <= j.exit).map_or(f64::INFINITY, |j| j.radius)
    }

    /// First arc position at or after `from` where the route reaches `node`.
    pub fn position_of_node(&self, node: NodeId, from: f64, limit: f64) -> Option<f64> {
        let start = self.edge_index_at(from) + 1;
        self.offsets[start..]
            .iter()
            .zip(&self.nodes[start..])
            .take_while(|(&o, _)| o - from <= limit)
            .find(|(_, &n)| n == node)
            .map(|(&o, _)| o)
    }

    /// Arc position of the point `along` meters into `edge`, if the route
    /// uses that edge at or after position `from`.
    pub fn position_on_edge(&self, edge: EdgeId, along: f64, from: f64, limit: f64) -> Option<f64> {
        let start = self.edge_index_at(from);
        (start..self.edges.len())
            .take_while(|&i| self.offsets[i] - from <= limit)
            .find(|&i| self.edges[i] == edge && self.offsets[i] + along > from)
            .map(|i| self.offsets[i] + along)
    }

    /// Geographic location and heading (degrees from north) at `s`.
    pub fn locate(&self, g: &RoadGraph, s: f64) -> (GeoPoint, f64) {
        let i = self.edge_index_at(s);
        let e = g.edge(self.edges[i]);
        let (a, b) = (g.node(e.from), g.node(e.to));
        let len = self.offsets[i + 1] - self.offsets[i];
        let t = ((s - self.offsets[i]) / len).clamp(0.0, 1.0);
        (geodesy::lerp(a, b, t), initial_bearing_deg(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::EnhanceOptions;
    use crate::netgen::straight_road;
    use crate::routing::{dijkstra, PathMode};

    fn road() -> (RoadGraph, Route) {
        let g = straight_road(4, 100.0, &EnhanceOptions::default()).unwrap();
        let p = dijkstra(&g, NodeId(0), NodeId(4), PathMode::Shortest).unwrap();
        let r = Route::new(&g, &p).unwrap();
        (g, r)
    }

    #[test]
    fn offsets_accumulate_edge_lengths() {
        let (_, r) = road();
        assert_eq!(r.edges().len(), 4);
        assert!((r.length() - 400.0).abs() < 1e-6);
        assert_eq!(r.edge_index_at(0.0), 0);
        assert_eq!(r.edge_index_at(r.node_offset(1)), 1);
        assert_eq!(r.edge_index_at(r.length()), 3);
        assert_eq!(r.edge_index_at(1e9), 3);
    }

    #[test]
    fn straight_road_has_no_lateral_curves() {
        let (_, r) = road();
        for s in [0.0, 95.0, 100.0, 250.0] {
            assert!(r.radius_at(s).is_infinite());
        }
    }

    #[test]
    fn node_and_edge_lookups() {
        let (_, r) = road();
        let n3 = r.nodes()[3];
        let at = r.position_of_node(n3, 10.0, 1e9).unwrap();
        assert!((at - r.node_offset(3)).abs() < 1e-12);
        assert_eq!(r.position_of_node(n3, 10.0, 50.0), None);
        assert_eq!(r.position_of_node(r.start(), 10.0, 1e9), None);
        let e2 = r.edges()[2];
        let p = r.position_on_edge(e2, 5.0, 0.0, 1e9).unwrap();
        assert!((p - r.node_offset(2) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn locate_interpolates_between_nodes() {
        let (g, r) = road();
        let (p, heading) = r.locate(&g, r.node_offset(1) + 50.0);
        let a = g.node(r.nodes()[1]);
        let b = g.node(r.nodes()[2]);
        assert!((p.lon() - (a.lon() + b.lon()) / 2.0).abs() < 1e-9);
        assert!((heading - 90.0).abs() < 1e-6 || (heading + 270.0).abs() < 1e-6);
    }
}
