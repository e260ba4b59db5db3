//! Derived edge attributes: lengths, speed limits, fastest-path weights and
//! the curve geometry joining consecutive edges.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;

use crate::geo::geodesy::{haversine_gcd, project_local};
use crate::geo::graph::{Curve, EdgeId, RoadGraph};
use crate::geo::planar::{circle_through, CircleFit, Point2};
use crate::geo::GraphError;

/// Urban default of roughly 50 km/h.
pub const DEFAULT_SPEED_LIMIT: f64 = 13.9;
pub const DEFAULT_OFFSET_CAP: f64 = 10.0;
/// Radius assigned when an edge is followed by its own reverse.
pub const U_TURN_RADIUS: f64 = 1.0;

const MAX_CHAIN_EDGES: usize = 64;
const STRAIGHT_ANGLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnhanceOptions {
    pub default_v_max: f64,
    pub offset_cap: f64,
}

impl Default for EnhanceOptions {
    fn default() -> Self {
        Self { default_v_max: DEFAULT_SPEED_LIMIT, offset_cap: DEFAULT_OFFSET_CAP }
    }
}

/// Runs all four enhancement passes in order.
pub fn enhance(g: RoadGraph, opts: &EnhanceOptions) -> Result<RoadGraph, GraphError> {
    let g = enhance_distances(g)?;
    let g = enhance_speed_limits(g, opts.default_v_max)?;
    let g = enhance_fastest_weights(g)?;
    enhance_curves(g, opts.offset_cap)
}

pub fn enhance_distances(mut g: RoadGraph) -> Result<RoadGraph, GraphError> {
    for id in g.edge_ids().collect::<Vec<_>>() {
        let e = *g.edge(id);
        let d = haversine_gcd(g.node(e.from), g.node(e.to));
        if !(d > 0.0) {
            return Err(GraphError::DegenerateEdge(id));
        }
        g.edge_mut(id).gcd = Some(d);
    }
    Ok(g)
}

pub fn enhance_speed_limits(mut g: RoadGraph, default_v: f64) -> Result<RoadGraph, GraphError> {
    if !(default_v > 0.0 && default_v.is_finite()) {
        return Err(GraphError::InvalidDefault(default_v));
    }
    for id in g.edge_ids().collect::<Vec<_>>() {
        let e = g.edge_mut(id);
        if e.v_max.is_none() {
            e.v_max = Some(default_v);
        }
    }
    Ok(g)
}

pub fn enhance_fastest_weights(mut g: RoadGraph) -> Result<RoadGraph, GraphError> {
    for id in g.edge_ids().collect::<Vec<_>>() {
        let e = g.edge_mut(id);
        match (e.gcd, e.v_max) {
            (Some(d), Some(v)) => e.w_fast = Some(d / v),
            _ => return Err(GraphError::NotEnhanced(id)),
        }
    }
    Ok(g)
}

/// Overwrites every speed limit with a uniform draw from `choices` and
/// refreshes the fastest-path weights.
pub fn randomize_speed_limits<R: Rng>(mut g: RoadGraph, choices: &[f64], rng: &mut R) -> Result<RoadGraph, GraphError> {
    let bad = choices.iter().copied().find(|v| !(*v > 0.0 && v.is_finite()));
    if choices.is_empty() || bad.is_some() {
        return Err(GraphError::InvalidDefault(bad.unwrap_or(0.0)));
    }
    let was_enhanced = g.enhanced;
    for id in g.edge_ids().collect::<Vec<_>>() {
        g.edge_mut(id).v_max = Some(choices[rng.gen_range(0..choices.len())]);
    }
    if g.edges().iter().all(|e| e.gcd.is_some()) {
        g = enhance_fastest_weights(g)?;
    }
    g.enhanced = was_enhanced;
    Ok(g)
}

/// Fits a curve onto every ordered pair of edges meeting at a node.
pub fn enhance_curves(mut g: RoadGraph, offset_cap: f64) -> Result<RoadGraph, GraphError> {
    if let Some(id) = g.edge_ids().find(|&e| g.edge(e).gcd.is_none()) {
        return Err(GraphError::NotEnhanced(id));
    }
    let mut curves = Vec::new();
    for i in g.edge_ids() {
        for &j in g.outgoing(g.edge(i).to) {
            curves.push(fit_pair(&g, i, j, offset_cap));
        }
    }
    g.curves = curves.into_iter().map(|c| ((c.in_edge, c.out_edge), c)).collect();
    g.enhanced = g.edges().iter().all(|e| e.v_max.is_some() && e.w_fast.is_some());
    Ok(g)
}

fn fit_pair(g: &RoadGraph, i: EdgeId, j: EdgeId, cap: f64) -> Curve {
    let (ei, ej) = (g.edge(i), g.edge(j));
    let o = cap.min(ei.length() / 2.0).min(ej.length() / 2.0);
    let u_turn = Curve {
        in_edge: i,
        out_edge: j,
        center: Point2::zero(),
        radius: U_TURN_RADIUS,
        entry_offset: o,
        exit_offset: o,
    };
    if ej.is_reverse_of(ei) {
        return u_turn;
    }
    let origin = g.node(ei.to);
    let u_in = project_local(origin, g.node(ei.from)).normalized();
    let u_out = project_local(origin, g.node(ej.to)).normalized();
    let fit = match chain_fit(g, i, j, cap) {
        Some(fit) => fit,
        None => match circle_through(u_in * o, Point2::zero(), u_out * o) {
            Ok(fit) => fit,
            // Both neighbours lie in the same direction: the road folds back.
            Err(_) => return u_turn,
        },
    };
    let (center, radius) = match fit {
        CircleFit::Finite { center, radius } => (center, radius),
        CircleFit::Straight => (Point2::zero(), f64::INFINITY),
    };
    Curve { in_edge: i, out_edge: j, center, radius, entry_offset: o, exit_offset: o }
}

/// Signed heading change when driving `a` then `b`; positive turns left.
fn turn_angle(g: &RoadGraph, a: EdgeId, b: EdgeId) -> f64 {
    let (ea, eb) = (g.edge(a), g.edge(b));
    let origin = g.node(ea.to);
    let heading_in = Point2::zero() - project_local(origin, g.node(ea.from));
    let heading_out = project_local(origin, g.node(eb.to));
    heading_in.cross(heading_out).atan2(heading_in.dot(heading_out))
}

/// Curves drawn with several short segments are fitted as a whole: the run of
/// short edges around the pair that keeps turning the same way is collected
/// and one circle is fitted through its first, middle and last node.
fn chain_fit(g: &RoadGraph, i: EdgeId, j: EdgeId, cap: f64) -> Option<CircleFit<f64>> {
    let short = |e: EdgeId| g.edge(e).length() < 2.0 * cap;
    let k = g.edge(i).to;
    if g.road_degree(k) != 2 || !short(i) || !short(j) {
        return None;
    }
    let first_turn = turn_angle(g, i, j);
    if first_turn.abs() < STRAIGHT_ANGLE_TOL {
        return None;
    }
    let same_way = |a: f64| a.abs() >= STRAIGHT_ANGLE_TOL && a.signum() == first_turn.signum();
    let mut chain = VecDeque::from([i, j]);
    let mut total = first_turn.abs();

    while chain.len() < MAX_CHAIN_EDGES {
        let head = chain[0];
        let n = g.edge(head).from;
        if g.road_degree(n) != 2 {
            break;
        }
        let preds: Vec<EdgeId> =
            g.incoming(n).iter().copied().filter(|&p| !g.edge(p).is_reverse_of(g.edge(head))).collect();
        let [p] = preds[..] else { break };
        let a = turn_angle(g, p, head);
        if chain.contains(&p) || !short(p) || !same_way(a) || total + a.abs() >= PI {
            break;
        }
        total += a.abs();
        chain.push_front(p);
    }
    while chain.len() < MAX_CHAIN_EDGES {
        let tail = *chain.back().expect("chain is non-empty");
        let n = g.edge(tail).to;
        if g.road_degree(n) != 2 {
            break;
        }
        let succs: Vec<EdgeId> =
            g.outgoing(n).iter().copied().filter(|&s| !g.edge(s).is_reverse_of(g.edge(tail))).collect();
        let [s] = succs[..] else { break };
        let a = turn_angle(g, tail, s);
        if chain.contains(&s) || !short(s) || !same_way(a) || total + a.abs() >= PI {
            break;
        }
        total += a.abs();
        chain.push_back(s);
    }
    if chain.len() < 3 {
        return None;
    }
    let mut nodes = vec![g.edge(chain[0]).from];
    nodes.extend(chain.iter().map(|&e| g.edge(e).to));
    let origin = g.node(k);
    let at = |idx: usize| project_local(origin, g.node(nodes[idx]));
    circle_through(at(0), at(nodes.len() / 2), at(nodes.len() - 1)).ok()
}
