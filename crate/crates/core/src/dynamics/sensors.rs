//! The nine on-board sensors. Every distance saturates at the horizon so the
//! reading always has the same shape.

use super::{accel_lat, accel_long, velocity, MotionState, PhysConstants, Route};
use crate::scalar::Scalar;

pub const DEFAULT_HORIZON: f64 = 200.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SensorReading<T> {
    pub v: T,
    pub v_limit: T,
    pub a_long: T,
    pub a_lat: T,
    pub d_next_curve: T,
    /// Radius of that curve, the horizon when there is none.
    pub r_next_curve: T,
    pub d_curve_next_intersection: T,
    pub d_next_vehicle_same_path: T,
    pub d_next_vehicle_next_intersection: T,
}

impl<T: Scalar> SensorReading<T> {
    pub fn to_array(&self) -> [T; 9] {
        [
            self.v,
            self.v_limit,
            self.a_long,
            self.a_lat,
            self.d_next_curve,
            self.r_next_curve,
            self.d_curve_next_intersection,
            self.d_next_vehicle_same_path,
            self.d_next_vehicle_next_intersection,
        ]
    }
}

/// What the sensors may know about one vehicle.
#[derive(Clone, Copy, Debug)]
pub struct VehicleView<'a, T> {
    pub route: &'a Route,
    pub motion: MotionState<T>,
    /// Velocity one tick earlier.
    pub prev_v: T,
    pub length: T,
}

impl<T: Scalar> VehicleView<'_, T> {
    fn pos(&self) -> f64 {
        self.motion.p.to_f64_lossy()
    }
}

/// Reads the sensors of `fleet[me]`; the rest of the fleet is only looked at.
pub fn read_sensors<T: Scalar>(
    fleet: &[VehicleView<'_, T>],
    me: usize,
    k: &PhysConstants<T>,
    horizon: f64,
) -> SensorReading<T> {
    let own = &fleet[me];
    let route = own.route;
    let s = own.pos();
    let cap = |d: f64| T::lit(d.clamp(0.0, horizon));

    let v = velocity(&own.motion, k);
    let a_lat = accel_lat(v, T::lit(route.radius_at(s)));

    let ahead = route.junctions().iter().find(|j| j.radius.is_finite() && j.entry > s && j.entry - s <= horizon);
    let (d_next_curve, r_next_curve) = match ahead {
        Some(j) => (j.entry - s, j.radius.min(horizon)),
        None => (horizon, horizon),
    };

    // Next intersection node strictly ahead and within range.
    let next_x = (1..route.nodes().len())
        .map(|i| (i, route.node_offset(i)))
        .skip_while(|&(_, o)| o <= s)
        .take_while(|&(_, o)| o - s <= horizon)
        .find(|&(i, _)| route.is_intersection(i));

    let d_curve_next_intersection =
        next_x.and_then(|(i, _)| route.junctions().get(i - 1)).map_or(horizon, |j| (j.entry - s).max(0.0));

    let mut gap = horizon;
    let mut conflict = horizon;
    for (i, other) in fleet.iter().enumerate() {
        if i == me {
            continue;
        }
        let os = other.pos();
        let oi = other.route.edge_index_at(os);
        let o_edge = other.route.edges()[oi];
        let o_along = os - other.route.node_offset(oi);
        if let Some(at) = route.position_on_edge(o_edge, o_along, s, horizon) {
            if at > s {
                gap = gap.min(at - s - other.length.to_f64_lossy());
            }
        }
        if let Some((xi, x_at)) = next_x {
            let node = route.nodes()[xi];
            if let Some(theirs) = other.route.position_of_node(node, os, horizon) {
                conflict = conflict.min((x_at - s) + (theirs - os));
            }
        }
    }

    SensorReading {
        v,
        v_limit: T::lit(route.v_max_at(s)),
        a_long: accel_long(own.prev_v, v, k),
        a_lat,
        d_next_curve: cap(d_next_curve),
        r_next_curve: T::lit(r_next_curve),
        d_curve_next_intersection: cap(d_curve_next_intersection),
        d_next_vehicle_same_path: cap(gap),
        d_next_vehicle_next_intersection: cap(conflict),
    }
}
