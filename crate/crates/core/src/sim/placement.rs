use rand::Rng;

use super::config::{Range, VehicleSettings};
use super::SimError;
use crate::dynamics::{Route, VehicleProps};
use crate::geo::{NodeId, RoadGraph};
use crate::routing::{dijkstra, PathMode, RoutingError};

#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub props: VehicleProps<f64>,
    pub route: Route,
}

/// Uniform draw rounded to three decimals.
pub fn draw_property<R: Rng + ?Sized>(r: Range, rng: &mut R) -> f64 {
    let x = if r.lo == r.hi { r.lo } else { rng.gen_range(r.lo..=r.hi) };
    (x * 1000.0).round() / 1000.0
}

pub fn draw_props<R: Rng + ?Sized>(s: &VehicleSettings, rng: &mut R) -> Result<VehicleProps<f64>, SimError> {
    let mass = draw_property(s.mass, rng);
    let f_max = draw_property(s.f_max, rng);
    let eta = draw_property(s.eta, rng);
    let tau = draw_property(s.tau, rng);
    let length = draw_property(s.length, rng);
    VehicleProps::new(mass, f_max, eta, tau, length).map_err(|e| SimError::Config(e.to_string()))
}

/// Goal drawn uniformly from every node but `start`, retried until a path
/// exists or the attempt budget runs out.
pub fn route_from<R: Rng + ?Sized>(
    g: &RoadGraph,
    start: NodeId,
    mode: PathMode,
    attempts: usize,
    rng: &mut R,
) -> Result<Option<Route>, SimError> {
    let n = g.node_count();
    if n < 2 {
        return Ok(None);
    }
    for _ in 0..attempts {
        let mut j = rng.gen_range(0..n - 1);
        if j >= start.index() {
            j += 1;
        }
        match dijkstra(g, start, NodeId(j as u32), mode) {
            Ok(path) => return Ok(Some(Route::new(g, &path)?)),
            Err(RoutingError::NoPath) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(None)
}

/// Places `settings.n_vehicles` vehicles on distinct start nodes, each with
/// a reachable goal. Properties are drawn per vehicle, then the start and goal
/// are resampled together until a path is found.
pub fn place_vehicles<R: Rng + ?Sized>(
    g: &RoadGraph,
    settings: &VehicleSettings,
    mode: PathMode,
    rng: &mut R,
) -> Result<Vec<Placement>, SimError> {
    let n = g.node_count();
    if settings.n_vehicles > n {
        return Err(SimError::TooManyVehicles { requested: settings.n_vehicles, nodes: n });
    }
    let mut free: Vec<NodeId> = g.node_ids().collect();
    let mut out = Vec::with_capacity(settings.n_vehicles);
    for id in 0..settings.n_vehicles {
        let props = draw_props(settings, rng)?;
        let mut placed = None;
        for _ in 0..10 * n {
            let k = rng.gen_range(0..free.len());
            if let Some(route) = route_from(g, free[k], mode, 1, rng)? {
                placed = Some((k, route));
                break;
            }
        }
        let (k, route) = placed.ok_or(SimError::PlacementFailed { vehicle: id })?;
        free.swap_remove(k);
        out.push(Placement { props, route });
    }
    Ok(out)
}
