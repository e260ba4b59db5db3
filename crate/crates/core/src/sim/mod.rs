//! The simulation loop: placement, per-tick sense/act/learn cycle, statistics
//! and run drivers.

mod config;
mod placement;
mod run;
mod snapshot;
mod stats;
mod world;

use thiserror::Error;

pub use config::{ConfigError, Feature, Range, SimConfig, VehicleSettings};
pub use placement::{draw_property, place_vehicles, route_from, Placement};
pub use run::{
    evaluate, fleet_average, new_manifest, read_trace, sha256_hex, train, EvalSummary, MetricsRow, RunManifest,
    TraceRow, TrainOptions, TrainSummary,
};
pub use snapshot::{SimSnapshot, VehicleSnapshot};
pub use stats::{NoData, StatRings, StatSeries, STATS_WINDOW};
pub use world::{Command, TickReport, Vehicle, World};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{DynamicsError, RouteError};
use crate::geo::{randomize_speed_limits, RoadGraph};
use crate::learner::LearnerError;
use crate::routing::RoutingError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{requested} vehicles requested but the network has only {nodes} nodes")]
    TooManyVehicles { requested: usize, nodes: usize },
    #[error("no start/goal pair with a path found for vehicle {vehicle}")]
    PlacementFailed { vehicle: usize },
    #[error("agent expects {agent} state inputs, config provides {config}")]
    StateSize { agent: usize, config: usize },
    #[error("vehicle {vehicle}: {source}")]
    Numeric { vehicle: usize, source: DynamicsError },
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    BadConfig(#[from] ConfigError),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Applies the run-level changes of `config` to a loaded network: the speed
/// limit draw, seeded from `config.seed`.
pub fn prepare_graph(g: RoadGraph, config: &SimConfig) -> Result<RoadGraph, SimError> {
    if config.speed_limits.is_empty() {
        return Ok(g);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(3);
    randomize_speed_limits(g, &config.speed_limits, &mut rng).map_err(|e| SimError::Config(e.to_string()))
}
