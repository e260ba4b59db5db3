//! Road network data model and the geodesic helpers it is built on.

pub mod clean;
pub mod enhance;
pub mod geodesy;
pub mod graph;
pub mod io;
pub mod planar;

use thiserror::Error;

pub use clean::{largest_wcc, largest_wcc_mapped, weak_components, Cleaned};
pub use enhance::{
    enhance, enhance_curves, enhance_distances, enhance_fastest_weights, enhance_speed_limits, randomize_speed_limits,
    EnhanceOptions, DEFAULT_OFFSET_CAP, DEFAULT_SPEED_LIMIT,
};
pub use geodesy::{haversine, haversine_gcd, initial_bearing_deg, project_local, GeoPoint, EARTH_RADIUS_M};
pub use graph::{Curve, EdgeId, NodeId, RoadEdge, RoadGraph};
pub use io::{decode_network, encode_network, load_network, save_network, NetworkFileError};
pub use planar::{circle_through, orient2d, CircleFit, GeometryError, Point2};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GraphError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("edge {0} has coincident endpoints")]
    DegenerateEdge(EdgeId),
    #[error("default speed limit must be positive, got {0}")]
    InvalidDefault(f64),
    #[error("edge {0} lacks derived attributes")]
    NotEnhanced(EdgeId),
    #[error("coordinate out of range: lat {lat}, lon {lon}")]
    InvalidCoordinate { lat: f64, lon: f64 },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("self loop at node {0}")]
    SelfLoop(NodeId),
}
