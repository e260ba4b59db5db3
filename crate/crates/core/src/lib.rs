//! Headless driving simulator with a DDPG speed controller.
//!
//! Road networks come from a Delaunay generator or from OpenStreetMap XML,
//! vehicles follow Dijkstra routes under a longitudinal physics model, and
//! one shared actor-critic agent learns throttle and brake commands from
//! every vehicle's experience.

pub mod dynamics;
pub mod geo;
pub mod learner;
pub mod netgen;
pub mod osm;
pub mod routing;
pub mod scalar;
pub mod sim;

/// Scalar used by the networks in the shipped tools. Physics and geometry
/// always run in `f64`.
pub type Real = f32;

pub type Network = geo::RoadGraph;
pub type PlanarPoint = geo::Point2<f64>;
pub type Motion = dynamics::MotionState<f64>;
pub type Props = dynamics::VehicleProps<f64>;
pub type Sensors = dynamics::SensorReading<f64>;
pub type Net = learner::Mlp<Real>;
pub type Agent = learner::DdpgAgent<Real>;
pub type Simulation = sim::World<Real>;
