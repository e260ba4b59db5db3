use serde::Serialize;

use super::stats::StatSeries;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VehicleSnapshot {
    pub id: usize,
    pub lat: f64,
    pub lon: f64,
    pub heading_deg: f64,
    pub color_frac: f64,
    pub v: f64,
    pub v_limit: f64,
    pub action: f64,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimSnapshot {
    pub tick: u64,
    pub vehicles: Vec<VehicleSnapshot>,
    pub training: bool,
    pub exploration: bool,
    pub paused: bool,
    pub selected: Option<usize>,
    /// History of the selected vehicle, oldest first.
    pub stats: Option<StatSeries>,
    pub critic_loss: Option<f64>,
}
