use std::collections::VecDeque;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::SimConfig;
use super::placement::{place_vehicles, route_from};
use super::snapshot::{SimSnapshot, VehicleSnapshot};
use super::stats::StatRings;
use super::SimError;
use crate::dynamics::{
    read_sensors, step_motion, velocity, Action, MotionState, Route, SensorReading, VehicleProps, VehicleView,
};
use crate::geo::{NodeId, RoadGraph};
use crate::learner::{reward_speed_limit, DdpgAgent, ExplorationState, UpdateStats};
use crate::scalar::Scalar;

/// Requests applied between ticks, in arrival order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Command {
    SetFlags { training: Option<bool>, exploration: Option<bool> },
    Select(Option<usize>),
    Pause,
    Resume,
}

#[derive(Clone, Debug)]
pub struct Vehicle<T: Scalar> {
    pub id: usize,
    pub props: VehicleProps<f64>,
    pub route: Route,
    pub motion: MotionState<f64>,
    /// Velocity before the latest step.
    pub prev_v: f64,
    pub reading: SensorReading<f64>,
    pub last_action: f64,
    pub last_reward: f64,
    pub goals_reached: u64,
    pub stats: StatRings,
    noise: ExplorationState<T>,
}

impl<T: Scalar> Vehicle<T> {
    pub fn velocity(&self, dt: f64) -> f64 {
        self.motion.delta() / dt
    }

    pub fn noise(&self) -> &ExplorationState<T> {
        &self.noise
    }

    fn view(&self) -> VehicleView<'_, f64> {
        VehicleView { route: &self.route, motion: self.motion, prev_v: self.prev_v, length: self.props.length }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TickReport<T> {
    pub tick: u64,
    pub update: Option<UpdateStats<T>>,
}

/// The whole simulation state: road network, vehicles and the shared agent.
pub struct World<T: Scalar> {
    graph: Arc<RoadGraph>,
    config: SimConfig,
    vehicles: Vec<Vehicle<T>>,
    agent: DdpgAgent<T>,
    route_rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
    tick: u64,
    commands: VecDeque<Command>,
    last_update: Option<UpdateStats<T>>,
    selected: Option<usize>,
    paused: bool,
}

fn stream(seed: u64, s: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s);
    rng
}

impl<T: Scalar> World<T> {
    /// Fresh agent and vehicles, all derived from `config.seed`.
    pub fn new(graph: Arc<RoadGraph>, config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let agent = DdpgAgent::new(config.state_dim(), config.ddpg.clone(), config.seed)?;
        Self::with_agent(graph, config, agent)
    }

    pub fn with_agent(graph: Arc<RoadGraph>, config: SimConfig, agent: DdpgAgent<T>) -> Result<Self, SimError> {
        config.validate()?;
        if agent.state_dim() != config.state_dim() {
            return Err(SimError::StateSize { agent: agent.state_dim(), config: config.state_dim() });
        }
        let mut route_rng = stream(config.seed, 1);
        let placed = place_vehicles(&graph, &config.vehicles, config.path_mode, &mut route_rng)?;
        let vehicles = placed
            .into_iter()
            .enumerate()
            .map(|(id, p)| Vehicle {
                id,
                props: p.props,
                route: p.route,
                motion: MotionState::at_rest(0.0),
                prev_v: 0.0,
                reading: SensorReading::default(),
                last_action: 0.0,
                last_reward: 0.0,
                goals_reached: 0,
                stats: StatRings::default(),
                noise: agent.new_exploration(),
            })
            .collect();
        let mut world = World {
            graph,
            vehicles,
            agent,
            route_rng,
            noise_rng: stream(config.seed, 2),
            config,
            tick: 0,
            commands: VecDeque::new(),
            last_update: None,
            selected: None,
            paused: false,
        };
        let readings = world.read_all();
        for (v, r) in world.vehicles.iter_mut().zip(readings) {
            v.reading = r;
        }
        Ok(world)
    }

    pub fn graph(&self) -> &Arc<RoadGraph> {
        &self.graph
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn vehicles(&self) -> &[Vehicle<T>] {
        &self.vehicles
    }

    pub fn agent(&self) -> &DdpgAgent<T> {
        &self.agent
    }

    pub fn agent_mut(&mut self) -> &mut DdpgAgent<T> {
        &mut self.agent
    }

    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    pub fn last_update(&self) -> Option<UpdateStats<T>> {
        self.last_update
    }

    pub fn selected(&self) -> Option<usize> {
        self.selected
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn enqueue(&mut self, cmd: Command) {
        self.commands.push_back(cmd);
    }

    /// Applies queued commands. Called at the start of every tick.
    pub fn drain_commands(&mut self) {
        while let Some(cmd) = self.commands.pop_front() {
            self.apply(cmd);
        }
    }

    fn apply(&mut self, cmd: Command) {
        match cmd {
            Command::SetFlags { training, exploration } => {
                if let Some(t) = training {
                    self.agent.training = t;
                }
                if let Some(e) = exploration {
                    self.agent.exploration = e;
                }
            }
            Command::Select(id) => self.selected = id.filter(|&i| i < self.vehicles.len()),
            Command::Pause => self.paused = true,
            Command::Resume => self.paused = false,
        }
    }

    /// Agent input built from a sensor reading.
    pub fn state_vector(&self, r: &SensorReading<f64>) -> Vec<T> {
        let all = r.to_array();
        let scale = self.config.state_scale;
        self.config.features.iter().map(|f| T::lit(all[f.index()] / scale)).collect()
    }

    fn read_all(&self) -> Vec<SensorReading<f64>> {
        let views: Vec<VehicleView<'_, f64>> = self.vehicles.iter().map(Vehicle::view).collect();
        (0..views.len()).map(|i| read_sensors(&views, i, &self.config.physics, self.config.horizon)).collect()
    }

    /// Sense, act, move, reward and learn once for every vehicle.
    pub fn tick(&mut self) -> Result<TickReport<T>, SimError> {
        self.drain_commands();
        let step = self.tick;
        let k = self.config.physics;

        let states: Vec<Vec<T>> = self.vehicles.iter().map(|v| self.state_vector(&v.reading)).collect();
        let mut actions = Vec::with_capacity(self.vehicles.len());
        for (v, s) in self.vehicles.iter_mut().zip(&states) {
            actions.push(self.agent.select_action(s, &mut v.noise, step, &mut self.noise_rng)?);
        }

        for (i, a) in actions.iter().enumerate() {
            let a64 = Action::new(a.value().to_f64_lossy());
            let v = &mut self.vehicles[i];
            let next =
                step_motion(v.motion, a64, &v.props, &k).map_err(|e| SimError::Numeric { vehicle: i, source: e })?;
            v.prev_v = velocity(&v.motion, &k);
            v.motion = next;
            v.last_action = a64.value();
            if v.motion.p >= v.route.length() {
                self.next_route(i)?;
            }
        }

        let readings = self.read_all();
        for (i, r) in readings.into_iter().enumerate() {
            let reward = reward_speed_limit(r.v, r.v_limit);
            let next_state = self.state_vector(&r);
            self.agent.remember(&states[i], actions[i], T::lit(reward), &next_state);
            let v = &mut self.vehicles[i];
            v.stats.push(v.last_action, r.v, r.a_long, r.a_lat, reward);
            v.last_reward = reward;
            v.reading = r;
        }

        let update = if self.agent.training && self.agent.is_warm() { Some(self.agent.ddpg_update()?) } else { None };
        if update.is_some() {
            self.last_update = update;
        }
        self.tick += 1;
        Ok(TickReport { tick: self.tick, update })
    }

    /// Hands a vehicle that passed its goal a new route from there, keeping
    /// its speed and the distance it overshot.
    fn next_route(&mut self, i: usize) -> Result<(), SimError> {
        let n = self.graph.node_count();
        let v = &self.vehicles[i];
        let (goal, len) = (v.route.goal(), v.route.length());
        let route = match route_from(&self.graph, goal, self.config.path_mode, 10 * n, &mut self.route_rng)? {
            Some(r) => Some((r, self.vehicles[i].motion.shifted(-len))),
            None => self.respawn(i)?,
        };
        let (route, motion) = route.ok_or(SimError::PlacementFailed { vehicle: i })?;
        let v = &mut self.vehicles[i];
        v.route = route;
        v.motion = motion;
        v.goals_reached += 1;
        Ok(())
    }

    /// Dead end: start over at rest from a random node.
    fn respawn(&mut self, i: usize) -> Result<Option<(Route, MotionState<f64>)>, SimError> {
        use rand::Rng;
        let n = self.graph.node_count();
        for _ in 0..10 * n {
            let start = NodeId(self.route_rng.gen_range(0..n) as u32);
            if let Some(r) = route_from(&self.graph, start, self.config.path_mode, 1, &mut self.route_rng)? {
                self.vehicles[i].prev_v = 0.0;
                return Ok(Some((r, MotionState::at_rest(0.0))));
            }
        }
        Ok(None)
    }

    /// Immutable view for observers.
    pub fn snapshot(&self) -> SimSnapshot {
        let dt = self.config.physics.dt;
        let vehicles = self
            .vehicles
            .iter()
            .map(|v| {
                let (pos, heading) = v.route.locate(&self.graph, v.motion.p);
                VehicleSnapshot {
                    id: v.id,
                    lat: pos.lat(),
                    lon: pos.lon(),
                    heading_deg: heading,
                    color_frac: v.stats.color_fraction().unwrap_or(0.5),
                    v: v.velocity(dt),
                    v_limit: v.reading.v_limit,
                    action: v.last_action,
                    reward: v.last_reward,
                }
            })
            .collect();
        SimSnapshot {
            tick: self.tick,
            vehicles,
            training: self.agent.training,
            exploration: self.agent.exploration,
            paused: self.paused,
            selected: self.selected,
            stats: self.selected.map(|i| self.vehicles[i].stats.series()),
            critic_loss: self.last_update.map(|u| u.critic_loss.to_f64_lossy()),
        }
    }

    /// Replaces the agent's networks, keeping vehicles and counters.
    pub fn replace_agent(&mut self, agent: DdpgAgent<T>) -> Result<(), SimError> {
        if agent.state_dim() != self.config.state_dim() {
            return Err(SimError::StateSize { agent: agent.state_dim(), config: self.config.state_dim() });
        }
        self.agent = agent;
        Ok(())
    }
}
