//! Per-vehicle history of the last few thousand ticks.

use std::collections::VecDeque;

use thiserror::Error;

pub const STATS_WINDOW: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("no rewards recorded yet")]
pub struct NoData;

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct StatSeries {
    pub actions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub a_long: Vec<f64>,
    pub a_lat: Vec<f64>,
    pub rewards: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct StatRings {
    cap: usize,
    actions: VecDeque<f64>,
    velocities: VecDeque<f64>,
    a_long: VecDeque<f64>,
    a_lat: VecDeque<f64>,
    rewards: VecDeque<f64>,
    reward_sum: f64,
    pushes: u64,
    min_ever: f64,
    max_ever: f64,
}

impl Default for StatRings {
    fn default() -> Self {
        Self::with_capacity(STATS_WINDOW)
    }
}

impl StatRings {
    pub fn with_capacity(cap: usize) -> Self {
        assert!(cap > 0);
        StatRings {
            cap,
            actions: VecDeque::with_capacity(cap),
            velocities: VecDeque::with_capacity(cap),
            a_long: VecDeque::with_capacity(cap),
            a_lat: VecDeque::with_capacity(cap),
            rewards: VecDeque::with_capacity(cap),
            reward_sum: 0.0,
            pushes: 0,
            min_ever: f64::INFINITY,
            max_ever: f64::NEG_INFINITY,
        }
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn push(&mut self, action: f64, v: f64, a_long: f64, a_lat: f64, reward: f64) {
        fn put(q: &mut VecDeque<f64>, cap: usize, x: f64) -> Option<f64> {
            let out = if q.len() == cap { q.pop_front() } else { None };
            q.push_back(x);
            out
        }
        put(&mut self.actions, self.cap, action);
        put(&mut self.velocities, self.cap, v);
        put(&mut self.a_long, self.cap, a_long);
        put(&mut self.a_lat, self.cap, a_lat);
        let dropped = put(&mut self.rewards, self.cap, reward);
        self.pushes += 1;
        // Refresh the running sum from scratch once per window so rounding
        // errors cannot pile up.
        if self.pushes.is_multiple_of(self.cap as u64) {
            self.reward_sum = self.rewards.iter().sum();
        } else {
            self.reward_sum += reward - dropped.unwrap_or(0.0);
        }
        let avg = self.reward_sum / self.rewards.len() as f64;
        self.min_ever = self.min_ever.min(avg);
        self.max_ever = self.max_ever.max(avg);
    }

    pub fn average_reward(&self) -> Result<f64, NoData> {
        if self.rewards.is_empty() {
            return Err(NoData);
        }
        Ok(self.reward_sum / self.rewards.len() as f64)
    }

    /// Smallest and largest windowed average seen so far.
    pub fn extremes(&self) -> Option<(f64, f64)> {
        (!self.rewards.is_empty()).then_some((self.min_ever, self.max_ever))
    }

    /// Position of the current average between the worst and best averages
    /// ever seen; 0.5 while they coincide.
    pub fn color_fraction(&self) -> Result<f64, NoData> {
        let avg = self.average_reward()?;
        let (lo, hi) = (self.min_ever, self.max_ever);
        if hi <= lo {
            return Ok(0.5);
        }
        Ok(((avg - lo) / (hi - lo)).clamp(0.0, 1.0))
    }

    pub fn series(&self) -> StatSeries {
        StatSeries {
            actions: self.actions.iter().copied().collect(),
            velocities: self.velocities.iter().copied().collect(),
            a_long: self.a_long.iter().copied().collect(),
            a_lat: self.a_lat.iter().copied().collect(),
            rewards: self.rewards.iter().copied().collect(),
        }
    }
}
