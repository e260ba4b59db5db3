//! Second-order autoregressive exploration noise with a decaying rate.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub coef1: f64,
    pub coef2: f64,
    /// Standard deviation of the innovation term.
    pub sigma: f64,
    pub epsilon0: f64,
    pub decay: f64,
    pub decay_start: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            coef1: 0.29,
            coef2: 0.7,
            sigma: 0.05f64.sqrt(),
            epsilon0: 0.99995,
            decay: 0.99995,
            decay_start: 40_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExplorationState<T> {
    pub config: NoiseConfig,
    prev1: T,
    prev2: T,
    epsilon: T,
    normal: Normal<f64>,
}

impl<T: Scalar> ExplorationState<T> {
    pub fn new(config: NoiseConfig) -> Self {
        let normal = Normal::new(0.0, config.sigma.max(0.0)).expect("finite sigma");
        ExplorationState { config, prev1: T::zero(), prev2: T::zero(), epsilon: T::lit(config.epsilon0), normal }
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// The last two raw noise values, newest first.
    pub fn history(&self) -> (T, T) {
        (self.prev1, self.prev2)
    }

    pub fn set_history(&mut self, prev1: T, prev2: T) {
        self.prev1 = prev1;
        self.prev2 = prev2;
    }

    /// Advances the process with a given innovation and returns the scaled
    /// noise for `step`.
    pub fn next_with_draw(&mut self, step: u64, draw: T) -> T {
        let n = T::lit(self.config.coef1) * self.prev1 + T::lit(self.config.coef2) * self.prev2 + draw;
        self.prev2 = self.prev1;
        self.prev1 = n;
        if step >= self.config.decay_start {
            self.epsilon *= T::lit(self.config.decay);
        }
        self.epsilon * n
    }

    pub fn next<R: Rng + ?Sized>(&mut self, step: u64, rng: &mut R) -> T {
        let draw = T::lit(self.normal.sample(rng));
        self.next_with_draw(step, draw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_draws_stay_zero() {
        let mut e = ExplorationState::<f64>::new(NoiseConfig::default());
        for step in 0..100 {
            assert_eq!(e.next_with_draw(step, 0.0), 0.0);
        }
    }

    #[test]
    fn recursion_by_hand() {
        let mut e = ExplorationState::<f64>::new(NoiseConfig::default());
        e.set_history(1.0, 0.0);
        e.next_with_draw(0, 0.0);
        assert!((e.history().0 - 0.29).abs() < 1e-15);
        e.next_with_draw(1, 0.0);
        assert!((e.history().0 - 0.7841).abs() < 1e-15);
    }

    #[test]
    fn epsilon_holds_then_decays() {
        let mut e = ExplorationState::<f64>::new(NoiseConfig::default());
        e.next_with_draw(39_999, 0.0);
        assert_eq!(e.epsilon(), 0.99995);
        e.next_with_draw(40_000, 0.0);
        assert_eq!(e.epsilon(), 0.99995 * 0.99995);
    }
}
