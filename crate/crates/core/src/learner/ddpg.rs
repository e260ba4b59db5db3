use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adam::Adam;
use super::explore::{ExplorationState, NoiseConfig};
use super::mlp::{soft_update, Activation, Mlp};
use super::replay::{Batch, ReplayBuffer};
use super::LearnerError;
use crate::dynamics::Action;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdpgConfig {
    pub hidden: Vec<usize>,
    /// Standard deviation of the initial weights.
    pub init_std: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Soft-update rate of the target networks.
    pub tau: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub warmup: usize,
    pub gamma: f64,
    pub noise: NoiseConfig,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        DdpgConfig {
            hidden: vec![400, 300, 200],
            init_std: 0.05,
            actor_lr: 5e-5,
            critic_lr: 1e-3,
            tau: 0.01,
            batch_size: 32,
            buffer_capacity: 10_000,
            warmup: 10_000,
            gamma: 0.99,
            noise: NoiseConfig::default(),
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |what: &str| Err(LearnerError::Config(what.to_string()));
        if self.hidden.contains(&0) {
            return bad("hidden layer sizes must be positive");
        }
        if !(self.init_std >= 0.0 && self.init_std.is_finite()) {
            return bad("init_std must be a finite non-negative number");
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return bad("buffer must hold at least one batch");
        }
        if !(self.noise.sigma >= 0.0 && self.noise.sigma.is_finite()) {
            return bad("noise sigma must be a finite non-negative number");
        }
        Ok(())
    }

    pub fn actor_shape(&self, state_dim: usize) -> (Vec<usize>, Vec<Activation>) {
        shape(state_dim, &self.hidden, Activation::Tanh)
    }

    pub fn critic_shape(&self, state_dim: usize) -> (Vec<usize>, Vec<Activation>) {
        shape(state_dim + 1, &self.hidden, Activation::Linear)
    }
}

fn shape(inputs: usize, hidden: &[usize], out: Activation) -> (Vec<usize>, Vec<Activation>) {
    let mut sizes = vec![inputs];
    sizes.extend_from_slice(hidden);
    sizes.push(1);
    let mut acts = vec![Activation::LeakyRelu; hidden.len()];
    acts.push(out);
    (sizes, acts)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateStats<T> {
    pub critic_loss: T,
    /// Mean critic value of the actor's actions on the batch.
    pub actor_objective: T,
}

/// Deterministic policy gradient agent with target networks and replay.
#[derive(Clone, Debug)]
pub struct DdpgAgent<T> {
    config: DdpgConfig,
    state_dim: usize,
    actor: Mlp<T>,
    critic: Mlp<T>,
    actor_target: Mlp<T>,
    critic_target: Mlp<T>,
    actor_opt: Adam<T>,
    critic_opt: Adam<T>,
    replay: ReplayBuffer<T>,
    rng: ChaCha8Rng,
    updates: u64,
    pub training: bool,
    pub exploration: bool,
}

impl<T: Scalar> DdpgAgent<T> {
    pub fn new(state_dim: usize, config: DdpgConfig, seed: u64) -> Result<Self, LearnerError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (sizes, acts) = config.actor_shape(state_dim);
        let actor = Mlp::random(&sizes, &acts, config.init_std, &mut rng)?;
        let (sizes, acts) = config.critic_shape(state_dim);
        let critic = Mlp::random(&sizes, &acts, config.init_std, &mut rng)?;
        Self::from_networks(config, actor.clone(), critic.clone(), actor, critic, rng)
    }

    /// Assembles an agent around existing networks with fresh optimizer
    /// state and an empty replay buffer.
    pub fn with_networks(
        config: DdpgConfig,
        actor: Mlp<T>,
        critic: Mlp<T>,
        actor_target: Mlp<T>,
        critic_target: Mlp<T>,
        seed: u64,
    ) -> Result<Self, LearnerError> {
        config.validate()?;
        Self::from_networks(config, actor, critic, actor_target, critic_target, ChaCha8Rng::seed_from_u64(seed))
    }

    fn from_networks(
        config: DdpgConfig,
        actor: Mlp<T>,
        critic: Mlp<T>,
        actor_target: Mlp<T>,
        critic_target: Mlp<T>,
        rng: ChaCha8Rng,
    ) -> Result<Self, LearnerError> {
        let state_dim = actor.input_size();
        let (a_sizes, a_acts) = config.actor_shape(state_dim);
        let (c_sizes, c_acts) = config.critic_shape(state_dim);
        if actor.sizes() != a_sizes || actor.activations() != a_acts {
            return Err(LearnerError::ShapeMismatch(format!("actor {} does not fit the config", actor.layer_config())));
        }
        if critic.sizes() != c_sizes || critic.activations() != c_acts {
            return Err(LearnerError::ShapeMismatch(format!(
                "critic {} does not fit actor {}",
                critic.layer_config(),
                actor.layer_config()
            )));
        }
        if !actor_target.same_shape(&actor) || !critic_target.same_shape(&critic) {
            return Err(LearnerError::ShapeMismatch("target networks differ from live networks".into()));
        }
        Ok(DdpgAgent {
            actor_opt: Adam::new(actor.params().len(), T::lit(config.actor_lr)),
            critic_opt: Adam::new(critic.params().len(), T::lit(config.critic_lr)),
            replay: ReplayBuffer::new(config.buffer_capacity, state_dim),
            config,
            state_dim,
            actor,
            critic,
            actor_target,
            critic_target,
            rng,
            updates: 0,
            training: true,
            exploration: true,
        })
    }

    pub fn config(&self) -> &DdpgConfig {
        &self.config
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn actor(&self) -> &Mlp<T> {
        &self.actor
    }

    pub fn critic(&self) -> &Mlp<T> {
        &self.critic
    }

    pub fn actor_target(&self) -> &Mlp<T> {
        &self.actor_target
    }

    pub fn critic_target(&self) -> &Mlp<T> {
        &self.critic_target
    }

    pub fn critic_mut(&mut self) -> &mut Mlp<T> {
        &mut self.critic
    }

    pub fn actor_mut(&mut self) -> &mut Mlp<T> {
        &mut self.actor
    }

    pub fn replay(&self) -> &ReplayBuffer<T> {
        &self.replay
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn new_exploration(&self) -> ExplorationState<T> {
        ExplorationState::new(self.config.noise)
    }

    /// True once the buffer holds the warm-up amount of experience.
    pub fn is_warm(&self) -> bool {
        self.replay.len() >= self.config.warmup.max(self.config.batch_size)
    }

    /// Deterministic policy output.
    pub fn policy(&self, state: &[T]) -> Result<T, LearnerError> {
        Ok(self.actor.predict(state)?[0])
    }

    /// Action for one vehicle. While warming up with exploration enabled the
    /// action is noise alone.
    pub fn select_action<R: Rng + ?Sized>(
        &self,
        state: &[T],
        noise: &mut ExplorationState<T>,
        step: u64,
        rng: &mut R,
    ) -> Result<Action<T>, LearnerError> {
        if !self.exploration {
            return Ok(Action::new(self.policy(state)?));
        }
        let n = noise.next(step, rng);
        if !self.is_warm() {
            return Ok(Action::new(n));
        }
        Ok(Action::new(self.policy(state)? + n))
    }

    pub fn remember(&mut self, s: &[T], a: Action<T>, r: T, s_next: &[T]) {
        self.replay.push(s, a.value(), r, s_next);
    }

    /// One gradient step on a batch drawn from the replay buffer.
    pub fn ddpg_update(&mut self) -> Result<UpdateStats<T>, LearnerError> {
        if !self.is_warm() {
            return Err(LearnerError::NotWarm {
                have: self.replay.len(),
                need: self.config.warmup.max(self.config.batch_size),
            });
        }
        let batch = self.replay.sample(self.config.batch_size, &mut self.rng)?;
        self.update_on(&batch)
    }

    /// One gradient step on a given batch.
    pub fn update_on(&mut self, batch: &Batch<T>) -> Result<UpdateStats<T>, LearnerError> {
        let n = batch.len();
        let d = self.state_dim;
        let nt = T::lit(n as f64);

        let next_actions = self.actor_target.forward(&batch.next_states, n)?;
        let next_q = self.critic_target.forward(&join(&batch.next_states, next_actions.output(), d), n)?;
        let gamma = T::lit(self.config.gamma);
        let targets: Vec<T> = batch.rewards.iter().zip(next_q.output()).map(|(&r, &q)| r + gamma * q).collect();

        let cache = self.critic.forward(&join(&batch.states, &batch.actions, d), n)?;
        let err: Vec<T> = cache.output().iter().zip(&targets).map(|(&q, &y)| q - y).collect();
        let critic_loss = err.iter().map(|&e| e * e).sum::<T>() / nt;
        let dq: Vec<T> = err.iter().map(|&e| T::lit(2.0) * e / nt).collect();
        let grads = self.critic.backward(&cache, &dq)?;
        self.critic_opt.step(self.critic.params_mut(), &grads.params)?;

        let actor_cache = self.actor.forward(&batch.states, n)?;
        let q_cache = self.critic.forward(&join(&batch.states, actor_cache.output(), d), n)?;
        let actor_objective = q_cache.output().iter().copied().sum::<T>() / nt;
        // Ascend the mean critic value: descend its negative.
        let dx = self.critic.input_gradient(&q_cache, &vec![-T::one() / nt; n])?;
        let da: Vec<T> = dx.chunks_exact(d + 1).map(|row| row[d]).collect();
        let grads = self.actor.backward(&actor_cache, &da)?;
        self.actor_opt.step(self.actor.params_mut(), &grads.params)?;

        let tau = T::lit(self.config.tau);
        soft_update(&mut self.critic_target, &self.critic, tau)?;
        soft_update(&mut self.actor_target, &self.actor, tau)?;
        self.updates += 1;
        Ok(UpdateStats { critic_loss, actor_objective })
    }
}

/// Appends one action column to a batch of states.
fn join<T: Scalar>(states: &[T], actions: &[T], d: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(states.len() + actions.len());
    for (s, &a) in states.chunks_exact(d).zip(actions) {
        out.extend_from_slice(s);
        out.push(a);
    }
    out
}
