//! Actor-critic learner: networks, optimizer, replay, exploration, reward
//! and model files.

mod adam;
mod ddpg;
mod explore;
mod mlp;
mod persist;
mod replay;
mod reward;

use thiserror::Error;

pub use adam::Adam;
pub use ddpg::{DdpgAgent, DdpgConfig, UpdateStats};
pub use explore::{ExplorationState, NoiseConfig};
pub use mlp::{param_count, soft_update, Activation, ForwardCache, Gradients, Mlp, LEAKY_SLOPE};
pub use persist::{
    load_model, load_network_file, local_now, model_prefix, save_model, LoadedNetwork, ModelFiles, ModelHeader,
    NaiveDateTime, NetworkRole, MODEL_MAGIC,
};
pub use replay::{Batch, ReplayBuffer};
pub use reward::{reward_speed_limit, REWARD_WIDTH};

#[derive(Debug, Error, PartialEq)]
pub enum LearnerError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("forward cache does not match the current parameters")]
    StaleCache,
    #[error("non-finite gradient")]
    NumericFault,
    #[error("replay buffer holds {have} transitions, {need} needed")]
    NotWarm { have: usize, need: usize },
    #[error("invalid learner config: {0}")]
    Config(String),
    #[error("model shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model file version {0}")]
    VersionMismatch(u32),
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LearnerError {
    fn from(e: std::io::Error) -> Self {
        LearnerError::Io(e.to_string())
    }
}
