//! Model files.
//!
//! A `.acnet` file is the magic `ACN1`, a little-endian `u32` header length,
//! a JSON header and then the raw little-endian parameters of the live
//! network followed by those of its target network. Every save writes four
//! files named `<layers>_<date>_<time>_<steps>_{actor,critic}.{acnet,txt}`,
//! where `<layers>` is the actor's layer configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use chrono::NaiveDateTime;

use super::{Activation, DdpgAgent, DdpgConfig, LearnerError, Mlp};
use crate::scalar::Scalar;

pub const MODEL_MAGIC: &[u8; 4] = b"ACN1";
const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkRole {
    Actor,
    Critic,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelHeader {
    pub version: u32,
    pub role: NetworkRole,
    pub layers: Vec<usize>,
    pub activations: Vec<Activation>,
    pub steps: u64,
    pub date: String,
    pub time: String,
    pub dtype: String,
    pub has_target: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFiles {
    pub actor: PathBuf,
    pub critic: PathBuf,
    pub actor_txt: PathBuf,
    pub critic_txt: PathBuf,
}

impl ModelFiles {
    pub fn all(&self) -> [&Path; 4] {
        [&self.actor, &self.critic, &self.actor_txt, &self.critic_txt]
    }
}

/// Current local wall-clock time, as used in model file names.
pub fn local_now() -> NaiveDateTime {
    chrono::Local::now().naive_local()
}

/// `<layers>_<date>_<time>_<steps>`.
pub fn model_prefix(layer_config: &str, at: NaiveDateTime, steps: u64) -> String {
    format!("{layer_config}_{}_{}_{steps}", at.format("%Y%m%d"), at.format("%H%M%S"))
}

pub fn save_model<T: Scalar>(
    agent: &DdpgAgent<T>,
    dir: &Path,
    steps: u64,
    at: NaiveDateTime,
) -> Result<ModelFiles, LearnerError> {
    fs::create_dir_all(dir)?;
    let prefix = model_prefix(&agent.actor().layer_config(), at, steps);
    let files = ModelFiles {
        actor: dir.join(format!("{prefix}_actor.acnet")),
        critic: dir.join(format!("{prefix}_critic.acnet")),
        actor_txt: dir.join(format!("{prefix}_actor.txt")),
        critic_txt: dir.join(format!("{prefix}_critic.txt")),
    };
    let header = |role, net: &Mlp<T>| ModelHeader {
        version: MODEL_VERSION,
        role,
        layers: net.sizes().to_vec(),
        activations: net.activations().to_vec(),
        steps,
        date: at.format("%Y%m%d").to_string(),
        time: at.format("%H%M%S").to_string(),
        dtype: T::DTYPE.to_string(),
        has_target: true,
    };
    let ha = header(NetworkRole::Actor, agent.actor());
    let hc = header(NetworkRole::Critic, agent.critic());
    fs::write(&files.actor, encode(&ha, agent.actor(), Some(agent.actor_target()))?)?;
    fs::write(&files.critic, encode(&hc, agent.critic(), Some(agent.critic_target()))?)?;
    fs::write(&files.actor_txt, describe(&ha, agent.actor(), agent.config()))?;
    fs::write(&files.critic_txt, describe(&hc, agent.critic(), agent.config()))?;
    Ok(files)
}

fn encode<T: Scalar>(header: &ModelHeader, live: &Mlp<T>, target: Option<&Mlp<T>>) -> Result<Vec<u8>, LearnerError> {
    let json = serde_json::to_vec(header).map_err(|e| LearnerError::Malformed(e.to_string()))?;
    let n = live.params().len() * if target.is_some() { 2 } else { 1 };
    let mut out = Vec::with_capacity(8 + json.len() + n * T::BYTES);
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for net in std::iter::once(live).chain(target) {
        for &p in net.params() {
            p.write_le(&mut out);
        }
    }
    Ok(out)
}

fn describe<T: Scalar>(h: &ModelHeader, net: &Mlp<T>, cfg: &DdpgConfig) -> String {
    let mut s = String::new();
    let acts: Vec<&str> = h
        .activations
        .iter()
        .map(|a| match a {
            Activation::LeakyRelu => "leaky_relu",
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
        })
        .collect();
    let _ = writeln!(s, "role = {:?}", h.role);
    let _ = writeln!(s, "layers = {}", net.layer_config());
    let _ = writeln!(s, "activations = {}", acts.join(","));
    let _ = writeln!(s, "leaky_slope = {}", super::LEAKY_SLOPE);
    let _ = writeln!(s, "parameters = {}", net.params().len());
    let _ = writeln!(s, "dtype = {}", h.dtype);
    let _ = writeln!(s, "steps = {}", h.steps);
    let _ = writeln!(s, "date = {}", h.date);
    let _ = writeln!(s, "time = {}", h.time);
    let lr = match h.role {
        NetworkRole::Actor => cfg.actor_lr,
        NetworkRole::Critic => cfg.critic_lr,
    };
    let _ = writeln!(s, "learning_rate = {lr}");
    let _ = writeln!(s, "tau = {}", cfg.tau);
    let _ = writeln!(s, "gamma = {}", cfg.gamma);
    let _ = writeln!(s, "batch_size = {}", cfg.batch_size);
    s
}

fn read_params<T: Scalar>(bytes: &[u8], dtype: &str, n: usize) -> Result<Vec<T>, LearnerError> {
    let width = match dtype {
        "f32" => 4,
        "f64" => 8,
        other => return Err(LearnerError::Malformed(format!("unknown dtype {other}"))),
    };
    if bytes.len() < n * width {
        return Err(LearnerError::Malformed("parameter blob is truncated".into()));
    }
    Ok(bytes[..n * width]
        .chunks_exact(width)
        .map(|c| if width == 4 { T::lit(f32::read_le(c) as f64) } else { T::lit(f64::read_le(c)) })
        .collect())
}

/// Header, live network and target network if stored.
pub type LoadedNetwork<T> = (ModelHeader, Mlp<T>, Option<Mlp<T>>);

/// Reads one `.acnet` file.
pub fn load_network_file<T: Scalar>(path: &Path) -> Result<LoadedNetwork<T>, LearnerError> {
    decode(&fs::read(path)?)
}

fn decode<T: Scalar>(bytes: &[u8]) -> Result<LoadedNetwork<T>, LearnerError> {
    if bytes.len() < 8 || &bytes[..4] != MODEL_MAGIC {
        return Err(LearnerError::BadMagic);
    }
    let len = u32::from_le_bytes(bytes[4..8].try_into().expect("four bytes")) as usize;
    let json = bytes.get(8..8 + len).ok_or_else(|| LearnerError::Malformed("header is truncated".into()))?;
    let header: ModelHeader = serde_json::from_slice(json).map_err(|e| LearnerError::Malformed(e.to_string()))?;
    if header.version != MODEL_VERSION {
        return Err(LearnerError::VersionMismatch(header.version));
    }
    let n = super::param_count(&header.layers);
    let width = if header.dtype == "f32" { 4 } else { 8 };
    let blob = &bytes[8 + len..];
    let expected = n * width * if header.has_target { 2 } else { 1 };
    if blob.len() != expected {
        return Err(LearnerError::Malformed(format!("expected {expected} parameter bytes, found {}", blob.len())));
    }
    let live = Mlp::from_params(&header.layers, &header.activations, read_params(blob, &header.dtype, n)?)?;
    let target = if header.has_target {
        Some(Mlp::from_params(&header.layers, &header.activations, read_params(&blob[n * width..], &header.dtype, n)?)?)
    } else {
        None
    };
    Ok((header, live, target))
}

/// Rebuilds an agent from an actor and a critic file. Hidden layer sizes are
/// taken from the files; the other hyperparameters from `config`.
pub fn load_model<T: Scalar>(
    actor: &Path,
    critic: &Path,
    config: &DdpgConfig,
    seed: u64,
) -> Result<DdpgAgent<T>, LearnerError> {
    let (ha, a, at) = load_network_file::<T>(actor)?;
    let (hc, c, ct) = load_network_file::<T>(critic)?;
    if ha.role != NetworkRole::Actor {
        return Err(LearnerError::ShapeMismatch(format!("{} is not an actor file", actor.display())));
    }
    if hc.role != NetworkRole::Critic || c.input_size() != a.input_size() + 1 {
        return Err(LearnerError::ShapeMismatch(format!(
            "critic {} does not fit actor {}",
            c.layer_config(),
            a.layer_config()
        )));
    }
    let cfg = DdpgConfig { hidden: a.sizes()[1..a.sizes().len() - 1].to_vec(), ..config.clone() };
    let at = at.unwrap_or_else(|| a.clone());
    let ct = ct.unwrap_or_else(|| c.clone());
    DdpgAgent::with_networks(cfg, a, c, at, ct, seed)
}
