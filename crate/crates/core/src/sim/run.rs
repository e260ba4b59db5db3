//! Headless drivers: training with metrics and checkpoints, and evaluation
//! with a per-tick trace.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::SimConfig;
use super::world::World;
use super::SimError;
use crate::learner::{save_model, ModelFiles};
use crate::scalar::Scalar;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: SimConfig,
    pub seed: u64,
    pub dtype: String,
    pub network_file: String,
    pub network_sha256: String,
    pub start_time: String,
    pub steps: u64,
    pub completed_steps: Option<u64>,
    pub out_dir: String,
}

#[derive(Clone, Debug, Default)]
pub struct TrainOptions {
    pub steps: u64,
    pub out_dir: PathBuf,
    /// Stop as soon as the fleet's windowed average reward reaches this.
    pub stop_at: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRow {
    pub step: u64,
    pub avg_reward: f64,
    pub epsilon: f64,
    pub critic_loss: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub steps: u64,
    pub final_avg_reward: Option<f64>,
    /// First logged step at which `stop_at` was reached.
    pub reached_at: Option<u64>,
    pub checkpoints: Vec<ModelFiles>,
    pub manifest: PathBuf,
    pub metrics: PathBuf,
}

/// Mean over vehicles of their windowed average reward.
pub fn fleet_average<T: Scalar>(world: &World<T>) -> Option<f64> {
    let avgs: Vec<f64> = world.vehicles().iter().filter_map(|v| v.stats.average_reward().ok()).collect();
    (!avgs.is_empty()).then(|| avgs.iter().sum::<f64>() / avgs.len() as f64)
}

fn write_manifest(path: &Path, m: &RunManifest) -> Result<(), SimError> {
    fs::write(path, serde_json::to_string_pretty(m).expect("manifest serializes"))?;
    Ok(())
}

pub fn new_manifest<T: Scalar>(
    command: &str,
    world: &World<T>,
    network_file: &str,
    network_bytes: &[u8],
    steps: u64,
    out_dir: &Path,
) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        config: world.config().clone(),
        seed: world.config().seed,
        dtype: T::DTYPE.to_string(),
        network_file: network_file.to_string(),
        network_sha256: sha256_hex(network_bytes),
        start_time: chrono::Local::now().to_rfc3339(),
        steps,
        completed_steps: None,
        out_dir: out_dir.display().to_string(),
    }
}

/// Trains for `opts.steps` ticks. Writes `manifest.json` up front,
/// `metrics.csv` every `log_interval` ticks and a model checkpoint every
/// `checkpoint_interval` ticks and at the end.
pub fn train<T: Scalar>(
    world: &mut World<T>,
    mut manifest: RunManifest,
    opts: &TrainOptions,
    mut on_log: impl FnMut(&MetricsRow),
) -> Result<TrainSummary, SimError> {
    fs::create_dir_all(&opts.out_dir)?;
    let manifest_path = opts.out_dir.join("manifest.json");
    write_manifest(&manifest_path, &manifest)?;
    let metrics_path = opts.out_dir.join("metrics.csv");
    let mut metrics = BufWriter::new(File::create(&metrics_path)?);
    writeln!(metrics, "step,avg_reward,epsilon,critic_loss")?;

    let cfg = world.config().clone();
    let ckpt_dir = opts.out_dir.join("checkpoints");
    let mut checkpoints = Vec::new();
    let mut reached_at = None;
    let mut done = 0;
    let start = world.tick_count();
    for _ in 0..opts.steps {
        let report = world.tick()?;
        done = report.tick - start;
        if done % cfg.log_interval == 0 {
            let row = MetricsRow {
                step: done,
                avg_reward: fleet_average(world).unwrap_or(f64::NAN),
                epsilon: world.vehicles().first().map_or(f64::NAN, |v| v.noise().epsilon().to_f64_lossy()),
                critic_loss: world.last_update().map(|u| u.critic_loss.to_f64_lossy()),
            };
            let loss = row.critic_loss.map(|l| l.to_string()).unwrap_or_default();
            writeln!(metrics, "{},{},{},{}", row.step, row.avg_reward, row.epsilon, loss)?;
            on_log(&row);
            if let Some(goal) = opts.stop_at {
                // Only a full window counts.
                let full = world.vehicles().iter().all(|v| v.stats.len() == super::STATS_WINDOW);
                if full && row.avg_reward >= goal && reached_at.is_none() {
                    reached_at = Some(done);
                }
            }
        }
        if done % cfg.checkpoint_interval == 0 {
            checkpoints.push(save_model(world.agent(), &ckpt_dir, done, crate::learner::local_now())?);
        }
        if reached_at.is_some() {
            break;
        }
    }
    metrics.flush()?;
    if done > 0 && done % cfg.checkpoint_interval != 0 {
        checkpoints.push(save_model(world.agent(), &ckpt_dir, done, crate::learner::local_now())?);
    }
    manifest.completed_steps = Some(done);
    write_manifest(&manifest_path, &manifest)?;
    Ok(TrainSummary {
        steps: done,
        final_avg_reward: fleet_average(world),
        reached_at,
        checkpoints,
        manifest: manifest_path,
        metrics: metrics_path,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub tick: u64,
    pub vehicle: usize,
    pub action: f64,
    pub v: f64,
    pub v_limit: f64,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSummary {
    pub steps: u64,
    pub mean_reward: f64,
    pub trace: PathBuf,
}

/// Runs with training and exploration switched off and records every
/// vehicle's action, speed, limit and reward per tick to `trace.csv`.
pub fn evaluate<T: Scalar>(world: &mut World<T>, steps: u64, out_dir: &Path) -> Result<EvalSummary, SimError> {
    fs::create_dir_all(out_dir)?;
    world.agent_mut().training = false;
    world.agent_mut().exploration = false;
    let trace_path = out_dir.join("trace.csv");
    let mut trace = BufWriter::new(File::create(&trace_path)?);
    writeln!(trace, "tick,vehicle,action,v,v_limit,reward")?;
    let (mut sum, mut n) = (0.0, 0u64);
    for _ in 0..steps {
        let report = world.tick()?;
        for v in world.vehicles() {
            writeln!(
                trace,
                "{},{},{},{},{},{}",
                report.tick, v.id, v.last_action, v.reading.v, v.reading.v_limit, v.last_reward
            )?;
            sum += v.last_reward;
            n += 1;
        }
    }
    trace.flush()?;
    Ok(EvalSummary { steps, mean_reward: if n > 0 { sum / n as f64 } else { f64::NAN }, trace: trace_path })
}

/// Reads a trace written by [`evaluate`].
pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>, SimError> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || SimError::Config(format!("trace line {}: malformed", i + 1));
        if f.len() != 6 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        rows.push(TraceRow {
            tick: f[0].parse().map_err(|_| bad())?,
            vehicle: f[1].parse().map_err(|_| bad())?,
            action: num(f[2])?,
            v: num(f[3])?,
            v_limit: num(f[4])?,
            reward: num(f[5])?,
        });
    }
    Ok(rows)
}
