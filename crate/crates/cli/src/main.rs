use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use drivesim::geo::{load_network, save_network, EnhanceOptions, NodeId, DEFAULT_SPEED_LIMIT};
use drivesim::learner::load_model;
use drivesim::netgen::{self, NetGenSpec};
use drivesim::osm::{self, ImportOptions};
use drivesim::routing::{dijkstra, PathMode};
use drivesim::sim::{self, SimConfig, TrainOptions};
use drivesim::{Network, Real, Simulation};
use drivesim_server::{spawn_simulation, DriverOptions};

#[derive(Parser)]
#[command(name = "drivesim", version, about = "Road network tools and DDPG speed-control training")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Shortest,
    Fastest,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an artificial road network from a thinned Delaunay triangulation.
    GenNet {
        /// Map height in meters.
        #[arg(long)]
        height: f64,
        /// Map width in meters.
        #[arg(long)]
        width: f64,
        #[arg(long)]
        nodes: usize,
        /// Percentage of triangulation edges to keep, in (0, 100].
        #[arg(long)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SPEED_LIMIT)]
        default_vmax: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a straight two-way road made of equal segments.
    GenRoad {
        #[arg(long, default_value_t = 10)]
        segments: usize,
        #[arg(long, default_value_t = 250.0)]
        segment_length: f64,
        #[arg(long, default_value_t = DEFAULT_SPEED_LIMIT)]
        default_vmax: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Import an OpenStreetMap XML file.
    ImportOsm {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Speed limit for roads without a usable maxspeed tag, in m/s.
        #[arg(long, default_value_t = DEFAULT_SPEED_LIMIT)]
        default_vmax: f64,
        /// Comma separated highway types to keep instead of the built-in list.
        #[arg(long, value_delimiter = ',')]
        drivable: Option<Vec<String>>,
    },
    /// Print the shortest or fastest path between two nodes.
    Route {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
        #[arg(long, value_enum, default_value_t = Mode::Shortest)]
        mode: Mode,
    },
    /// Train headless, writing metrics, checkpoints and a manifest.
    Train {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        steps: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides the seed of the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Continue from saved networks instead of fresh ones.
        #[arg(long, requires = "critic")]
        actor: Option<PathBuf>,
        #[arg(long, requires = "actor")]
        critic: Option<PathBuf>,
        /// Stop early once the windowed average reward reaches this value.
        #[arg(long, allow_hyphen_values = true)]
        stop_at: Option<f64>,
    },
    /// Evaluate saved networks with training and exploration off.
    Eval {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        actor: PathBuf,
        #[arg(long)]
        critic: PathBuf,
        #[arg(long)]
        steps: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run a session behind the HTTP/WebSocket control server.
    Serve {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, requires = "critic")]
        actor: Option<PathBuf>,
        #[arg(long, requires = "actor")]
        critic: Option<PathBuf>,
        /// Where POST /api/save writes model files.
        #[arg(long, default_value = "models")]
        save_dir: PathBuf,
        /// Ticks per second, 0 for as fast as possible. Defaults to the config.
        #[arg(long)]
        tick_rate: Option<f64>,
    },
}

/// Bad input that should be reported as a usage error.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_config(path: Option<&Path>, seed: Option<u64>) -> Result<SimConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            SimConfig::parse(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => SimConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn read_network(path: &Path) -> Result<(Network, Vec<u8>)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let g = drivesim::geo::decode_network(&bytes).with_context(|| format!("loading {}", path.display()))?;
    Ok((g, bytes))
}

fn build_world(net: &Path, cfg: SimConfig, models: Option<(&Path, &Path)>) -> Result<(Simulation, Vec<u8>)> {
    let (g, bytes) = read_network(net)?;
    let g = sim::prepare_graph(g, &cfg)?;
    let world = match models {
        Some((a, c)) => {
            let agent = load_model::<Real>(a, c, &cfg.ddpg, cfg.seed).context("loading model")?;
            Simulation::with_agent(Arc::new(g), cfg, agent)?
        }
        None => Simulation::new(Arc::new(g), cfg)?,
    };
    Ok((world, bytes))
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::GenNet { height, width, nodes, density, seed, default_vmax, out } => {
            let spec = NetGenSpec::new(height, width, nodes, density, seed).map_err(|e| usage(e.to_string()))?;
            let opts = EnhanceOptions { default_v_max: default_vmax, ..EnhanceOptions::default() };
            let (g, s) = netgen::generate_with(&spec, &opts)?;
            save_network(&g, &out)?;
            println!(
                "nodes={} edges={} realized_density={:.2}% requested_density={:.2}%",
                s.nodes, s.directed_edges, s.realized_density_pct, s.requested_density_pct
            );
        }
        Cmd::GenRoad { segments, segment_length, default_vmax, out } => {
            let opts = EnhanceOptions { default_v_max: default_vmax, ..EnhanceOptions::default() };
            let g = netgen::straight_road(segments, segment_length, &opts).map_err(|e| usage(e.to_string()))?;
            save_network(&g, &out)?;
            println!("nodes={} edges={}", g.node_count(), g.edge_count());
        }
        Cmd::ImportOsm { input, out, default_vmax, drivable } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let mut opts = ImportOptions::default();
            opts.enhance.default_v_max = default_vmax;
            if let Some(d) = drivable {
                opts.drivable = d;
            }
            let net = osm::import_osm(&bytes, &opts)?;
            save_network(&net.graph, &out)?;
            print!("{}", net.report);
        }
        Cmd::Route { net, from, to, mode } => {
            let g = load_network(&net).with_context(|| format!("loading {}", net.display()))?;
            let mode = match mode {
                Mode::Shortest => PathMode::Shortest,
                Mode::Fastest => PathMode::Fastest,
            };
            let p = dijkstra(&g, NodeId(from), NodeId(to), mode)?;
            let nodes: Vec<String> = p.nodes.iter().map(|n| n.0.to_string()).collect();
            println!("{}", nodes.join(" "));
            println!("cost={}", p.total_cost);
        }
        Cmd::Train { net, config, steps, out_dir, seed, actor, critic, stop_at } => {
            let cfg = read_config(config.as_deref(), seed)?;
            let models = actor.as_deref().zip(critic.as_deref());
            let (mut world, bytes) = build_world(&net, cfg, models)?;
            let manifest = sim::new_manifest("train", &world, &net.display().to_string(), &bytes, steps, &out_dir);
            let opts = TrainOptions { steps, out_dir, stop_at };
            let summary = sim::train(&mut world, manifest, &opts, |row| {
                if row.step % 10_000 == 0 {
                    log::info!("step {} avg_reward {:.4} epsilon {:.4}", row.step, row.avg_reward, row.epsilon);
                }
            })?;
            for c in &summary.checkpoints {
                log::info!("saved {}", c.actor.display());
            }
            println!(
                "steps={} final_avg_reward={} checkpoints={}",
                summary.steps,
                summary.final_avg_reward.map_or("n/a".to_string(), |r| format!("{r:.4}")),
                summary.checkpoints.len()
            );
        }
        Cmd::Eval { net, actor, critic, steps, config, seed, out_dir } => {
            let cfg = read_config(config.as_deref(), seed)?;
            let (mut world, _) = build_world(&net, cfg, Some((&actor, &critic)))?;
            let s = sim::evaluate(&mut world, steps, &out_dir)?;
            println!("steps={} mean_reward={:.4} trace={}", s.steps, s.mean_reward, s.trace.display());
        }
        Cmd::Serve { net, config, port, host, actor, critic, save_dir, tick_rate } => {
            let cfg = read_config(config.as_deref(), None)?;
            let addr: SocketAddr =
                format!("{host}:{port}").parse().map_err(|_| usage(format!("bad address {host}:{port}")))?;
            let opts = DriverOptions {
                save_dir,
                snapshot_every: cfg.snapshot_every,
                tick_rate: tick_rate.unwrap_or(cfg.tick_rate),
                max_ticks: None,
            };
            let models = actor.as_deref().zip(critic.as_deref());
            let (world, _) = build_world(&net, cfg, models)?;
            let handle = spawn_simulation(world, opts);
            let rt = tokio::runtime::Runtime::new()?;
            let res = rt.block_on(drivesim_server::serve(handle.clone(), addr));
            handle.shutdown();
            res?;
        }
    }
    Ok(())
}
