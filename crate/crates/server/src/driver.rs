//! The simulation thread. It owns the world; the outside talks to it through
//! a command queue and reads the latest snapshot from a watch channel.

use std::path::PathBuf;
use std::sync::mpsc::{self, Receiver, Sender, TryRecvError};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use tokio::sync::{oneshot, watch};

use drivesim::learner::{local_now, save_model};
use drivesim::scalar::Scalar;
use drivesim::sim::{Command, StatSeries, World};

use crate::wire::{network_json, WireSnapshot};

#[derive(Clone, Debug)]
pub struct DriverOptions {
    pub save_dir: PathBuf,
    /// Publish a snapshot every this many ticks.
    pub snapshot_every: u64,
    /// Ticks per second; 0 runs flat out.
    pub tick_rate: f64,
    /// Stop ticking after this many ticks (the server stays up).
    pub max_ticks: Option<u64>,
}

pub(crate) enum Request {
    Sim(Command),
    Save(oneshot::Sender<Result<Vec<String>, String>>),
    Stats(usize, oneshot::Sender<Option<StatSeries>>),
    Shutdown,
}

struct Shared {
    requests: Mutex<Sender<Request>>,
    thread: Mutex<Option<JoinHandle<()>>>,
}

/// Cheap handle to a running simulation thread.
#[derive(Clone)]
pub struct SimHandle {
    shared: Arc<Shared>,
    snapshots: watch::Receiver<Arc<WireSnapshot>>,
    network: Arc<String>,
    n_vehicles: usize,
}

impl SimHandle {
    pub fn n_vehicles(&self) -> usize {
        self.n_vehicles
    }

    pub fn network_json(&self) -> Arc<String> {
        self.network.clone()
    }

    pub fn latest(&self) -> Arc<WireSnapshot> {
        self.snapshots.borrow().clone()
    }

    pub fn subscribe(&self) -> watch::Receiver<Arc<WireSnapshot>> {
        self.snapshots.clone()
    }

    pub(crate) fn send(&self, r: Request) -> bool {
        self.shared.requests.lock().expect("request lock").send(r).is_ok()
    }

    pub fn command(&self, c: Command) -> bool {
        self.send(Request::Sim(c))
    }

    pub async fn save(&self) -> Result<Vec<String>, String> {
        let (tx, rx) = oneshot::channel();
        if !self.send(Request::Save(tx)) {
            return Err("simulation stopped".into());
        }
        rx.await.map_err(|_| "simulation stopped".to_string())?
    }

    pub async fn stats(&self, id: usize) -> Option<StatSeries> {
        let (tx, rx) = oneshot::channel();
        if !self.send(Request::Stats(id, tx)) {
            return None;
        }
        rx.await.ok().flatten()
    }

    /// Stops the thread and waits for it.
    pub fn shutdown(&self) {
        self.send(Request::Shutdown);
        if let Some(t) = self.shared.thread.lock().expect("thread lock").take() {
            let _ = t.join();
        }
    }
}

/// Moves `world` onto its own thread and starts ticking.
pub fn spawn_simulation<T: Scalar>(world: World<T>, opts: DriverOptions) -> SimHandle {
    let (req_tx, req_rx) = mpsc::channel();
    let (snap_tx, snap_rx) = watch::channel(Arc::new(WireSnapshot::from(&world.snapshot())));
    let network = Arc::new(network_json(world.graph()));
    let n_vehicles = world.vehicles().len();
    let thread = std::thread::Builder::new()
        .name("simulation".into())
        .spawn(move || run(world, opts, req_rx, snap_tx))
        .expect("spawn simulation thread");
    SimHandle {
        shared: Arc::new(Shared { requests: Mutex::new(req_tx), thread: Mutex::new(Some(thread)) }),
        snapshots: snap_rx,
        network,
        n_vehicles,
    }
}

fn run<T: Scalar>(
    mut world: World<T>,
    opts: DriverOptions,
    requests: Receiver<Request>,
    snapshots: watch::Sender<Arc<WireSnapshot>>,
) {
    let publish = |w: &World<T>| {
        snapshots.send_replace(Arc::new(WireSnapshot::from(&w.snapshot())));
    };
    let period = (opts.tick_rate > 0.0).then(|| Duration::from_secs_f64(1.0 / opts.tick_rate));
    let every = opts.snapshot_every.max(1);
    let mut next_due = Instant::now();
    loop {
        let mut changed = false;
        loop {
            match requests.try_recv() {
                Ok(Request::Sim(c)) => {
                    world.enqueue(c);
                    changed = true;
                }
                Ok(Request::Save(reply)) => {
                    let steps = world.tick_count();
                    let res = save_model(world.agent(), &opts.save_dir, steps, local_now())
                        .map(|f| f.all().iter().map(|p| p.display().to_string()).collect())
                        .map_err(|e| e.to_string());
                    let _ = reply.send(res);
                }
                Ok(Request::Stats(id, reply)) => {
                    let _ = reply.send(world.vehicles().get(id).map(|v| v.stats.series()));
                }
                Ok(Request::Shutdown) | Err(TryRecvError::Disconnected) => return,
                Err(TryRecvError::Empty) => break,
            }
        }
        if changed {
            // Commands take effect between ticks and show up immediately.
            world.drain_commands();
            publish(&world);
        }
        let exhausted = opts.max_ticks.is_some_and(|m| world.tick_count() >= m);
        if world.is_paused() || exhausted {
            std::thread::sleep(Duration::from_millis(5));
            continue;
        }
        if let Some(p) = period {
            let now = Instant::now();
            if now < next_due {
                std::thread::sleep((next_due - now).min(Duration::from_millis(5)));
                continue;
            }
            next_due += p;
            if next_due < now {
                next_due = now;
            }
        }
        match world.tick() {
            Ok(r) => {
                if r.tick % every == 0 {
                    publish(&world);
                }
            }
            Err(e) => {
                log::error!("simulation stopped: {e}");
                return;
            }
        }
    }
}
