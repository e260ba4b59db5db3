//! End-to-end acceptance checks. Runs without the libtest harness so that the
//! one-line verdicts are always printed; exits non-zero if any check fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use drivesim::dynamics::{coast_factor, step_motion, Action, MotionState, PhysConstants, VehicleProps};
use drivesim::geo::{
    decode_network, encode_network, haversine_gcd, load_network, save_network, EnhanceOptions, GeoPoint, NodeId,
    Point2, RoadGraph, EARTH_RADIUS_M,
};
use drivesim::learner::{load_model, save_model, Activation, DdpgAgent, DdpgConfig, Mlp, NaiveDateTime};
use drivesim::netgen::{delaunay, generate, straight_road, NetGenSpec};
use drivesim::osm::{import_osm, ImportOptions, OsmError};
use drivesim::routing::{dijkstra, dijkstra_by, PathMode, RoutingError};
use drivesim::sim::{self, evaluate, new_manifest, read_trace, train, SimConfig, TrainOptions, World};

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- training

const TRAIN_SEEDS: [u64; 3] = [0, 1, 2];
const TRAIN_BUDGET: u64 = 200_000;
const TRAIN_TARGET: f64 = -0.1;
/// Total steps the evaluated policy is trained for before the behavior check.
const EVAL_TRAINING_STEPS: u64 = 120_000;
const EVAL_TICKS: u64 = 3_000;
const SETTLE_TICKS: u64 = 100;
const SPEED_BAND: f64 = 0.5;

fn training_config(seed: u64) -> SimConfig {
    SimConfig { seed, speed_limits: vec![5.0, 6.0, 7.0, 8.0, 9.0], ..SimConfig::default() }
}

fn training_world(seed: u64) -> World<f32> {
    let cfg = training_config(seed);
    let road = straight_road(10, 250.0, &EnhanceOptions::default()).unwrap();
    let g = sim::prepare_graph(road, &cfg).unwrap();
    World::new(Arc::new(g), cfg).unwrap()
}

fn hyperparameters_match(cfg: &DdpgConfig) -> bool {
    let n = &cfg.noise;
    cfg.hidden == [400, 300, 200]
        && cfg.actor_lr == 5e-5
        && cfg.critic_lr == 1e-3
        && cfg.tau == 0.01
        && cfg.batch_size == 32
        && cfg.buffer_capacity == 10_000
        && cfg.warmup == 10_000
        && n.decay == 0.99995
        && n.decay_start == 40_000
}

struct SeedRun {
    seed: u64,
    reached_at: Option<u64>,
    final_avg: Option<f64>,
    secs: f64,
    world: World<f32>,
}

fn run_seed(seed: u64, scratch: &Path) -> SeedRun {
    let mut world = training_world(seed);
    let out = scratch.join(format!("train-{seed}"));
    let manifest = new_manifest("train", &world, "straight-road", b"", TRAIN_BUDGET, &out);
    let opts = TrainOptions { steps: TRAIN_BUDGET, out_dir: out, stop_at: Some(TRAIN_TARGET) };
    let t = Instant::now();
    let s = train(&mut world, manifest, &opts, |_| {}).unwrap();
    SeedRun { seed, reached_at: s.reached_at, final_avg: s.final_avg_reward, secs: t.elapsed().as_secs_f64(), world }
}

fn training_convergence(scratch: &Path) -> (Verdict, Option<World<f32>>) {
    if !hyperparameters_match(&training_config(0).ddpg) {
        return (Err("default hyperparameters differ from the experiment".into()), None);
    }
    let t = Instant::now();
    let runs: Vec<SeedRun> = std::thread::scope(|s| {
        let handles: Vec<_> = TRAIN_SEEDS.iter().map(|&seed| s.spawn(move || run_seed(seed, scratch))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let wall = t.elapsed().as_secs_f64();
    let mut parts = Vec::new();
    for r in &runs {
        let at = r.reached_at.map_or("not reached".to_string(), |s| format!("reached at {s}"));
        parts.push(format!("seed {} {at} (avg {:.3}, {:.0}s)", r.seed, r.final_avg.unwrap_or(f64::NAN), r.secs));
    }
    let passed = runs.iter().filter(|r| r.reached_at.is_some()).count();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let detail = format!("{passed}/3 seeds; {}; wall {:.1} min on {cores} core(s)", parts.join(", "), wall / 60.0);
    let world = runs.into_iter().find(|r| r.reached_at.is_some()).map(|r| r.world);
    (check(passed >= 2, detail), world)
}

/// For every limit change in a single-vehicle trace, the number of ticks until
/// the speed is inside the band and whether it stays there until the next change.
fn settle_report(rows: &[sim::TraceRow]) -> Vec<(f64, f64, Option<u64>, bool)> {
    let mut segments: Vec<&[sim::TraceRow]> = Vec::new();
    let mut start = 0;
    for i in 1..=rows.len() {
        if i == rows.len() || rows[i].v_limit != rows[i - 1].v_limit {
            segments.push(&rows[start..i]);
            start = i;
        }
    }
    let mut out = Vec::new();
    let mut prev_limit = 0.0;
    for seg in segments {
        let limit = seg[0].v_limit;
        let within = |r: &sim::TraceRow| (r.v - r.v_limit).abs() <= SPEED_BAND;
        let settle = seg.iter().position(within).map(|i| i as u64);
        let held = settle.is_some_and(|i| seg[i as usize..].iter().all(within));
        // A segment cut off by the end of the trace before the deadline says nothing.
        if settle.is_some() || seg.len() as u64 > SETTLE_TICKS {
            out.push((prev_limit, limit, settle, held));
        }
        prev_limit = limit;
    }
    out
}

fn post_training_behavior(world: Option<World<f32>>, scratch: &Path) -> Verdict {
    let Some(mut world) = world else {
        return Err("no seed reached the training target".into());
    };
    let done = world.tick_count();
    if done < EVAL_TRAINING_STEPS {
        let out = scratch.join("train-more");
        let manifest = new_manifest("train", &world, "straight-road", b"", EVAL_TRAINING_STEPS - done, &out);
        let opts = TrainOptions { steps: EVAL_TRAINING_STEPS - done, out_dir: out, stop_at: None };
        train(&mut world, manifest, &opts, |_| {}).map_err(|e| e.to_string())?;
    }
    let eval = evaluate(&mut world, EVAL_TICKS, &scratch.join("eval")).map_err(|e| e.to_string())?;
    let rows = read_trace(&eval.trace).map_err(|e| e.to_string())?;
    let report = settle_report(&rows);
    let changes = report.len();
    let settled = report.iter().filter(|r| r.2.is_some_and(|t| t <= SETTLE_TICKS)).count();
    let held = report.iter().filter(|r| r.2.is_some_and(|t| t <= SETTLE_TICKS) && r.3).count();
    let worst = report.iter().filter_map(|r| r.2).max().unwrap_or(0);
    let failures: Vec<String> = report
        .iter()
        .filter(|r| !(r.2.is_some_and(|t| t <= SETTLE_TICKS) && r.3))
        .map(|r| format!("{}->{} settle {:?} held {}", r.0, r.1, r.2, r.3))
        .collect();
    let detail = format!(
        "trained {} steps; {changes} limit segments, {settled} settled within {SETTLE_TICKS} ticks (slowest {worst}), {held} held; mean reward {:.4}{}",
        world.tick_count() - EVAL_TICKS,
        eval.mean_reward,
        if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
    );
    check(changes >= 3 && held == changes, detail)
}

// ---------------------------------------------------------------- physics

fn physics_oracle() -> Verdict {
    let k = PhysConstants::<f64>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let m = rng.gen_range(900.0..1600.0);
        let f = rng.gen_range(3000.0..8000.0);
        let eta = rng.gen_range(30.0..70.0);
        let tau = rng.gen_range(0.8..1.2);
        let props = VehicleProps::new(m, f, eta, tau, 4.0).unwrap();
        let p_prev = rng.gen_range(0.0..5000.0);
        let p = p_prev + rng.gen_range(0.0..3.5);
        let a: f64 = rng.gen_range(-1.0..=1.0);

        // Second-order recurrence in position form, as a transition matrix.
        let d = m + eta * k.dt;
        let trans = Matrix2::new((2.0 * m + eta * k.dt) / d, -m / d, 1.0, 0.0);
        let force = if a < 0.0 { k.g0_hat * k.kappa * tau * m } else { f };
        let drive = Vector2::new(force * k.dt * k.dt / d * a, 0.0);
        let mut want = trans * Vector2::new(p, p_prev) + drive;
        if want[0] < p {
            want = Vector2::new(p, p);
        }

        let got = step_motion(MotionState { p, p_prev }, Action::new(a), &props, &k).unwrap();
        let scale = p.abs().max(1.0);
        worst = worst.max((got.p - want[0]).abs() / scale).max((got.p_prev - want[1]).abs() / scale);
    }

    let props = VehicleProps::new(1200.0, 5000.0, 50.0, 1.0, 4.0).unwrap();
    let rest = MotionState { p: 123.456, p_prev: 123.456 };
    let rest_fixed = step_motion(rest, Action::new(0.0), &props, &k).unwrap() == rest;

    let mut s = MotionState { p: 10.0, p_prev: 9.0 };
    let mut decay_err: f64 = 0.0;
    let expected = 1200.0 / (1200.0 + 50.0 * 0.1);
    for _ in 0..50 {
        let next = step_motion(s, Action::new(0.0), &props, &k).unwrap();
        decay_err = decay_err.max((next.delta() / s.delta() - expected).abs());
        s = next;
    }
    decay_err = decay_err.max((coast_factor(&props, &k) - expected).abs());

    check(
        worst <= 1e-12 && rest_fixed && decay_err <= 1e-9,
        format!("1e5 samples, worst relative deviation {worst:.2e}; rest fixed point {rest_fixed}; coast factor error {decay_err:.2e}"),
    )
}

// ---------------------------------------------------------------- gradients

fn loss(net: &Mlp<f64>, x: &[f64], batch: usize, dy: &[f64]) -> f64 {
    let c = net.forward(x, batch).unwrap();
    c.output().iter().zip(dy).map(|(y, d)| y * d).sum()
}

fn gradient_check() -> Verdict {
    const H: f64 = 1e-5;
    let all = [Activation::LeakyRelu, Activation::Tanh, Activation::Linear];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut seen = BTreeSet::new();
    let mut checked = 0usize;
    for net_i in 0..50 {
        let depth = rng.gen_range(1..=4);
        let sizes: Vec<usize> = (0..=depth).map(|_| rng.gen_range(1..=6)).collect();
        let acts: Vec<Activation> = (0..depth).map(|l| all[(net_i + l) % 3]).collect();
        for a in &acts {
            seen.insert(format!("{a:?}"));
        }
        let mut net = Mlp::<f64>::random(&sizes, &acts, 0.7, &mut rng).unwrap();
        for b in net.params_mut().iter_mut() {
            *b += rng.gen_range(-0.1..0.1);
        }
        let batch = rng.gen_range(1..=3);
        let x: Vec<f64> = (0..batch * sizes[0]).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let dy: Vec<f64> = (0..batch * sizes[depth]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cache = net.forward(&x, batch).unwrap();
        let grads = net.backward(&cache, &dy).unwrap();

        let rel =
            |analytic: f64, numeric: f64| (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3);
        for i in 0..net.params().len() {
            let orig = net.params()[i];
            net.params_mut()[i] = orig + H;
            let up = loss(&net, &x, batch, &dy);
            net.params_mut()[i] = orig - H;
            let down = loss(&net, &x, batch, &dy);
            net.params_mut()[i] = orig;
            worst = worst.max(rel(grads.params[i], (up - down) / (2.0 * H)));
            checked += 1;
        }
        let mut xp = x.clone();
        for i in 0..x.len() {
            xp[i] = x[i] + H;
            let up = loss(&net, &xp, batch, &dy);
            xp[i] = x[i] - H;
            let down = loss(&net, &xp, batch, &dy);
            xp[i] = x[i];
            worst = worst.max(rel(grads.input[i], (up - down) / (2.0 * H)));
            checked += 1;
        }
    }
    check(
        worst <= 1e-4 && seen.len() == 3,
        format!("50 networks, {checked} partials, activations {seen:?}, worst relative error {worst:.2e}"),
    )
}

// ---------------------------------------------------------------- routing

fn brute_force(n: usize, arcs: &[(usize, usize, f64)], s: usize, t: usize) -> Option<f64> {
    fn dfs(u: usize, t: usize, cost: f64, seen: &mut Vec<bool>, arcs: &[(usize, usize, f64)], best: &mut Option<f64>) {
        if u == t {
            *best = Some(best.map_or(cost, |b: f64| b.min(cost)));
            return;
        }
        for &(a, b, w) in arcs {
            if a == u && !seen[b] {
                seen[b] = true;
                dfs(b, t, cost + w, seen, arcs, best);
                seen[b] = false;
            }
        }
    }
    let mut seen = vec![false; n];
    seen[s] = true;
    let mut best = None;
    dfs(s, t, 0.0, &mut seen, arcs, &mut best);
    best
}

fn divergence_example() -> Result<(bool, bool), String> {
    let mut g = RoadGraph::new();
    let pt = |lat, lon| GeoPoint::new(lat, lon).unwrap();
    let a = g.add_node(pt(0.0, 0.0));
    let b = g.add_node(pt(0.0, 0.01));
    let slow = g.add_node(pt(0.001, 0.005));
    let fast = g.add_node(pt(0.005, 0.005));
    for (x, y, v) in [(a, slow, 5.0), (slow, b, 5.0), (a, fast, 30.0), (fast, b, 30.0)] {
        g.add_edge(x, y, Some(v)).map_err(|e| e.to_string())?;
    }
    let g = drivesim::geo::enhance(g, &EnhanceOptions::default()).map_err(|e| e.to_string())?;
    let short = dijkstra(&g, a, b, PathMode::Shortest).map_err(|e| e.to_string())?;
    let quick = dijkstra(&g, a, b, PathMode::Fastest).map_err(|e| e.to_string())?;
    Ok((short.nodes == [a, slow, b], quick.nodes == [a, fast, b]))
}

fn dijkstra_optimality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut agree, mut unreachable) = (0, 0);
    let mut problems = Vec::new();
    for case in 0..100 {
        let n = rng.gen_range(2..=10);
        let mut g = RoadGraph::new();
        for i in 0..n {
            g.add_node(GeoPoint::new(0.0, i as f64 * 0.001).unwrap());
        }
        let mut arcs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && rng.gen_bool(0.3) {
                    arcs.push((a, b, rng.gen_range(1.0..100.0)));
                    g.add_edge(NodeId(a as u32), NodeId(b as u32), None).unwrap();
                }
            }
        }
        let s = rng.gen_range(0..n);
        let t = (s + rng.gen_range(1..n)) % n;
        let want = brute_force(n, &arcs, s, t);
        let got = dijkstra_by(&g, NodeId(s as u32), NodeId(t as u32), |e| Ok(arcs[e.index()].2));
        match (want, got) {
            (None, Err(RoutingError::NoPath)) => unreachable += 1,
            (Some(w), Ok(p)) => {
                let walked: f64 = p.edges.iter().map(|e| arcs[e.index()].2).sum();
                let linked = p.edges.iter().zip(p.nodes.windows(2)).all(|(e, w)| {
                    let (a, b, _) = arcs[e.index()];
                    a == w[0].index() && b == w[1].index()
                });
                if (p.total_cost - w).abs() <= 1e-9 * w && (walked - w).abs() <= 1e-9 * w && linked {
                    agree += 1;
                } else {
                    problems.push(format!("case {case}: {} vs {w}", p.total_cost));
                }
            }
            (w, g) => problems.push(format!("case {case}: brute force {w:?}, dijkstra {:?}", g.map(|p| p.total_cost))),
        }
    }
    let (short_ok, fast_ok) = match divergence_example() {
        Ok(x) => x,
        Err(e) => return Err(format!("divergence example failed: {e}")),
    };
    check(
        problems.is_empty() && short_ok && fast_ok,
        format!(
            "100 digraphs: {agree} optimal, {unreachable} unreachable agreed{}; shortest takes short/slow road {short_ok}, fastest takes long/fast road {fast_ok}",
            if problems.is_empty() { String::new() } else { format!("; mismatches {problems:?}") }
        ),
    )
}

// ---------------------------------------------------------------- delaunay

fn cross(o: Point2<f64>, a: Point2<f64>, b: Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Andrew's monotone chain; counts strict hull vertices.
fn hull_size(points: &[Point2<f64>]) -> usize {
    let mut p = points.to_vec();
    p.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    let mut hull: Vec<Point2<f64>> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2<f64>>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull.len()
}

fn delaunay_validity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut bad_counts = Vec::new();
    for case in 0..100 {
        let n = rng.gen_range(3..=50);
        let pts: Vec<Point2<f64>> =
            (0..n).map(|_| Point2::new(rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0))).collect();
        let tri = match delaunay(&pts) {
            Ok(t) => t,
            Err(e) => return Err(format!("case {case}: {e}")),
        };
        for t in &tri.triangles {
            let [a, b, c] = t.map(|i| pts[i]);
            for (j, d) in pts.iter().enumerate() {
                if t.contains(&j) {
                    continue;
                }
                let row = |p: Point2<f64>| {
                    let (x, y) = (p.x - d.x, p.y - d.y);
                    Vector3::new(x, y, x * x + y * y)
                };
                let m = Matrix3::from_columns(&[row(a), row(b), row(c)]).transpose();
                let scale = row(a).norm() * row(b).norm() * row(c).norm();
                // Positive means d lies inside the counter-clockwise circumcircle.
                worst = worst.max(m.determinant() / scale);
            }
        }
        let h = hull_size(&pts);
        if tri.edges.len() != 3 * n - 3 - h || tri.triangles.len() != 2 * n - 2 - h {
            bad_counts.push(format!("case {case}: n={n} h={h} edges={}", tri.edges.len()));
        }
    }
    check(
        worst <= 1e-10 && bad_counts.is_empty(),
        format!("100 point sets; max normalized incircle determinant {worst:.2e}; edge count identity failures {bad_counts:?}"),
    )
}

// ---------------------------------------------------------------- osm

const OSM_NODES: &str = r#"
  <node id="1" lat="48.1000" lon="11.5000"/>
  <node id="2" lat="48.1010" lon="11.5000"/>
  <node id="3" lat="48.1010" lon="11.5010"/>"#;

fn osm_fixture(tags: &[(&str, &str)]) -> String {
    let tags: String = tags.iter().map(|(k, v)| format!("<tag k=\"{k}\" v=\"{v}\"/>")).collect();
    format!("<osm version=\"0.6\">{OSM_NODES}\n  <way id=\"7\"><nd ref=\"1\"/><nd ref=\"2\"/><nd ref=\"3\"/>{tags}</way>\n</osm>")
}

/// Edges as (from lat, from lon, to lat, to lon, v_max), rounded for comparison.
type EdgeKey = (i64, i64, i64, i64, i64);

fn edge_set(g: &RoadGraph) -> BTreeSet<EdgeKey> {
    let r = |x: f64| (x * 1e6).round() as i64;
    g.edges()
        .iter()
        .map(|e| {
            let (a, b) = (g.node(e.from), g.node(e.to));
            (r(a.lat()), r(a.lon()), r(b.lat()), r(b.lon()), r(e.v_max.unwrap_or(-1.0)))
        })
        .collect()
}

/// Fixture name, way tags and the expected edges (`None` for an empty network).
type OsmCase = (&'static str, Vec<(&'static str, &'static str)>, Option<BTreeSet<EdgeKey>>);

fn osm_golden() -> Verdict {
    let (n1, n2, n3) = ((48.1, 11.5), (48.101, 11.5), (48.101, 11.501));
    let e = |a: (f64, f64), b: (f64, f64), v: f64| {
        let r = |x: f64| (x * 1e6).round() as i64;
        (r(a.0), r(a.1), r(b.0), r(b.1), r(v))
    };
    let kmh = |x: f64| x / 3.6;
    let cases: Vec<OsmCase> = vec![
        (
            "two-way",
            vec![("highway", "residential"), ("maxspeed", "50")],
            Some([e(n1, n2, kmh(50.0)), e(n2, n1, kmh(50.0)), e(n2, n3, kmh(50.0)), e(n3, n2, kmh(50.0))].into()),
        ),
        (
            "oneway=yes",
            vec![("highway", "primary"), ("oneway", "yes")],
            Some([e(n1, n2, 13.9), e(n2, n3, 13.9)].into()),
        ),
        ("oneway=-1", vec![("highway", "primary"), ("oneway", "-1")], Some([e(n3, n2, 13.9), e(n2, n1, 13.9)].into())),
        ("footway-only", vec![("highway", "footway")], None),
        (
            "maxspeed 36",
            vec![("highway", "tertiary"), ("oneway", "yes"), ("maxspeed", "36")],
            Some([e(n1, n2, 10.0), e(n2, n3, 10.0)].into()),
        ),
        (
            "maxspeed mph",
            vec![("highway", "tertiary"), ("oneway", "yes"), ("maxspeed", "30 mph")],
            Some([e(n1, n2, 30.0 * 1.609344 / 3.6), e(n2, n3, 30.0 * 1.609344 / 3.6)].into()),
        ),
        (
            "maxspeed none",
            vec![("highway", "tertiary"), ("oneway", "yes"), ("maxspeed", "none")],
            Some([e(n1, n2, 13.9), e(n2, n3, 13.9)].into()),
        ),
    ];
    let mut failures = Vec::new();
    for (name, tags, want) in &cases {
        let got = import_osm(osm_fixture(tags).as_bytes(), &ImportOptions::default());
        let ok = match (got, want) {
            (Ok(net), Some(w)) => net.graph.node_count() == 3 && edge_set(&net.graph) == *w,
            (Err(OsmError::EmptyNetwork), None) => true,
            _ => false,
        };
        if !ok {
            failures.push(*name);
        }
    }
    check(failures.is_empty(), format!("{} fixtures; failing {failures:?}", cases.len()))
}

// ---------------------------------------------------------------- haversine

/// Central angle from unit vectors with atan2, which stays well conditioned
/// for both tiny and near-antipodal separations.
fn vector_gcd(a: (f64, f64), b: (f64, f64)) -> f64 {
    let unit = |(lat, lon): (f64, f64)| {
        let (p, l) = (lat.to_radians(), lon.to_radians());
        Vector3::new(p.cos() * l.cos(), p.cos() * l.sin(), p.sin())
    };
    let (u, v) = (unit(a), unit(b));
    EARTH_RADIUS_M * u.cross(&v).norm().atan2(u.dot(&v))
}

fn haversine_oracle() -> Verdict {
    let gp = |lat, lon| GeoPoint::new(lat, lon).unwrap();
    let r = EARTH_RADIUS_M;
    let rad = std::f64::consts::PI / 180.0;
    let fixed = [
        ((0.0, 0.0), (0.0, 0.0), 0.0),
        ((0.0, 0.0), (0.0, 1.0), r * rad),
        ((0.0, 0.0), (1.0, 0.0), r * rad),
        ((0.0, 0.0), (0.0, 90.0), r * 90.0 * rad),
        ((0.0, 0.0), (90.0, 0.0), r * 90.0 * rad),
        ((0.0, -45.0), (0.0, 45.0), r * 90.0 * rad),
        ((-30.0, 10.0), (30.0, 10.0), r * 60.0 * rad),
    ];
    let mut fixed_worst: f64 = 0.0;
    for (a, b, want) in fixed {
        fixed_worst = fixed_worst.max((haversine_gcd(gp(a.0, a.1), gp(b.0, b.1)) - want).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut rel_worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = (rng.gen_range(-89.0..89.0), rng.gen_range(-180.0..180.0));
        let b = (rng.gen_range(-89.0..89.0), rng.gen_range(-180.0..180.0));
        let want = vector_gcd(a, b);
        let got = haversine_gcd(gp(a.0, a.1), gp(b.0, b.1));
        rel_worst = rel_worst.max((got - want).abs() / want);
    }
    check(
        fixed_worst <= 0.01 && rel_worst <= 1e-6,
        format!(
            "{} axis cases worst {fixed_worst:.2e} m; 1000 random pairs worst relative {rel_worst:.2e}",
            fixed.len()
        ),
    )
}

// ---------------------------------------------------------------- determinism

fn small_training_config() -> SimConfig {
    let mut cfg = training_config(9);
    cfg.ddpg.hidden = vec![32, 16];
    cfg.ddpg.warmup = 200;
    cfg.ddpg.buffer_capacity = 1000;
    cfg.log_interval = 100;
    cfg.checkpoint_interval = 1000;
    cfg
}

fn determinism(scratch: &Path) -> Verdict {
    let road = straight_road(4, 200.0, &EnhanceOptions::default()).map_err(|e| e.to_string())?;
    let mut metrics = Vec::new();
    for run in 0..2 {
        let cfg = small_training_config();
        let g = sim::prepare_graph(road.clone(), &cfg).map_err(|e| e.to_string())?;
        let mut world = World::<f32>::new(Arc::new(g), cfg).map_err(|e| e.to_string())?;
        let out = scratch.join(format!("det-{run}"));
        let manifest = new_manifest("train", &world, "road", b"", 1500, &out);
        let opts = TrainOptions { steps: 1500, out_dir: out, stop_at: None };
        let s = train(&mut world, manifest, &opts, |_| {}).map_err(|e| e.to_string())?;
        metrics.push(fs::read(s.metrics).map_err(|e| e.to_string())?);
    }
    let same_metrics = metrics[0] == metrics[1];
    let rows = String::from_utf8_lossy(&metrics[0]).lines().count() - 1;

    let spec = NetGenSpec::new(3000.0, 4000.0, 60, 70.0, 17).map_err(|e| e.to_string())?;
    let (a, b) = (dir_bytes(&spec, scratch, "a")?, dir_bytes(&spec, scratch, "b")?);
    let same_net = a == b;
    check(
        same_metrics && rows == 15 && same_net,
        format!("metrics.csv identical {same_metrics} ({rows} rows); generated network files identical {same_net} ({} bytes)", a.len()),
    )
}

fn dir_bytes(spec: &NetGenSpec, scratch: &Path, tag: &str) -> Result<Vec<u8>, String> {
    let (g, _) = generate(spec).map_err(|e| e.to_string())?;
    let path = scratch.join(format!("net-{tag}.dsn"));
    save_network(&g, &path).map_err(|e| e.to_string())?;
    fs::read(path).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- persistence

/// `<layers>_<YYYYMMDD>_<HHMMSS>_<steps>_<role>.<ext>` with layers like `2-400-300-200-1`.
fn matches_model_name(name: &str) -> bool {
    let Some((stem, ext)) = name.rsplit_once('.') else { return false };
    let parts: Vec<&str> = stem.split('_').collect();
    let digits = |s: &str, len: Option<usize>| {
        !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit()) && len.is_none_or(|l| s.len() == l)
    };
    parts.len() == 5
        && parts[0].split('-').all(|s| digits(s, None))
        && parts[0].split('-').count() >= 2
        && digits(parts[1], Some(8))
        && digits(parts[2], Some(6))
        && digits(parts[3], None)
        && matches!(parts[4], "actor" | "critic")
        && matches!(ext, "acnet" | "txt")
}

fn persistence(scratch: &Path) -> Verdict {
    let spec = NetGenSpec::new(2000.0, 2000.0, 40, 80.0, 3).map_err(|e| e.to_string())?;
    let (g, _) = generate(&spec).map_err(|e| e.to_string())?;
    let path = scratch.join("roundtrip.dsn");
    save_network(&g, &path).map_err(|e| e.to_string())?;
    let net_ok =
        load_network(&path).map_err(|e| e.to_string())? == g && decode_network(&encode_network(&g)).ok() == Some(g);

    let cfg = DdpgConfig::default();
    let agent = DdpgAgent::<f32>::new(2, cfg.clone(), 8).map_err(|e| e.to_string())?;
    let at = NaiveDateTime::parse_from_str("2024-03-05 14:07:09", "%Y-%m-%d %H:%M:%S").unwrap();
    let files = save_model(&agent, &scratch.join("models"), 12_345, at).map_err(|e| e.to_string())?;
    let loaded: DdpgAgent<f32> = load_model(&files.actor, &files.critic, &cfg, 0).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut identical = 0;
    for _ in 0..100 {
        let s = [rng.gen_range(0.0..1.0f32), rng.gen_range(0.0..1.0f32)];
        let (a, b) = (agent.policy(&s).unwrap(), loaded.policy(&s).unwrap());
        identical += usize::from(a.to_bits() == b.to_bits());
    }
    let names: Vec<String> =
        files.all().iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    let named = names.len() == 4
        && names.iter().all(|n| matches_model_name(n) && n.starts_with("2-400-300-200-1_20240305_140709_12345_"));
    let rejects = !matches_model_name("2-400-1_2024035_140709_1_actor.acnet")
        && !matches_model_name("x_20240305_140709_1_actor.acnet");
    check(
        net_ok && identical == 100 && named && rejects,
        format!("network round-trip {net_ok}; {identical}/100 actor outputs bit-identical; names {names:?}"),
    )
}

// ---------------------------------------------------------------- main

fn main() {
    // Quiet libtest-style flags passed by `cargo test` are ignored.
    let scratch = tempfile::tempdir().expect("scratch directory");
    let dir = scratch.path();
    let mut results: Vec<(&str, Verdict)> = vec![
        ("physics oracle equivalence", physics_oracle()),
        ("gradient correctness", gradient_check()),
        ("dijkstra optimality", dijkstra_optimality()),
        ("delaunay validity", delaunay_validity()),
        ("osm import golden fixtures", osm_golden()),
        ("haversine", haversine_oracle()),
        ("determinism", determinism(dir)),
        ("persistence round-trips", persistence(dir)),
    ];
    for (name, v) in &results {
        print_verdict(name, v);
    }
    let (conv, world) = training_convergence(dir);
    print_verdict("training convergence", &conv);
    let behavior = post_training_behavior(world, dir);
    print_verdict("post-training behavior", &behavior);
    results.push(("training convergence", conv));
    results.push(("post-training behavior", behavior));

    let failed = results.iter().filter(|(_, v)| v.is_err()).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn print_verdict(name: &str, v: &Verdict) {
    match v {
        Ok(d) => println!("PASS {name}: {d}"),
        Err(d) => println!("FAIL {name}: {d}"),
    }
}
