use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use drivesim::geo::{
    circle_through, decode_network, encode_network, enhance, haversine_gcd, largest_wcc, CircleFit, EnhanceOptions,
    GeoPoint, NodeId, Point2, RoadGraph,
};
use drivesim::netgen::{generate, NetGenSpec};

fn geo() -> impl Strategy<Value = GeoPoint> {
    (-85.0f64..85.0, -180.0f64..180.0).prop_map(|(lat, lon)| GeoPoint::new(lat, lon).unwrap())
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

/// Random digraph on a small patch with several components.
fn scattered(seed: u64) -> RoadGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..25);
    let mut g = RoadGraph::new();
    for i in 0..n {
        g.add_node(GeoPoint::new(0.001 * (i / 5) as f64, 0.001 * (i % 5) as f64).unwrap());
    }
    for _ in 0..rng.gen_range(0..2 * n) {
        let (a, b) = (rng.gen_range(0..n) as u32, rng.gen_range(0..n) as u32);
        if a != b && g.find_edge(NodeId(a), NodeId(b)).is_none() {
            g.add_edge(NodeId(a), NodeId(b), None).unwrap();
        }
    }
    g
}

proptest! {
    #[test]
    fn haversine_is_a_metric(a in geo(), b in geo(), c in geo()) {
        let (ab, ba) = (haversine_gcd(a, b), haversine_gcd(b, a));
        prop_assert_eq!(ab, ba);
        prop_assert!(ab >= 0.0);
        let (ac, cb) = (haversine_gcd(a, c), haversine_gcd(c, b));
        prop_assert!(ab <= (ac + cb) * (1.0 + 1e-6) + 1e-6);
    }

    #[test]
    fn largest_component_is_connected(seed in 0u64..10_000) {
        let g = scattered(seed);
        let c = largest_wcc(&g).unwrap();
        let n = c.node_count();
        let mut parent: Vec<usize> = (0..n).collect();
        for e in c.edges() {
            let (a, b) = (find(&mut parent, e.from.index()), find(&mut parent, e.to.index()));
            parent[a] = b;
        }
        let roots = (0..n).filter(|&i| find(&mut parent, i) == i).count();
        prop_assert_eq!(roots, 1);
        prop_assert!(c.validate().is_ok());
    }

    #[test]
    fn circle_center_is_equidistant(
        x1 in -100.0f64..100.0, y1 in -100.0f64..100.0,
        x2 in -100.0f64..100.0, y2 in -100.0f64..100.0,
        x3 in -100.0f64..100.0, y3 in -100.0f64..100.0,
    ) {
        let (p, q, r) = (Point2::new(x1, y1), Point2::new(x2, y2), Point2::new(x3, y3));
        if let Ok(CircleFit::Finite { center, radius }) = circle_through(p, q, r) {
            for pt in [p, q, r] {
                prop_assert!((center.dist(pt) - radius).abs() <= 1e-9 * radius.max(1.0));
            }
        }
    }

    #[test]
    fn generated_networks_round_trip(seed in 0u64..200, nodes in 3usize..40, density in 10.0f64..100.0) {
        let spec = NetGenSpec::new(2000.0, 3000.0, nodes, density, seed).unwrap();
        let (g, _) = generate(&spec).unwrap();
        prop_assert_eq!(decode_network(&encode_network(&g)).unwrap(), g.clone());
        for e in g.edges() {
            let (gcd, v, w) = (e.gcd.unwrap(), e.v_max.unwrap(), e.w_fast.unwrap());
            prop_assert!((w * v - gcd).abs() < 1e-9 * gcd);
            prop_assert_eq!(gcd, haversine_gcd(g.node(e.from), g.node(e.to)));
        }
    }
}

#[test]
fn enhancement_rejects_coincident_endpoints() {
    let mut g = RoadGraph::new();
    let a = g.add_node(GeoPoint::new(1.0, 1.0).unwrap());
    let b = g.add_node(GeoPoint::new(1.0, 1.0).unwrap());
    g.add_edge(a, b, None).unwrap();
    assert!(enhance(g, &EnhanceOptions::default()).is_err());
}

#[test]
fn density_full_keeps_every_triangle_edge() {
    let spec = NetGenSpec::new(1000.0, 1000.0, 30, 100.0, 5).unwrap();
    let (g, s) = generate(&spec).unwrap();
    assert_eq!(g.edge_count(), 2 * s.triangulation_edges);
    assert_eq!(s.realized_density_pct, 100.0);
}
