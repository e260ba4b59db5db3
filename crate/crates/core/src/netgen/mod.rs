//! Artificial road networks: uniformly sampled junctions joined by a thinned
//! Delaunay triangulation.

pub mod delaunay;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geo::{self, EnhanceOptions, GeoPoint, GraphError, NodeId, Point2, RoadGraph, EARTH_RADIUS_M};

pub use delaunay::{delaunay, Triangulation};

/// Meters per degree of latitude (and of longitude on the equator).
pub const METERS_PER_DEGREE: f64 = 111_320.0;
const MAX_ATTEMPTS: u64 = 8;

#[derive(Debug, Error, PartialEq)]
pub enum NetGenError {
    #[error("invalid generator setting: {0}")]
    InvalidSpec(String),
    #[error("degenerate point set: {0}")]
    DegenerateInput(String),
    #[error("no valid triangulation after {0} attempts")]
    GenerationFailed(u64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetGenSpec {
    height_m: f64,
    width_m: f64,
    n_nodes: usize,
    density_pct: f64,
    seed: u64,
}

impl NetGenSpec {
    pub fn new(height_m: f64, width_m: f64, n_nodes: usize, density_pct: f64, seed: u64) -> Result<Self, NetGenError> {
        let bad = |m: &str| Err(NetGenError::InvalidSpec(m.to_string()));
        if !(height_m > 0.0 && height_m.is_finite()) {
            return bad("height must be positive");
        }
        if !(width_m > 0.0 && width_m.is_finite()) {
            return bad("width must be positive");
        }
        if n_nodes < 3 {
            return bad("at least three nodes are required");
        }
        if !(density_pct > 0.0 && density_pct <= 100.0) {
            return bad("density must lie in (0, 100]");
        }
        Ok(Self { height_m, width_m, n_nodes, density_pct, seed })
    }

    pub fn height_m(&self) -> f64 {
        self.height_m
    }
    pub fn width_m(&self) -> f64 {
        self.width_m
    }
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }
    pub fn density_pct(&self) -> f64 {
        self.density_pct
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// South-west and north-east corners of the map. Maps sit on the equator with
/// their south-west corner at (0, 0).
pub fn map_corners(spec: &NetGenSpec) -> (GeoPoint, GeoPoint) {
    let sw = GeoPoint::new(0.0, 0.0).expect("origin is valid");
    let ne = GeoPoint::new(spec.height_m / METERS_PER_DEGREE, spec.width_m / METERS_PER_DEGREE)
        .expect("map extent fits on the globe");
    (sw, ne)
}

pub fn sample_nodes<R: Rng>(spec: &NetGenSpec, rng: &mut R) -> Vec<GeoPoint> {
    let (sw, ne) = map_corners(spec);
    (0..spec.n_nodes)
        .map(|_| {
            let lat = rng.gen_range(sw.lat()..=ne.lat());
            let lon = rng.gen_range(sw.lon()..=ne.lon());
            GeoPoint::new(lat, lon).expect("sample inside the map")
        })
        .collect()
}

/// Number of roads kept at a given density, rounding halves away from zero.
pub fn target_edge_count(total: usize, density_pct: f64) -> usize {
    (density_pct / 100.0 * total as f64).round() as usize
}

/// Removes uniformly chosen edges until the requested density is reached.
/// The survivors keep their original order.
pub fn thin_edges<T, R: Rng>(tri: &Triangulation<T>, density_pct: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let total = tri.edges.len();
    let keep = target_edge_count(total, density_pct).min(total);
    let removed = index::sample(rng, total, total - keep);
    let mut drop = vec![false; total];
    for i in removed.iter() {
        drop[i] = true;
    }
    tri.edges.iter().zip(drop).filter(|(_, d)| !d).map(|(e, _)| *e).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationSummary {
    pub nodes: usize,
    pub directed_edges: usize,
    pub triangulation_edges: usize,
    pub requested_density_pct: f64,
    /// Share of triangulation edges that survived thinning and cleaning.
    pub realized_density_pct: f64,
    pub attempts: u64,
}

pub fn generate(spec: &NetGenSpec) -> Result<(RoadGraph, GenerationSummary), NetGenError> {
    generate_with(spec, &EnhanceOptions::default())
}

/// Full pipeline: sample, triangulate, thin, expand to two-way edges, keep the
/// largest weakly connected component and enhance.
pub fn generate_with(spec: &NetGenSpec, opts: &EnhanceOptions) -> Result<(RoadGraph, GenerationSummary), NetGenError> {
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(attempt);
        let points = sample_nodes(spec, &mut rng);
        let planar: Vec<Point2<f64>> =
            points.iter().map(|p| Point2::new(p.lon() * METERS_PER_DEGREE, p.lat() * METERS_PER_DEGREE)).collect();
        let tri = match delaunay(&planar) {
            Ok(t) => t,
            Err(NetGenError::DegenerateInput(_)) => continue,
            Err(e) => return Err(e),
        };
        let roads = thin_edges(&tri, spec.density_pct, &mut rng);

        let mut g = RoadGraph::new();
        for p in &points {
            g.add_node(*p);
        }
        for &(a, b) in &roads {
            let (a, b) = (NodeId(a as u32), NodeId(b as u32));
            g.add_edge(a, b, None)?;
            g.add_edge(b, a, None)?;
        }
        let g = geo::largest_wcc(&g)?;
        let g = geo::enhance(g, opts)?;
        let summary = GenerationSummary {
            nodes: g.node_count(),
            directed_edges: g.edge_count(),
            triangulation_edges: tri.edges.len(),
            requested_density_pct: spec.density_pct,
            realized_density_pct: 100.0 * (g.edge_count() / 2) as f64 / tri.edges.len() as f64,
            attempts: attempt + 1,
        };
        return Ok((g, summary));
    }
    Err(NetGenError::GenerationFailed(MAX_ATTEMPTS))
}

/// A straight two-way road along the equator made of `segments` equally long
/// edges, fully enhanced.
pub fn straight_road(segments: usize, segment_m: f64, opts: &EnhanceOptions) -> Result<RoadGraph, NetGenError> {
    if segments == 0 || !(segment_m > 0.0) {
        return Err(NetGenError::InvalidSpec("a straight road needs at least one positive segment".into()));
    }
    let step_deg = (segment_m / EARTH_RADIUS_M).to_degrees();
    let mut g = RoadGraph::new();
    for i in 0..=segments {
        g.add_node(GeoPoint::new(0.0, i as f64 * step_deg)?);
    }
    for i in 0..segments as u32 {
        g.add_edge(NodeId(i), NodeId(i + 1), None)?;
        g.add_edge(NodeId(i + 1), NodeId(i), None)?;
    }
    Ok(geo::enhance(g, opts)?)
}
