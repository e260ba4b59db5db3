use serde::{Deserialize, Serialize};

use crate::geo::planar::Point2;
use crate::geo::GraphError;
use crate::scalar::Scalar;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// A WGS84-style latitude/longitude pair in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GraphError> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(GraphError::InvalidCoordinate { lat, lon });
        }
        Ok(Self { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

/// Great-circle distance between two points given in degrees, computed with
/// the haversine formula on a sphere of radius [`EARTH_RADIUS_M`].
pub fn haversine<T: Scalar>(lat1: T, lon1: T, lat2: T, lon2: T) -> T {
    let half = T::lit(0.5);
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let s_phi = (dphi * half).sin();
    let s_lambda = (dlambda * half).sin();
    let h = s_phi * s_phi + phi1.cos() * phi2.cos() * s_lambda * s_lambda;
    // h can exceed 1 by rounding for antipodal points.
    T::lit(2.0 * EARTH_RADIUS_M) * h.sqrt().min(T::one()).asin()
}

pub fn haversine_gcd(a: GeoPoint, b: GeoPoint) -> f64 {
    haversine(a.lat, a.lon, b.lat, b.lon)
}

/// Initial bearing from `a` to `b` in degrees clockwise from north, in `[0, 360)`.
pub fn initial_bearing_deg(a: GeoPoint, b: GeoPoint) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dl = (b.lon - a.lon).to_radians();
    let y = dl.sin() * phi2.cos();
    let x = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dl.cos();
    let deg = y.atan2(x).to_degrees();
    (deg + 360.0) % 360.0
}

/// Equirectangular projection of `p` into a tangent plane centered on
/// `origin`; `x` points east and `y` north, both in meters.
pub fn project_local(origin: GeoPoint, p: GeoPoint) -> Point2<f64> {
    let mut dlon = p.lon - origin.lon;
    if dlon > 180.0 {
        dlon -= 360.0;
    } else if dlon < -180.0 {
        dlon += 360.0;
    }
    Point2::new(
        EARTH_RADIUS_M * dlon.to_radians() * origin.lat.to_radians().cos(),
        EARTH_RADIUS_M * (p.lat - origin.lat).to_radians(),
    )
}

/// Linear interpolation in coordinate space; adequate along a single road edge.
pub fn lerp(a: GeoPoint, b: GeoPoint, t: f64) -> GeoPoint {
    GeoPoint { lat: a.lat + (b.lat - a.lat) * t, lon: a.lon + (b.lon - a.lon) * t }
}
