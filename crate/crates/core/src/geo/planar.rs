use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Triangles with an area below this many square meters count as straight.
pub const COLLINEAR_AREA_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("two of the three points coincide")]
    DegenerateTriple,
}

/// Result of fitting a circle through three points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircleFit<T> {
    Finite {
        center: Point2<T>,
        radius: T,
    },
    /// The points are collinear; the "circle" has infinite radius.
    Straight,
}

impl<T: Scalar> CircleFit<T> {
    pub fn radius(&self) -> T {
        match self {
            CircleFit::Finite { radius, .. } => *radius,
            CircleFit::Straight => T::infinity(),
        }
    }
}

/// Twice the signed area of the triangle `(a, b, c)`; positive when
/// counter-clockwise.
pub fn orient2d<T: Scalar>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> T {
    (b - a).cross(c - a)
}

/// The unique circle through three points.
pub fn circle_through<T: Scalar>(p1: Point2<T>, p2: Point2<T>, p3: Point2<T>) -> Result<CircleFit<T>, GeometryError> {
    if p1 == p2 || p2 == p3 || p1 == p3 {
        return Err(GeometryError::DegenerateTriple);
    }
    // Work relative to p1 to limit cancellation.
    let b = p2 - p1;
    let c = p3 - p1;
    let d = b.cross(c);
    if (d * T::lit(0.5)).abs() < T::lit(COLLINEAR_AREA_TOL) {
        return Ok(CircleFit::Straight);
    }
    let two = T::lit(2.0);
    let bb = b.dot(b);
    let cc = c.dot(c);
    let ux = (c.y * bb - b.y * cc) / (two * d);
    let uy = (b.x * cc - c.x * bb) / (two * d);
    let rel = Point2::new(ux, uy);
    Ok(CircleFit::Finite { center: p1 + rel, radius: rel.norm() })
}
