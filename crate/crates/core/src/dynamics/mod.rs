//! Longitudinal vehicle physics and the on-board sensor suite.
//!
//! The motion state is the pair `(p_t, p_{t-1})` of arc positions along the
//! vehicle's path. Each tick applies the affine update `z' = A z + B a` where
//! `(A, B)` is the acceleration model for `a >= 0` and the braking model for
//! `a < 0`. Both models share the friction matrix
//!
//! ```text
//! A = [ (ηT + 2m)/(ηT + m)   -m/(ηT + m) ]
//!     [          1                0      ]
//! ```
//!
//! and differ only in the gain on the action: `F_max T² / (ηT + m)` when
//! accelerating and `T² ĝ0 κ τ m / (ηT + m)` when braking.

mod route;
mod sensors;

use thiserror::Error;

use crate::scalar::Scalar;

pub use route::{Junction, Route, RouteError};
pub use sensors::{read_sensors, SensorReading, VehicleView, DEFAULT_HORIZON};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DynamicsError {
    #[error("non-finite value in motion update")]
    NumericFault,
    #[error("invalid vehicle property `{0}`")]
    InvalidProperty(&'static str),
    #[error("invalid physical constant `{0}`")]
    InvalidConstant(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct VehicleProps<T> {
    /// Mass in kg.
    pub mass: T,
    /// Maximum accelerating force in N.
    pub f_max: T,
    /// Friction coefficient.
    pub eta: T,
    /// Brake correction factor.
    pub tau: T,
    /// Bumper-to-bumper length in m.
    pub length: T,
}

impl<T: Scalar> VehicleProps<T> {
    pub fn new(mass: T, f_max: T, eta: T, tau: T, length: T) -> Result<Self, DynamicsError> {
        let p = VehicleProps { mass, f_max, eta, tau, length };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let pos = |x: T| x.is_finite() && x > T::zero();
        if !pos(self.mass) {
            return Err(DynamicsError::InvalidProperty("mass"));
        }
        if !pos(self.f_max) {
            return Err(DynamicsError::InvalidProperty("f_max"));
        }
        if !(self.eta.is_finite() && self.eta >= T::zero()) {
            return Err(DynamicsError::InvalidProperty("eta"));
        }
        if !pos(self.tau) {
            return Err(DynamicsError::InvalidProperty("tau"));
        }
        if !pos(self.length) {
            return Err(DynamicsError::InvalidProperty("length"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Scalar + serde::Deserialize<'de>"))]
pub struct PhysConstants<T> {
    /// Sampling period in s.
    pub dt: T,
    pub g0_hat: T,
    /// Static friction coefficient.
    pub kappa: T,
}

impl<T: Scalar> Default for PhysConstants<T> {
    fn default() -> Self {
        PhysConstants { dt: T::lit(0.1), g0_hat: T::lit(9.81), kappa: T::lit(0.8) }
    }
}

impl<T: Scalar> PhysConstants<T> {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let pos = |x: T| x.is_finite() && x > T::zero();
        if !pos(self.dt) {
            return Err(DynamicsError::InvalidConstant("dt"));
        }
        if !pos(self.g0_hat) {
            return Err(DynamicsError::InvalidConstant("g0_hat"));
        }
        if !pos(self.kappa) {
            return Err(DynamicsError::InvalidConstant("kappa"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MotionState<T> {
    pub p: T,
    pub p_prev: T,
}

impl<T: Scalar> MotionState<T> {
    pub fn at_rest(p: T) -> Self {
        MotionState { p, p_prev: p }
    }

    /// Distance covered during the last tick.
    pub fn delta(&self) -> T {
        self.p - self.p_prev
    }

    /// Same velocity, shifted along the arc (used when a new path starts).
    pub fn shifted(&self, by: T) -> Self {
        MotionState { p: self.p + by, p_prev: self.p_prev + by }
    }
}

/// Throttle/brake command in `[-1, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Action<T>(T);

impl<T: Scalar> Action<T> {
    /// Clamps into `[-1, 1]`; NaN maps to 0.
    pub fn new(a: T) -> Self {
        if a.is_nan() {
            return Action(T::zero());
        }
        Action(a.max(-T::one()).min(T::one()))
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn is_braking(self) -> bool {
        self.0 < T::zero()
    }
}

/// Velocity retained over one coasting tick, `m / (m + ηT)`.
pub fn coast_factor<T: Scalar>(props: &VehicleProps<T>, k: &PhysConstants<T>) -> T {
    props.mass / (props.mass + props.eta * k.dt)
}

/// Position gain per unit action for the model selected by `braking`.
pub fn action_gain<T: Scalar>(props: &VehicleProps<T>, k: &PhysConstants<T>, braking: bool) -> T {
    let denom = props.eta * k.dt + props.mass;
    let t2 = k.dt * k.dt;
    if braking {
        t2 * k.g0_hat * k.kappa * props.tau * props.mass / denom
    } else {
        props.f_max * t2 / denom
    }
}

/// One tick of the longitudinal model. The vehicle may stop but never roll
/// backwards: a step that would reduce the position ends at rest instead.
pub fn step_motion<T: Scalar>(
    s: MotionState<T>,
    a: Action<T>,
    props: &VehicleProps<T>,
    k: &PhysConstants<T>,
) -> Result<MotionState<T>, DynamicsError> {
    if !(s.p.is_finite() && s.p_prev.is_finite()) {
        return Err(DynamicsError::NumericFault);
    }
    // Written in velocity form so that rest is an exact fixed point.
    let gain = action_gain(props, k, a.is_braking());
    let next = s.p + coast_factor(props, k) * (s.p - s.p_prev) + gain * a.value();
    if !next.is_finite() {
        return Err(DynamicsError::NumericFault);
    }
    if next < s.p {
        return Ok(MotionState::at_rest(s.p));
    }
    Ok(MotionState { p: next, p_prev: s.p })
}

pub fn velocity<T: Scalar>(s: &MotionState<T>, k: &PhysConstants<T>) -> T {
    s.delta() / k.dt
}

pub fn accel_long<T: Scalar>(prev_v: T, v: T, k: &PhysConstants<T>) -> T {
    (v - prev_v) / k.dt
}

/// Lateral acceleration `v² / r`; zero on straights.
pub fn accel_lat<T: Scalar>(v: T, radius: T) -> T {
    if radius.is_infinite() || v == T::zero() {
        T::zero()
    } else {
        v * v / radius
    }
}
