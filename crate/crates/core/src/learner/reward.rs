use crate::scalar::Scalar;

pub const REWARD_WIDTH: f64 = 2.5;

/// Gaussian bump around the speed limit: 0 at the limit, tending to -1 away
/// from it.
pub fn reward_speed_limit<T: Scalar>(v: T, v_max: T) -> T {
    let x = (v_max - v) / T::lit(REWARD_WIDTH);
    (T::lit(-0.5) * x * x).exp() - T::one()
}
