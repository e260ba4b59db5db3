use super::LearnerError;
use crate::scalar::Scalar;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Bias-corrected Adam over a flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam<T> {
    pub lr: T,
    m: Vec<T>,
    v: Vec<T>,
    step: u64,
    beta1_t: T,
    beta2_t: T,
}

impl<T: Scalar> Adam<T> {
    pub fn new(n_params: usize, lr: T) -> Self {
        Adam {
            lr,
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
            step: 0,
            beta1_t: T::one(),
            beta2_t: T::one(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Descends along `grads`. Nothing is modified when a gradient is not
    /// finite.
    pub fn step(&mut self, params: &mut [T], grads: &[T]) -> Result<(), LearnerError> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(LearnerError::Shape(format!("{} moments for {} gradients", self.m.len(), grads.len())));
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(LearnerError::NumericFault);
        }
        let (b1, b2, eps) = (T::lit(BETA1), T::lit(BETA2), T::lit(EPSILON));
        self.step += 1;
        self.beta1_t *= b1;
        self.beta2_t *= b2;
        let c1 = T::one() - self.beta1_t;
        let c2 = T::one() - self.beta2_t;
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + (T::one() - b1) * g;
            self.v[i] = b2 * self.v[i] + (T::one() - b2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}
