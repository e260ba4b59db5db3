//! Fully connected networks with hand-written backpropagation.
//!
//! All parameters live in one flat vector, layer after layer, each layer as
//! its weight matrix (`outputs x inputs`, row-major) followed by its bias.
//! Activations are processed a whole batch at a time, one sample per row.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::LearnerError;
use crate::scalar::Scalar;

pub const LEAKY_SLOPE: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    LeakyRelu,
    Tanh,
    Linear,
}

impl Activation {
    #[inline]
    fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::LeakyRelu => {
                if z >= T::zero() {
                    z
                } else {
                    T::lit(LEAKY_SLOPE) * z
                }
            }
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output<T: Scalar>(self, y: T) -> T {
        match self {
            // The slope is positive, so the output has the sign of the input.
            Activation::LeakyRelu => {
                if y >= T::zero() {
                    T::one()
                } else {
                    T::lit(LEAKY_SLOPE)
                }
            }
            Activation::Tanh => T::one() - y * y,
            Activation::Linear => T::one(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
    params: Vec<T>,
    version: u64,
}

/// Layer activations kept by a forward pass for the matching backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    version: u64,
    batch: usize,
    /// `acts[0]` is the input, `acts[l + 1]` the output of layer `l`.
    acts: Vec<Vec<T>>,
}

impl<T> ForwardCache<T> {
    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn output(&self) -> &[T] {
        self.acts.last().expect("cache holds the input")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    /// Same layout as [`Mlp::params`].
    pub params: Vec<T>,
    /// Gradient with respect to the input batch.
    pub input: Vec<T>,
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl<T: Scalar> Mlp<T> {
    /// Network with every parameter zero.
    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Result<Self, LearnerError> {
        if sizes.len() < 2 || sizes.contains(&0) || activations.len() != sizes.len() - 1 {
            return Err(LearnerError::Shape(format!(
                "{} layer sizes with {} activations",
                sizes.len(),
                activations.len()
            )));
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            activations: activations.to_vec(),
            params: vec![T::zero(); param_count(sizes)],
            version: 0,
        })
    }

    /// Weights drawn from `N(0, init_std²)`, biases zero.
    pub fn random<R: Rng + ?Sized>(
        sizes: &[usize],
        activations: &[Activation],
        init_std: f64,
        rng: &mut R,
    ) -> Result<Self, LearnerError> {
        let mut net = Self::zeros(sizes, activations)?;
        let normal = Normal::new(0.0, init_std).map_err(|e| LearnerError::Shape(e.to_string()))?;
        let mut off = 0;
        for w in sizes.windows(2) {
            let n_w = w[0] * w[1];
            for p in &mut net.params[off..off + n_w] {
                *p = T::lit(normal.sample(rng));
            }
            off += n_w + w[1];
        }
        Ok(net)
    }

    pub fn from_params(sizes: &[usize], activations: &[Activation], params: Vec<T>) -> Result<Self, LearnerError> {
        let mut net = Self::zeros(sizes, activations)?;
        if params.len() != net.params.len() {
            return Err(LearnerError::Shape(format!("expected {} parameters, got {}", net.params.len(), params.len())));
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    /// Layer configuration such as `2-400-300-200-1`.
    pub fn layer_config(&self) -> String {
        self.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("-")
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    /// Mutable access to the parameters. Invalidates outstanding caches.
    pub fn params_mut(&mut self) -> &mut [T] {
        self.version += 1;
        &mut self.params
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.sizes == other.sizes && self.activations == other.activations
    }

    /// Weight matrix and bias of layer `l`.
    pub fn layer(&self, l: usize) -> (&[T], &[T]) {
        let off = param_count(&self.sizes[..=l]);
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let w = &self.params[off..off + n_in * n_out];
        (w, &self.params[off + n_in * n_out..off + n_in * n_out + n_out])
    }

    /// Forward pass over `batch` samples stored row by row in `x`.
    pub fn forward(&self, x: &[T], batch: usize) -> Result<ForwardCache<T>, LearnerError> {
        if x.len() != batch * self.input_size() {
            return Err(LearnerError::Shape(format!(
                "input of length {} for batch {batch} x {}",
                x.len(),
                self.input_size()
            )));
        }
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(x.to_vec());
        for (l, &act) in self.activations.iter().enumerate() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let (w, b) = self.layer(l);
            let mut z = Vec::with_capacity(batch * n_out);
            for _ in 0..batch {
                z.extend_from_slice(b);
            }
            // Z = X Wᵀ + b
            T::gemm(
                batch,
                n_in,
                n_out,
                T::one(),
                &acts[l],
                n_in as isize,
                1,
                w,
                1,
                n_in as isize,
                T::one(),
                &mut z,
                n_out as isize,
                1,
            );
            for v in &mut z {
                *v = act.apply(*v);
            }
            acts.push(z);
        }
        Ok(ForwardCache { version: self.version, batch, acts })
    }

    /// Output for a single sample.
    pub fn predict(&self, x: &[T]) -> Result<Vec<T>, LearnerError> {
        Ok(self.forward(x, 1)?.acts.pop().expect("cache holds the output"))
    }

    /// Reverse-mode gradients of a loss whose gradient with respect to the
    /// network output is `dy`.
    pub fn backward(&self, cache: &ForwardCache<T>, dy: &[T]) -> Result<Gradients<T>, LearnerError> {
        self.backprop(cache, dy, true)
    }

    /// Like [`Mlp::backward`] but only the input gradient is computed.
    pub fn input_gradient(&self, cache: &ForwardCache<T>, dy: &[T]) -> Result<Vec<T>, LearnerError> {
        Ok(self.backprop(cache, dy, false)?.input)
    }

    fn backprop(&self, cache: &ForwardCache<T>, dy: &[T], want_params: bool) -> Result<Gradients<T>, LearnerError> {
        if cache.version != self.version || cache.acts.len() != self.sizes.len() {
            return Err(LearnerError::StaleCache);
        }
        let batch = cache.batch;
        if dy.len() != batch * self.output_size() {
            return Err(LearnerError::Shape(format!("output gradient of length {}", dy.len())));
        }
        let mut grads = if want_params { vec![T::zero(); self.params.len()] } else { Vec::new() };
        let mut delta = dy.to_vec();
        for l in (0..self.activations.len()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let act = self.activations[l];
            for (d, &y) in delta.iter_mut().zip(&cache.acts[l + 1]) {
                *d *= act.derivative_from_output(y);
            }
            if want_params {
                let off = param_count(&self.sizes[..=l]);
                let (gw, gb) = grads[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
                // dW = δᵀ X
                T::gemm(
                    n_out,
                    batch,
                    n_in,
                    T::one(),
                    &delta,
                    1,
                    n_out as isize,
                    &cache.acts[l],
                    n_in as isize,
                    1,
                    T::zero(),
                    gw,
                    n_in as isize,
                    1,
                );
                for row in delta.chunks_exact(n_out) {
                    for (g, &d) in gb.iter_mut().zip(row) {
                        *g += d;
                    }
                }
            }
            // dX = δ W
            let (w, _) = self.layer(l);
            let mut dx = vec![T::zero(); batch * n_in];
            T::gemm(
                batch,
                n_out,
                n_in,
                T::one(),
                &delta,
                n_out as isize,
                1,
                w,
                n_in as isize,
                1,
                T::zero(),
                &mut dx,
                n_in as isize,
                1,
            );
            delta = dx;
        }
        Ok(Gradients { params: grads, input: delta })
    }
}

/// `target <- rate * live + (1 - rate) * target`, elementwise.
pub fn soft_update<T: Scalar>(target: &mut Mlp<T>, live: &Mlp<T>, rate: T) -> Result<(), LearnerError> {
    if !target.same_shape(live) {
        return Err(LearnerError::Shape(format!("{} vs {}", target.layer_config(), live.layer_config())));
    }
    let keep = T::one() - rate;
    for (t, &p) in target.params_mut().iter_mut().zip(&live.params) {
        *t = rate * p + keep * *t;
    }
    Ok(())
}
