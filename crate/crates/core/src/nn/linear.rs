use rand_chacha::ChaCha8Rng;

use crate::autodiff::Tensor;
use crate::error::Result;
use crate::rng;

/// Affine map `x @ weight + bias` with weight `[in, out]`, bias `[out]`.
#[derive(Clone)]
pub struct LinearLayer {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl LinearLayer {
    pub fn init(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> LinearLayer {
        LinearLayer {
            weight: Tensor::param(vec![in_dim, out_dim], rng::init_vec(rng, in_dim * out_dim))
                .expect("consistent dims"),
            bias: Tensor::param(vec![out_dim], rng::init_vec(rng, out_dim)).expect("consistent dims"),
        }
    }

    pub fn from_parts(weight: Tensor, bias: Tensor) -> LinearLayer {
        LinearLayer { weight, bias }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn out_dim(&self) -> usize {
        self.weight.shape()[1]
    }

    /// Accepts `[batch, in]` (bias broadcast per row) or `[in]`.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let y = x.matmul(&self.weight)?;
        if y.rank() == 2 {
            y.broadcast_add(&self.bias)
        } else {
            y.add(&self.bias)
        }
    }

    pub fn params(&self) -> Vec<(&'static str, Tensor)> {
        vec![("weight", self.weight.clone()), ("bias", self.bias.clone())]
    }
}
