use rand_chacha::ChaCha8Rng;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::rng::init_vec;

/// Additive attention: score weight `[h_dim, a_dim]` and score vector
/// `[a_dim, 1]`.
#[derive(Clone)]
pub struct AttentionParams {
    pub w: Tensor,
    pub v: Tensor,
}

impl AttentionParams {
    pub fn init(h_dim: usize, a_dim: usize, rng: &mut ChaCha8Rng) -> AttentionParams {
        assert!(a_dim > 0);
        AttentionParams {
            w: Tensor::param(vec![h_dim, a_dim], init_vec(rng, h_dim * a_dim)).unwrap(),
            v: Tensor::param(vec![a_dim, 1], init_vec(rng, a_dim)).unwrap(),
        }
    }
}

/// Additive scores `e_t = v^T tanh(W^T h_t)` over the rows of `hs` `[T, h]`,
/// softmax-normalised into weights; the context is the weighted combination
/// of the rows. Returns `(context [1, h], weights [1, T])`.
pub fn attention_forward(params: &AttentionParams, hs: &Tensor) -> Result<(Tensor, Tensor)> {
    if hs.rank() != 2 || hs.shape()[0] == 0 {
        return Err(Error::Invalid(format!(
            "attention expects a non-empty [T, h] matrix, got {:?}",
            hs.shape()
        )));
    }
    let scores = hs.matmul(&params.w)?.tanh()?.matmul(&params.v)?; // [T, 1]
    let weights = scores.transpose()?.softmax()?; // [1, T]
    let context = weights.matmul(hs)?; // [1, h]
    Ok((context, weights))
}
