use rand_chacha::ChaCha8Rng;

use crate::autodiff::Tensor;
use crate::error::Result;

use super::dropout::{dropout_apply, Mode};
use super::linear::LinearLayer;

/// Two ReLU hidden layers and a linear output head.
#[derive(Clone)]
pub struct FfnnParams {
    pub hidden1: LinearLayer,
    pub hidden2: LinearLayer,
    pub output: LinearLayer,
}

impl FfnnParams {
    pub fn init(features: usize, hidden: usize, classes: usize, rng: &mut ChaCha8Rng) -> FfnnParams {
        FfnnParams {
            hidden1: LinearLayer::init(features, hidden, rng),
            hidden2: LinearLayer::init(hidden, hidden, rng),
            output: LinearLayer::init(hidden, classes, rng),
        }
    }
}

/// Logits for a batch `[batch, features]`. Dropout is applied to both hidden
/// activations in train mode and never to the output layer.
pub fn ffnn_forward(
    params: &FfnnParams,
    x: &Tensor,
    dropout_rate: f64,
    mode: Mode,
    rng: &mut ChaCha8Rng,
) -> Result<Tensor> {
    let h1 = params.hidden1.forward(x)?.relu()?;
    let h1 = dropout_apply(&h1, dropout_rate, mode, rng)?;
    let h2 = params.hidden2.forward(&h1)?.relu()?;
    let h2 = dropout_apply(&h2, dropout_rate, mode, rng)?;
    params.output.forward(&h2)
}
