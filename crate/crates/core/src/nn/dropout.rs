use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::Tensor;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Dropout configuration: drop rate, mode, and the seed the mask stream is
/// derived from. Inverted scaling (survivors multiplied by `1/(1-p)` at train
/// time) makes evaluation an exact identity.
#[derive(Debug, Clone, Copy)]
pub struct DropoutConfig {
    pub rate: f64,
    pub mode: Mode,
    pub seed: u64,
}

impl DropoutConfig {
    pub fn new(rate: f64, mode: Mode, seed: u64) -> DropoutConfig {
        assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0, 1)");
        DropoutConfig { rate, mode, seed }
    }

    pub fn stream(&self) -> ChaCha8Rng {
        crate::rng::seeded(self.seed)
    }
}

/// Apply inverted dropout drawing the mask from `rng`. Eval mode and rate 0
/// return the input unchanged (bit-exact, no draws consumed).
pub fn dropout_apply(x: &Tensor, rate: f64, mode: Mode, rng: &mut ChaCha8Rng) -> Result<Tensor> {
    assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0, 1)");
    if mode == Mode::Eval || rate == 0.0 {
        return Ok(x.clone());
    }
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    let mask: Vec<f64> = (0..x.len())
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { scale })
        .collect();
    let mask = Tensor::new(x.shape().to_vec(), mask)?;
    x.mul(&mask)
}
