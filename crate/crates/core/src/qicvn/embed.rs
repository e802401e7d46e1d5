use rand_chacha::ChaCha8Rng;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::rng::init_vec;

/// Amplitude norms at or below this are treated as degenerate (ReLU can zero
/// an entire amplitude vector) and replaced by the first basis vector.
pub const AMP_NORM_EPS: f64 = 1e-8;

/// Per-feature affine maps from a scalar feature value to the amplitude and
/// phase vectors, each `[1, d]`.
#[derive(Clone)]
pub struct FeatureEmbedding {
    pub amp_w: Tensor,
    pub amp_b: Tensor,
    pub phase_w: Tensor,
    pub phase_b: Tensor,
}

impl FeatureEmbedding {
    pub fn init(dim: usize, rng: &mut ChaCha8Rng) -> FeatureEmbedding {
        FeatureEmbedding {
            amp_w: Tensor::param(vec![1, dim], init_vec(rng, dim)).unwrap(),
            amp_b: Tensor::param(vec![dim], init_vec(rng, dim)).unwrap(),
            phase_w: Tensor::param(vec![1, dim], init_vec(rng, dim)).unwrap(),
            phase_b: Tensor::param(vec![dim], init_vec(rng, dim)).unwrap(),
        }
    }
}

/// One embedding pair per feature slot.
#[derive(Clone)]
pub struct ComplexEmbeddingParams {
    pub per_feature: Vec<FeatureEmbedding>,
    pub dim: usize,
}

impl ComplexEmbeddingParams {
    pub fn init(features: usize, dim: usize, rng: &mut ChaCha8Rng) -> ComplexEmbeddingParams {
        assert!(dim >= 2, "embedding size must be at least 2");
        ComplexEmbeddingParams {
            per_feature: (0..features).map(|_| FeatureEmbedding::init(dim, rng)).collect(),
            dim,
        }
    }

    pub fn features(&self) -> usize {
        self.per_feature.len()
    }
}

/// A unit pure state as paired real/imaginary row vectors `[1, d]` plus its
/// pre-normalisation amplitude norm (the feature's relative weight).
#[derive(Clone)]
pub struct ComplexState {
    pub re: Tensor,
    pub im: Tensor,
    pub weight: Tensor,
    pub degenerate: bool,
}

impl ComplexState {
    /// `sum(re^2 + im^2)`, 1 for a well-formed state.
    pub fn norm_sq(&self) -> f64 {
        self.re
            .data()
            .iter()
            .chain(self.im.data().iter())
            .map(|v| v * v)
            .sum()
    }
}

/// Amplitude branch `relu(w x + b)` and phase branch
/// `pi * (2 sigmoid(w x + b) - 1)`, which keeps every phase entry strictly
/// inside `(-pi, pi)`.
pub fn embed_feature(
    params: &ComplexEmbeddingParams,
    index: usize,
    value: f64,
) -> Result<(Tensor, Tensor)> {
    let e = params.per_feature.get(index).ok_or_else(|| {
        Error::Invalid(format!(
            "feature index {index} outside schema of {} features",
            params.per_feature.len()
        ))
    })?;
    let x = Tensor::scalar(value);
    let amp = e.amp_w.scalar_mul(&x)?.broadcast_add(&e.amp_b)?.relu()?;
    let squashed = e.phase_w.scalar_mul(&x)?.broadcast_add(&e.phase_b)?.sigmoid()?;
    let centered = squashed
        .scalar_mul(&Tensor::scalar(2.0))?
        .sub(&Tensor::filled(vec![1, params.dim], 1.0))?;
    let phase = centered.scalar_mul(&Tensor::scalar(std::f64::consts::PI))?;
    Ok((amp, phase))
}

/// Divide the amplitude by its L2 norm. Returns the unit amplitude, the norm
/// (the state's relative weight, kept in the graph), and the degenerate flag:
/// a norm at or below [`AMP_NORM_EPS`] falls back to the first basis vector.
pub fn normalize_state(amp: &Tensor) -> Result<(Tensor, Tensor, bool)> {
    let w = amp.square()?.sum()?.sqrt()?;
    if w.item() <= AMP_NORM_EPS {
        let mut basis = vec![0.0; amp.len()];
        basis[0] = 1.0;
        let a = Tensor::new(amp.shape().to_vec(), basis)?;
        return Ok((a, w, true));
    }
    let a = amp.scalar_mul(&w.recip_positive()?)?;
    Ok((a, w, false))
}

/// Real and imaginary parts `a*cos(phase)` and `a*sin(phase)`.
pub fn to_complex(a: &Tensor, phase: &Tensor, weight: &Tensor, degenerate: bool) -> Result<ComplexState> {
    Ok(ComplexState {
        re: a.mul(&phase.cos()?)?,
        im: a.mul(&phase.sin()?)?,
        weight: weight.clone(),
        degenerate,
    })
}

/// Full per-feature pipeline: embed, normalise, rotate into the complex
/// plane.
pub fn feature_state(
    params: &ComplexEmbeddingParams,
    index: usize,
    value: f64,
) -> Result<ComplexState> {
    let (amp, phase) = embed_feature(params, index, value)?;
    let (a, w, degenerate) = normalize_state(&amp)?;
    to_complex(&a, &phase, &w, degenerate)
}
