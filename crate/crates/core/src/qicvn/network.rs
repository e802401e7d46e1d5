use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::nn::LinearLayer;

use super::density::mixture_parts;
use super::embed::{feature_state, ComplexEmbeddingParams, ComplexState};
use super::measure::{measure, MeasurementSet};

/// How features are grouped into local mixtures. The default single window
/// spans every feature; `Sliding` produces stride-1 n-gram windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowSpec {
    Full,
    Sliding { size: usize },
}

impl WindowSpec {
    pub fn windows(&self, features: usize) -> Result<Vec<(usize, usize)>> {
        match *self {
            WindowSpec::Full => Ok(vec![(0, features)]),
            WindowSpec::Sliding { size } => {
                if size == 0 || size > features {
                    return Err(Error::Config(format!(
                        "window size {size} invalid for {features} features"
                    )));
                }
                Ok((0..=features - size).map(|lo| (lo, lo + size)).collect())
            }
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, WindowSpec::Full)
    }
}

impl std::fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WindowSpec::Full => write!(f, "full"),
            WindowSpec::Sliding { size } => write!(f, "sliding:{size}"),
        }
    }
}

impl std::str::FromStr for WindowSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<WindowSpec> {
        if s == "full" {
            return Ok(WindowSpec::Full);
        }
        if let Some(size) = s.strip_prefix("sliding:") {
            let size: usize = size
                .parse()
                .map_err(|_| Error::Config(format!("bad window size in `{s}`")))?;
            return Ok(WindowSpec::Sliding { size });
        }
        Err(Error::Config(format!(
            "unknown window spec `{s}` (expected `full` or `sliding:N`)"
        )))
    }
}

/// All trainable state of the complex-valued classifier.
#[derive(Clone)]
pub struct QicvnParams {
    pub embeddings: ComplexEmbeddingParams,
    pub measurements: MeasurementSet,
    pub head: LinearLayer,
    pub window: WindowSpec,
}

impl QicvnParams {
    pub fn init(
        features: usize,
        dim: usize,
        measurements: usize,
        classes: usize,
        window: WindowSpec,
        rng: &mut ChaCha8Rng,
    ) -> QicvnParams {
        QicvnParams {
            embeddings: ComplexEmbeddingParams::init(features, dim, rng),
            measurements: MeasurementSet::init(measurements, dim, rng),
            head: LinearLayer::init(measurements, classes, rng),
            window,
        }
    }

    pub fn named_params(&self) -> Vec<(String, Tensor)> {
        let mut out = Vec::new();
        for (i, e) in self.embeddings.per_feature.iter().enumerate() {
            out.push((format!("embed.{i}.amp_w"), e.amp_w.clone()));
            out.push((format!("embed.{i}.amp_b"), e.amp_b.clone()));
            out.push((format!("embed.{i}.phase_w"), e.phase_w.clone()));
            out.push((format!("embed.{i}.phase_b"), e.phase_b.clone()));
        }
        for (k, (vr, vi)) in self.measurements.vectors.iter().enumerate() {
            out.push((format!("measure.{k}.re"), vr.clone()));
            out.push((format!("measure.{k}.im"), vi.clone()));
        }
        out.push(("head.weight".into(), self.head.weight.clone()));
        out.push(("head.bias".into(), self.head.bias.clone()));
        out
    }
}

/// Side channel of a forward pass: per-feature softmax weights when the
/// window covers all features (the importance vector the interpretability
/// report consumes) and the degenerate-amplitude counter.
#[derive(Debug, Clone, Default)]
pub struct QicvnDiagnostics {
    pub feature_weights: Option<Vec<f64>>,
    pub degenerate_states: u64,
}

/// Forward output: logits and their softmax, shape `[1, classes]` each.
pub struct QicvnOutput {
    pub logits: Tensor,
    pub probs: Tensor,
    pub diagnostics: QicvnDiagnostics,
}

/// Per-window pipeline (embed, normalise, mix, measure), max-pool across
/// windows per measurement dimension, then the linear softmax head.
pub fn qicvn_forward(params: &QicvnParams, features: &[f64]) -> Result<QicvnOutput> {
    let count = params.embeddings.features();
    if features.len() != count {
        return Err(Error::Invalid(format!(
            "expected {count} features, got {}",
            features.len()
        )));
    }
    let windows = params.window.windows(count)?;

    let states: Vec<ComplexState> = (0..count)
        .map(|i| feature_state(&params.embeddings, i, features[i]))
        .collect::<Result<_>>()?;
    let degenerate_states = states.iter().filter(|s| s.degenerate).count() as u64;

    let mut rows = Vec::with_capacity(windows.len());
    let mut feature_weights = None;
    for &(lo, hi) in &windows {
        let (rho, p) = mixture_parts(&states[lo..hi])?;
        if windows.len() == 1 {
            feature_weights = Some(p.to_vec());
        }
        rows.push(measure(&rho, &params.measurements)?);
    }
    let stacked = Tensor::concat(0, &rows)?; // [windows, K]
    let pooled = stacked.max_pool(0)?; // [1, K]
    let logits = params.head.forward(&pooled)?; // [1, classes]
    let probs = logits.softmax()?;
    Ok(QicvnOutput {
        logits,
        probs,
        diagnostics: QicvnDiagnostics {
            feature_weights,
            degenerate_states,
        },
    })
}
