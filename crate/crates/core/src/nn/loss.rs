use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// Mean over the batch of `-log softmax(logits)[label]`.
///
/// Each row is reduced as `logsumexp(z - m) - (z[label] - m)` with `m` the
/// row maximum held as a constant; the shift cancels exactly, so the value
/// and gradient equal the unstabilised expression without its overflow.
pub fn cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<Tensor> {
    if logits.rank() != 2 {
        return Err(Error::Invalid(format!(
            "cross_entropy expects [batch, classes] logits, got {:?}",
            logits.shape()
        )));
    }
    let (batch, classes) = (logits.shape()[0], logits.shape()[1]);
    if labels.len() != batch {
        return Err(Error::Invalid(format!(
            "{} labels for a batch of {batch}",
            labels.len()
        )));
    }
    for &label in labels {
        if label >= classes {
            return Err(Error::LabelOutOfRange { label, classes });
        }
    }

    let mut terms = Vec::with_capacity(batch);
    for (i, &label) in labels.iter().enumerate() {
        let row = logits.slice(0, i, 1)?; // [1, C]
        let m = row.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let shifted = row.sub(&Tensor::filled(vec![1, classes], m))?;
        let lse = shifted.exp()?.sum()?.log()?;
        let picked = shifted.slice(1, label, 1)?.sum()?;
        terms.push(lse.sub(&picked)?);
    }
    Tensor::concat(0, &terms)?.mean()
}
