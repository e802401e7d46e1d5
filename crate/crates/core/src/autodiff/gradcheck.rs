use crate::error::{Error, Result};
use super::tensor::Tensor;

pub const DEFAULT_STEP: f64 = 1e-5;
pub const DEFAULT_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct GradCheckEntry {
    pub param: usize,
    pub max_rel_err: f64,
    /// Flat index of the worst element.
    pub worst_index: usize,
    /// Elements whose relative error exceeded the tolerance.
    pub flagged: usize,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub tol: f64,
    pub entries: Vec<GradCheckEntry>,
}

impl GradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_rel_err)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.flagged == 0)
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Compare reverse-mode gradients of a deterministic scalar-valued graph
/// builder against central finite differences `(f(p+h) - f(p-h)) / 2h`,
/// element by element over every parameter.
pub fn grad_check<F>(f: F, params: &[Tensor], h: f64, tol: f64) -> Result<GradCheckReport>
where
    F: Fn(&[Tensor]) -> Result<Tensor>,
{
    assert!(h > 0.0, "finite-difference step must be positive");
    let eval = |params: &[Tensor]| -> Result<f64> {
        let loss = f(params)?;
        if loss.len() != 1 {
            return Err(Error::NonScalarLoss(loss.shape().to_vec()));
        }
        Ok(loss.item())
    };

    let first = eval(params)?;
    let second = eval(params)?;
    if first.to_bits() != second.to_bits() {
        return Err(Error::NonDeterministic(first, second));
    }

    for p in params {
        p.zero_grad();
    }
    f(params)?.backward()?;
    let autodiff: Vec<Vec<f64>> = params
        .iter()
        .map(|p| p.grad().unwrap_or_else(|| vec![0.0; p.len()]))
        .collect();

    let mut entries = Vec::with_capacity(params.len());
    for (pi, p) in params.iter().enumerate() {
        let base = p.to_vec();
        let mut entry = GradCheckEntry {
            param: pi,
            max_rel_err: 0.0,
            worst_index: 0,
            flagged: 0,
        };
        for i in 0..base.len() {
            let mut probe = base.clone();
            probe[i] = base[i] + h;
            p.set_data(&probe)?;
            let up = eval(params)?;
            probe[i] = base[i] - h;
            p.set_data(&probe)?;
            let down = eval(params)?;
            p.set_data(&base)?;

            let numeric = (up - down) / (2.0 * h);
            let err = relative_error(autodiff[pi][i], numeric);
            if err > entry.max_rel_err {
                entry.max_rel_err = err;
                entry.worst_index = i;
            }
            if err > tol {
                entry.flagged += 1;
            }
        }
        entries.push(entry);
    }
    Ok(GradCheckReport { tol, entries })
}
