use crate::autodiff::Tensor;
use crate::error::{Error, Result};

use super::embed::ComplexState;

/// Hermitian unit-trace mixture as paired real/imaginary `[d, d]` matrices
/// (real part symmetric, imaginary part antisymmetric).
#[derive(Clone)]
pub struct DensityMatrix {
    pub re: Tensor,
    pub im: Tensor,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.re.shape()[0]
    }

    /// (trace of the real part, trace of the imaginary part).
    pub fn trace(&self) -> (f64, f64) {
        let d = self.dim();
        let re = self.re.data();
        let im = self.im.data();
        let tr = |m: &[f64]| (0..d).map(|i| m[i * d + i]).sum::<f64>();
        (tr(&re), tr(&im))
    }

    /// Largest absolute deviation from Hermitian structure: symmetry of the
    /// real part, antisymmetry of the imaginary part.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let re = self.re.data();
        let im = self.im.data();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((re[i * d + j] - re[j * d + i]).abs());
                worst = worst.max((im[i * d + j] + im[j * d + i]).abs());
            }
        }
        worst
    }
}

/// Weighted mixture of pure-state projectors over one window. The mixing
/// distribution is the softmax of the states' relative weights; each
/// projector contributes `re re^T + im im^T` to the real part and
/// `im re^T - re im^T` to the imaginary part.
///
/// Returns the density matrix and the softmax weights `[n]`.
pub fn mixture_parts(states: &[ComplexState]) -> Result<(DensityMatrix, Tensor)> {
    if states.is_empty() {
        return Err(Error::Invalid("mixture over an empty window".into()));
    }
    let weights: Vec<Tensor> = states.iter().map(|s| s.weight.clone()).collect();
    let p = Tensor::concat(0, &weights)?.softmax()?;

    let mut rho_re: Option<Tensor> = None;
    let mut rho_im: Option<Tensor> = None;
    for (i, s) in states.iter().enumerate() {
        let p_i = p.slice(0, i, 1)?;
        let re_col = s.re.transpose()?;
        let im_col = s.im.transpose()?;
        let proj_re = re_col.matmul(&s.re)?.add(&im_col.matmul(&s.im)?)?;
        let proj_im = im_col.matmul(&s.re)?.sub(&re_col.matmul(&s.im)?)?;
        let term_re = proj_re.scalar_mul(&p_i)?;
        let term_im = proj_im.scalar_mul(&p_i)?;
        rho_re = Some(match rho_re {
            Some(acc) => acc.add(&term_re)?,
            None => term_re,
        });
        rho_im = Some(match rho_im {
            Some(acc) => acc.add(&term_im)?,
            None => term_im,
        });
    }
    Ok((
        DensityMatrix {
            re: rho_re.unwrap(),
            im: rho_im.unwrap(),
        },
        p,
    ))
}

/// The local mixture density matrix of one window.
pub fn mixture_density(states: &[ComplexState]) -> Result<DensityMatrix> {
    mixture_parts(states).map(|(rho, _)| rho)
}
