use rand_chacha::ChaCha8Rng;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::rng::init_vec;

use super::density::DensityMatrix;

/// K trainable complex measurement vectors stored unconstrained as
/// `(re [1, d], im [1, d])` pairs; each is renormalised to unit norm inside
/// every forward pass.
#[derive(Clone)]
pub struct MeasurementSet {
    pub vectors: Vec<(Tensor, Tensor)>,
    pub dim: usize,
}

impl MeasurementSet {
    pub fn init(count: usize, dim: usize, rng: &mut ChaCha8Rng) -> MeasurementSet {
        MeasurementSet {
            vectors: (0..count)
                .map(|_| {
                    (
                        Tensor::param(vec![1, dim], init_vec(rng, dim)).unwrap(),
                        Tensor::param(vec![1, dim], init_vec(rng, dim)).unwrap(),
                    )
                })
                .collect(),
            dim,
        }
    }

    pub fn count(&self) -> usize {
        self.vectors.len()
    }
}

/// Projective readouts `<v_k| rho |v_k>` for every measurement vector,
/// computed with the unit-renormalised vectors. Output `[1, K]`; every entry
/// lies in `[0, 1]` for a well-formed density matrix.
pub fn measure(rho: &DensityMatrix, set: &MeasurementSet) -> Result<Tensor> {
    if rho.dim() != set.dim {
        return Err(Error::ShapeMismatch {
            primitive: "measure",
            lhs: rho.re.shape().to_vec(),
            rhs: vec![1, set.dim],
        });
    }
    let mut outs = Vec::with_capacity(set.vectors.len());
    for (vr, vi) in &set.vectors {
        let norm = vr
            .square()?
            .sum()?
            .add(&vi.square()?.sum()?)?
            .sqrt()?;
        let inv = norm.recip_positive()?;
        let vr_u = vr.scalar_mul(&inv)?;
        let vi_u = vi.scalar_mul(&inv)?;

        // v' rho v for v = vr + i vi and rho = R + iG reduces to
        // vr^T(R vr - G vi) + vi^T(G vr + R vi); the imaginary part cancels
        // for Hermitian rho.
        let a = rho.re.matmul(&vr_u.transpose()?)?.sub(&rho.im.matmul(&vi_u.transpose()?)?)?;
        let b = rho.im.matmul(&vr_u.transpose()?)?.add(&rho.re.matmul(&vi_u.transpose()?)?)?;
        let out = vr_u.matmul(&a)?.add(&vi_u.matmul(&b)?)?;
        debug_assert!(
            (-1e-9..=1.0 + 1e-9).contains(&out.item()),
            "measurement {} outside [0, 1]",
            out.item()
        );
        outs.push(out);
    }
    Tensor::concat(1, &outs)
}
