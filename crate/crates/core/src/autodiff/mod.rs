//! Reverse-mode automatic differentiation over dense f64 tensors.
//!
//! The engine is define-by-run: applying a primitive to tensors records the
//! operation, and [`Tensor::backward`] on a scalar loss replays the graph in
//! reverse. The primitive set is closed (see [`Primitive`]); there is no
//! broadcasting beyond the bias form and no implicit reshaping, so shape
//! errors surface at the call site rather than as silent misalignment.

mod backward;
mod gradcheck;
mod ops;
mod tensor;

pub use gradcheck::{grad_check, relative_error, GradCheckEntry, GradCheckReport, DEFAULT_STEP, DEFAULT_TOL};
pub use ops::{apply_primitive, Primitive};
pub use tensor::{Tensor, TensorJson};
