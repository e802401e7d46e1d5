use std::cell::{Cell, Ref, RefCell};
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use super::ops::Primitive;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// One recorded operation: the primitive that produced a tensor and the
/// tensors it consumed. Present only on non-leaf tensors.
pub(crate) struct OpNode {
    pub primitive: Primitive,
    pub inputs: Vec<Tensor>,
}

pub struct TensorInner {
    id: u64,
    shape: Vec<usize>,
    data: RefCell<Vec<f64>>,
    requires_grad: Cell<bool>,
    grad: RefCell<Option<Vec<f64>>>,
    op: RefCell<Option<OpNode>>,
}

/// Dense row-major f64 tensor. Cloning is cheap and shares storage, so a
/// parameter held by a model and by the optimizer is the same object.
///
/// Tensors produced by primitives keep a reference to their inputs; calling
/// [`Tensor::backward`] on a scalar walks that graph in reverse and adds
/// d(loss)/d(tensor) into the `grad` slot of every tensor that requires it.
/// Gradients accumulate across backward calls until [`Tensor::zero_grad`].
#[derive(Clone)]
pub struct Tensor(pub(crate) Rc<TensorInner>);

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Tensor> {
        let expected: usize = shape.iter().product();
        if shape.iter().any(|&e| e == 0) || expected != data.len() {
            return Err(Error::ShapeData {
                expected,
                shape,
                len: data.len(),
            });
        }
        Ok(Self::make(shape, data, false, None))
    }

    /// Leaf with `requires_grad` set; the usual way to create a trainable
    /// parameter.
    pub fn param(shape: Vec<usize>, data: Vec<f64>) -> Result<Tensor> {
        let t = Tensor::new(shape, data)?;
        t.0.requires_grad.set(true);
        Ok(t)
    }

    pub fn scalar(value: f64) -> Tensor {
        Self::make(vec![1], vec![value], false, None)
    }

    pub fn zeros(shape: Vec<usize>) -> Tensor {
        let n = shape.iter().product();
        Self::make(shape, vec![0.0; n], false, None)
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Tensor {
        let n = shape.iter().product();
        Self::make(shape, vec![value; n], false, None)
    }

    pub(crate) fn make(
        shape: Vec<usize>,
        data: Vec<f64>,
        requires_grad: bool,
        op: Option<OpNode>,
    ) -> Tensor {
        Tensor(Rc::new(TensorInner {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            shape,
            data: RefCell::new(data),
            requires_grad: Cell::new(requires_grad),
            grad: RefCell::new(None),
            op: RefCell::new(op),
        }))
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn shape(&self) -> &[usize] {
        &self.0.shape
    }

    pub fn rank(&self) -> usize {
        self.0.shape.len()
    }

    pub fn len(&self) -> usize {
        self.0.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn data(&self) -> Ref<'_, Vec<f64>> {
        self.0.data.borrow()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.data.borrow().clone()
    }

    /// Value of a single-element tensor.
    pub fn item(&self) -> f64 {
        debug_assert_eq!(self.len(), 1, "item() on tensor of shape {:?}", self.shape());
        self.0.data.borrow()[0]
    }

    /// Overwrite the stored values in place (length must match). Used by
    /// optimizers and finite-difference probes; only sensible on leaves.
    pub fn set_data(&self, values: &[f64]) -> Result<()> {
        let mut d = self.0.data.borrow_mut();
        if values.len() != d.len() {
            return Err(Error::ShapeData {
                shape: self.0.shape.clone(),
                expected: d.len(),
                len: values.len(),
            });
        }
        d.copy_from_slice(values);
        Ok(())
    }

    pub fn requires_grad(&self) -> bool {
        self.0.requires_grad.get()
    }

    pub fn set_requires_grad(&self, value: bool) {
        self.0.requires_grad.set(value);
    }

    pub fn grad(&self) -> Option<Vec<f64>> {
        self.0.grad.borrow().clone()
    }

    pub fn zero_grad(&self) {
        *self.0.grad.borrow_mut() = None;
    }

    pub(crate) fn accumulate_grad(&self, contribution: &[f64]) {
        let mut slot = self.0.grad.borrow_mut();
        match slot.as_mut() {
            Some(g) => {
                for (gi, ci) in g.iter_mut().zip(contribution) {
                    *gi += ci;
                }
            }
            None => *slot = Some(contribution.to_vec()),
        }
    }

    /// New leaf holding a copy of this tensor's values, cut off from the
    /// graph. No gradient flows through it.
    pub fn detach(&self) -> Tensor {
        Self::make(self.0.shape.clone(), self.to_vec(), false, None)
    }

    pub fn is_leaf(&self) -> bool {
        self.0.op.borrow().is_none()
    }

    pub(crate) fn with_op<R>(&self, f: impl FnOnce(Option<&OpNode>) -> R) -> R {
        f(self.0.op.borrow().as_ref())
    }
}

impl std::fmt::Debug for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tensor")
            .field("id", &self.0.id)
            .field("shape", &self.0.shape)
            .field("data", &self.0.data.borrow())
            .field("requires_grad", &self.0.requires_grad.get())
            .finish()
    }
}

// Long op chains (one node per LSTM step, hundreds of steps) would otherwise
// unwind recursively through nested Rc drops and overflow the stack.
impl Drop for TensorInner {
    fn drop(&mut self) {
        let mut pending: Vec<Tensor> = Vec::new();
        if let Some(node) = self.op.get_mut().take() {
            pending.extend(node.inputs);
        }
        while let Some(t) = pending.pop() {
            if let Some(mut inner) = Rc::into_inner(t.0) {
                if let Some(node) = inner.op.get_mut().take() {
                    pending.extend(node.inputs);
                }
                // inner drops here with no op left, so no recursion
            }
        }
    }
}

/// Wire form of a tensor's values: `{"shape": [...], "data": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TensorJson {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl From<&Tensor> for TensorJson {
    fn from(t: &Tensor) -> Self {
        TensorJson {
            shape: t.shape().to_vec(),
            data: t.to_vec(),
        }
    }
}

impl TensorJson {
    pub fn into_tensor(self) -> Result<Tensor> {
        Tensor::new(self.shape, self.data)
    }

    pub fn into_param(self) -> Result<Tensor> {
        Tensor::param(self.shape, self.data)
    }
}
