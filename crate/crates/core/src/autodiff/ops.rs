use std::str::FromStr;

use crate::error::{Error, Result};
use super::tensor::{OpNode, Tensor};

/// The closed set of differentiable primitives. Every model in the crate is a
/// composition of these; each one has a shape rule checked in
/// [`apply_primitive`] and a backward rule in `backward.rs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primitive {
    Add,
    Subtract,
    Multiply,
    Matmul,
    ScalarMultiply,
    Negate,
    Relu,
    Sigmoid,
    Tanh,
    Exp,
    Log,
    Softmax,
    Sum,
    Mean,
    Concat { axis: usize },
    Slice { axis: usize, start: usize, len: usize },
    Transpose,
    MaxPool { axis: usize },
    Square,
    Sqrt,
    Cos,
    Sin,
    BroadcastAdd,
}

impl Primitive {
    pub fn name(&self) -> &'static str {
        match self {
            Primitive::Add => "add",
            Primitive::Subtract => "subtract",
            Primitive::Multiply => "elementwise-multiply",
            Primitive::Matmul => "matmul",
            Primitive::ScalarMultiply => "scalar-multiply",
            Primitive::Negate => "negate",
            Primitive::Relu => "relu",
            Primitive::Sigmoid => "sigmoid",
            Primitive::Tanh => "tanh",
            Primitive::Exp => "exp",
            Primitive::Log => "log",
            Primitive::Softmax => "softmax",
            Primitive::Sum => "sum",
            Primitive::Mean => "mean",
            Primitive::Concat { .. } => "concat",
            Primitive::Slice { .. } => "slice",
            Primitive::Transpose => "transpose",
            Primitive::MaxPool { .. } => "max-pool",
            Primitive::Sqrt => "sqrt",
            Primitive::Square => "square",
            Primitive::Cos => "cos",
            Primitive::Sin => "sin",
            Primitive::BroadcastAdd => "broadcast-add",
        }
    }
}

impl FromStr for Primitive {
    type Err = Error;

    /// Structural primitives parse with default attributes (axis 0).
    fn from_str(s: &str) -> Result<Primitive> {
        Ok(match s {
            "add" => Primitive::Add,
            "subtract" => Primitive::Subtract,
            "elementwise-multiply" => Primitive::Multiply,
            "matmul" => Primitive::Matmul,
            "scalar-multiply" => Primitive::ScalarMultiply,
            "negate" => Primitive::Negate,
            "relu" => Primitive::Relu,
            "sigmoid" => Primitive::Sigmoid,
            "tanh" => Primitive::Tanh,
            "exp" => Primitive::Exp,
            "log" => Primitive::Log,
            "softmax" => Primitive::Softmax,
            "sum" => Primitive::Sum,
            "mean" => Primitive::Mean,
            "concat" => Primitive::Concat { axis: 0 },
            "slice" => Primitive::Slice { axis: 0, start: 0, len: 1 },
            "transpose" => Primitive::Transpose,
            "max-pool" => Primitive::MaxPool { axis: 0 },
            "square" => Primitive::Square,
            "sqrt" => Primitive::Sqrt,
            "cos" => Primitive::Cos,
            "sin" => Primitive::Sin,
            "broadcast-add" => Primitive::BroadcastAdd,
            other => return Err(Error::UnknownPrimitive(other.to_string())),
        })
    }
}

fn shape_err(p: &Primitive, lhs: &[usize], rhs: &[usize]) -> Error {
    Error::ShapeMismatch {
        primitive: p.name(),
        lhs: lhs.to_vec(),
        rhs: rhs.to_vec(),
    }
}

fn arity_err(p: &Primitive, expected: &str, got: usize) -> Error {
    Error::Arity {
        primitive: p.name(),
        expected: expected.to_string(),
        got,
    }
}

fn invalid(p: &Primitive, msg: impl Into<String>) -> Error {
    Error::InvalidArgument {
        primitive: p.name(),
        msg: msg.into(),
    }
}

/// Matmul accepts `[m,k]x[k,n] -> [m,n]` plus the rank-1 forms
/// `[k]x[k,n] -> [n]` and `[m,k]x[k] -> [m]`.
pub(crate) fn matmul_dims(p: &Primitive, a: &[usize], b: &[usize]) -> Result<(usize, usize, usize, Vec<usize>)> {
    match (a.len(), b.len()) {
        (2, 2) if a[1] == b[0] => Ok((a[0], a[1], b[1], vec![a[0], b[1]])),
        (1, 2) if a[0] == b[0] => Ok((1, a[0], b[1], vec![b[1]])),
        (2, 1) if a[1] == b[0] => Ok((a[0], a[1], 1, vec![a[0]])),
        _ => Err(shape_err(p, a, b)),
    }
}

pub(crate) fn matmul_flat(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for l in 0..k {
            let av = a[i * k + l];
            if av == 0.0 {
                continue;
            }
            let brow = &b[l * n..(l + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                orow[j] += av * brow[j];
            }
        }
    }
    out
}

/// Row-major softmax over the last axis, stabilised by max subtraction.
pub(crate) fn softmax_rows(data: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for (row, orow) in data.chunks(cols).zip(out.chunks_mut(cols)) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (o, &x) in orow.iter_mut().zip(row) {
            *o = (x - max).exp();
            total += *o;
        }
        for o in orow.iter_mut() {
            *o /= total;
        }
    }
    out
}

/// Iterate an axis: yields (prefix offset, axis stride, axis extent) geometry
/// as (outer, inner) block sizes so `index = o * extent * inner + a * inner + i`.
pub(crate) fn axis_blocks(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let extent = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    (outer, extent, inner)
}

fn check_unary(p: &Primitive, inputs: &[Tensor]) -> Result<()> {
    if inputs.len() != 1 {
        return Err(arity_err(p, "1", inputs.len()));
    }
    Ok(())
}

fn check_same_shape(p: &Primitive, inputs: &[Tensor]) -> Result<()> {
    if inputs.len() != 2 {
        return Err(arity_err(p, "2", inputs.len()));
    }
    if inputs[0].shape() != inputs[1].shape() {
        return Err(shape_err(p, inputs[0].shape(), inputs[1].shape()));
    }
    Ok(())
}

/// Validate shapes, run the forward rule, and register the result in the
/// graph when any input requires a gradient.
pub fn apply_primitive(primitive: Primitive, inputs: &[Tensor]) -> Result<Tensor> {
    let (shape, data) = forward(&primitive, inputs)?;
    let needs_grad = inputs.iter().any(Tensor::requires_grad);
    let op = needs_grad.then(|| OpNode {
        primitive,
        inputs: inputs.to_vec(),
    });
    Ok(Tensor::make(shape, data, needs_grad, op))
}

fn elementwise(input: &Tensor, f: impl Fn(f64) -> f64) -> (Vec<usize>, Vec<f64>) {
    (
        input.shape().to_vec(),
        input.data().iter().map(|&x| f(x)).collect(),
    )
}

fn forward(p: &Primitive, inputs: &[Tensor]) -> Result<(Vec<usize>, Vec<f64>)> {
    match p {
        Primitive::Add | Primitive::Subtract | Primitive::Multiply => {
            check_same_shape(p, inputs)?;
            let a = inputs[0].data();
            let b = inputs[1].data();
            let data = match p {
                Primitive::Add => a.iter().zip(b.iter()).map(|(x, y)| x + y).collect(),
                Primitive::Subtract => a.iter().zip(b.iter()).map(|(x, y)| x - y).collect(),
                _ => a.iter().zip(b.iter()).map(|(x, y)| x * y).collect(),
            };
            Ok((inputs[0].shape().to_vec(), data))
        }
        Primitive::Matmul => {
            if inputs.len() != 2 {
                return Err(arity_err(p, "2", inputs.len()));
            }
            let (m, k, n, shape) = matmul_dims(p, inputs[0].shape(), inputs[1].shape())?;
            let data = matmul_flat(&inputs[0].data(), &inputs[1].data(), m, k, n);
            Ok((shape, data))
        }
        Primitive::ScalarMultiply => {
            if inputs.len() != 2 {
                return Err(arity_err(p, "2", inputs.len()));
            }
            if inputs[1].len() != 1 {
                return Err(shape_err(p, inputs[0].shape(), inputs[1].shape()));
            }
            let s = inputs[1].item();
            Ok(elementwise(&inputs[0], |x| x * s))
        }
        Primitive::Negate => {
            check_unary(p, inputs)?;
            Ok(elementwise(&inputs[0], |x| -x))
        }
        Primitive::Relu => {
            check_unary(p, inputs)?;
            Ok(elementwise(&inputs[0], |x| x.max(0.0)))
        }
        Primitive::Sigmoid => {
            check_unary(p, inputs)?;
            Ok(elementwise(&inputs[0], |x| 1.0 / (1.0 + (-x).exp())))
        }
        Primitive::Tanh => {
            check_unary(p, inputs)?;
            Ok(elementwise(&inputs[0], f64::tanh))
        }
        Primitive::Exp => {
            check_unary(p, inputs)?;
            Ok(elementwise(&inputs[0], f64::exp))
        }
        Primitive::Log => {
            check_unary(p, inputs)?;
            Ok(elementwise(&inputs[0], f64::ln))
        }
        Primitive::Square => {
            check_unary(p, inputs)?;
            Ok(elementwise(&inputs[0], |x| x * x))
        }
        Primitive::Sqrt => {
            check_unary(p, inputs)?;
            Ok(elementwise(&inputs[0], f64::sqrt))
        }
        Primitive::Cos => {
            check_unary(p, inputs)?;
            Ok(elementwise(&inputs[0], f64::cos))
        }
        Primitive::Sin => {
            check_unary(p, inputs)?;
            Ok(elementwise(&inputs[0], f64::sin))
        }
        Primitive::Softmax => {
            check_unary(p, inputs)?;
            let x = &inputs[0];
            if x.rank() == 0 || x.rank() > 2 {
                return Err(invalid(p, format!("expects rank 1 or 2, got shape {:?}", x.shape())));
            }
            let cols = *x.shape().last().unwrap();
            Ok((x.shape().to_vec(), softmax_rows(&x.data(), cols)))
        }
        Primitive::Sum => {
            check_unary(p, inputs)?;
            Ok((vec![1], vec![inputs[0].data().iter().sum()]))
        }
        Primitive::Mean => {
            check_unary(p, inputs)?;
            let n = inputs[0].len() as f64;
            Ok((vec![1], vec![inputs[0].data().iter().sum::<f64>() / n]))
        }
        Primitive::Concat { axis } => {
            if inputs.is_empty() {
                return Err(arity_err(p, "at least 1", 0));
            }
            let first = inputs[0].shape();
            if *axis >= first.len() {
                return Err(invalid(p, format!("axis {} out of range for rank {}", axis, first.len())));
            }
            let mut total_axis = 0;
            for t in inputs {
                let s = t.shape();
                let compatible = s.len() == first.len()
                    && s.iter()
                        .zip(first)
                        .enumerate()
                        .all(|(i, (a, b))| i == *axis || a == b);
                if !compatible {
                    return Err(shape_err(p, first, s));
                }
                total_axis += s[*axis];
            }
            let mut shape = first.to_vec();
            shape[*axis] = total_axis;
            let (outer, _, inner) = axis_blocks(&shape, *axis);
            let mut data = vec![0.0; shape.iter().product()];
            for o in 0..outer {
                let mut at = 0;
                for t in inputs {
                    let e = t.shape()[*axis];
                    let src = t.data();
                    let src_block = &src[o * e * inner..(o + 1) * e * inner];
                    let dst_off = o * total_axis * inner + at * inner;
                    data[dst_off..dst_off + e * inner].copy_from_slice(src_block);
                    at += e;
                }
            }
            Ok((shape, data))
        }
        Primitive::Slice { axis, start, len } => {
            check_unary(p, inputs)?;
            let x = &inputs[0];
            let s = x.shape();
            if *axis >= s.len() {
                return Err(invalid(p, format!("axis {} out of range for rank {}", axis, s.len())));
            }
            if *len == 0 || start + len > s[*axis] {
                return Err(invalid(
                    p,
                    format!("range {}..{} out of bounds for extent {}", start, start + len, s[*axis]),
                ));
            }
            let mut shape = s.to_vec();
            shape[*axis] = *len;
            let (outer, extent, inner) = axis_blocks(s, *axis);
            let src = x.data();
            let mut data = Vec::with_capacity(outer * len * inner);
            for o in 0..outer {
                let off = o * extent * inner + start * inner;
                data.extend_from_slice(&src[off..off + len * inner]);
            }
            Ok((shape, data))
        }
        Primitive::Transpose => {
            check_unary(p, inputs)?;
            let x = &inputs[0];
            if x.rank() != 2 {
                return Err(invalid(p, format!("expects rank 2, got shape {:?}", x.shape())));
            }
            let (r, c) = (x.shape()[0], x.shape()[1]);
            let src = x.data();
            let mut data = vec![0.0; r * c];
            for i in 0..r {
                for j in 0..c {
                    data[j * r + i] = src[i * c + j];
                }
            }
            Ok((vec![c, r], data))
        }
        Primitive::MaxPool { axis } => {
            check_unary(p, inputs)?;
            let x = &inputs[0];
            let s = x.shape();
            if *axis >= s.len() {
                return Err(invalid(p, format!("axis {} out of range for rank {}", axis, s.len())));
            }
            // Keeps the pooled axis with extent 1.
            let mut shape = s.to_vec();
            shape[*axis] = 1;
            let (outer, extent, inner) = axis_blocks(s, *axis);
            let src = x.data();
            let mut data = vec![f64::NEG_INFINITY; outer * inner];
            for o in 0..outer {
                for a in 0..extent {
                    for i in 0..inner {
                        let v = src[o * extent * inner + a * inner + i];
                        let d = &mut data[o * inner + i];
                        if v > *d {
                            *d = v;
                        }
                    }
                }
            }
            Ok((shape, data))
        }
        Primitive::BroadcastAdd => {
            if inputs.len() != 2 {
                return Err(arity_err(p, "2", inputs.len()));
            }
            let (x, b) = (&inputs[0], &inputs[1]);
            if x.rank() != 2 || b.rank() != 1 || x.shape()[1] != b.shape()[0] {
                return Err(shape_err(p, x.shape(), b.shape()));
            }
            let cols = b.len();
            let bias = b.data();
            let data = x
                .data()
                .iter()
                .enumerate()
                .map(|(i, &v)| v + bias[i % cols])
                .collect();
            Ok((x.shape().to_vec(), data))
        }
    }
}

// Method sugar so model code reads as expressions.
impl Tensor {
    pub fn add(&self, rhs: &Tensor) -> Result<Tensor> {
        apply_primitive(Primitive::Add, &[self.clone(), rhs.clone()])
    }
    pub fn sub(&self, rhs: &Tensor) -> Result<Tensor> {
        apply_primitive(Primitive::Subtract, &[self.clone(), rhs.clone()])
    }
    pub fn mul(&self, rhs: &Tensor) -> Result<Tensor> {
        apply_primitive(Primitive::Multiply, &[self.clone(), rhs.clone()])
    }
    pub fn matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        apply_primitive(Primitive::Matmul, &[self.clone(), rhs.clone()])
    }
    pub fn scalar_mul(&self, scalar: &Tensor) -> Result<Tensor> {
        apply_primitive(Primitive::ScalarMultiply, &[self.clone(), scalar.clone()])
    }
    pub fn neg(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Negate, &[self.clone()])
    }
    pub fn relu(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Relu, &[self.clone()])
    }
    pub fn sigmoid(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Sigmoid, &[self.clone()])
    }
    pub fn tanh(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Tanh, &[self.clone()])
    }
    pub fn exp(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Exp, &[self.clone()])
    }
    pub fn log(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Log, &[self.clone()])
    }
    pub fn softmax(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Softmax, &[self.clone()])
    }
    pub fn sum(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Sum, &[self.clone()])
    }
    pub fn mean(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Mean, &[self.clone()])
    }
    pub fn concat(axis: usize, parts: &[Tensor]) -> Result<Tensor> {
        apply_primitive(Primitive::Concat { axis }, parts)
    }
    pub fn slice(&self, axis: usize, start: usize, len: usize) -> Result<Tensor> {
        apply_primitive(Primitive::Slice { axis, start, len }, &[self.clone()])
    }
    pub fn transpose(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Transpose, &[self.clone()])
    }
    pub fn max_pool(&self, axis: usize) -> Result<Tensor> {
        apply_primitive(Primitive::MaxPool { axis }, &[self.clone()])
    }
    pub fn square(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Square, &[self.clone()])
    }
    pub fn sqrt(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Sqrt, &[self.clone()])
    }
    pub fn cos(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Cos, &[self.clone()])
    }
    pub fn sin(&self) -> Result<Tensor> {
        apply_primitive(Primitive::Sin, &[self.clone()])
    }
    pub fn broadcast_add(&self, bias: &Tensor) -> Result<Tensor> {
        apply_primitive(Primitive::BroadcastAdd, &[self.clone(), bias.clone()])
    }

    /// `1/x` for a positive scalar, written inside the primitive set as
    /// `exp(-log(x))`.
    pub fn recip_positive(&self) -> Result<Tensor> {
        self.log()?.neg()?.exp()
    }
}
