use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use super::ops::{axis_blocks, matmul_dims, matmul_flat, Primitive};
use super::tensor::Tensor;

/// Tensors in dependency order: every tensor appears after all of its inputs,
/// with `root` last.
fn topo_order(root: &Tensor) -> Vec<Tensor> {
    enum Phase {
        Enter(Tensor),
        Exit(Tensor),
    }
    let mut order = Vec::new();
    let mut seen: HashSet<u64> = HashSet::new();
    let mut stack = vec![Phase::Enter(root.clone())];
    while let Some(phase) = stack.pop() {
        match phase {
            Phase::Enter(t) => {
                if !seen.insert(t.id()) {
                    continue;
                }
                let inputs = t.with_op(|op| op.map(|n| n.inputs.clone()).unwrap_or_default());
                stack.push(Phase::Exit(t));
                for input in inputs {
                    stack.push(Phase::Enter(input));
                }
            }
            Phase::Exit(t) => order.push(t),
        }
    }
    order
}

impl Tensor {
    /// Reverse-mode sweep from a scalar loss. Adds d(loss)/d(t) into the
    /// `grad` slot of every tensor in the graph that requires a gradient
    /// (the loss itself receives ones). Contributions from repeated calls
    /// accumulate until [`Tensor::zero_grad`].
    pub fn backward(&self) -> Result<()> {
        if self.len() != 1 {
            return Err(Error::NonScalarLoss(self.shape().to_vec()));
        }
        let order = topo_order(self);
        let mut flows: HashMap<u64, Vec<f64>> = HashMap::new();
        flows.insert(self.id(), vec![1.0]);

        // Reverse dependency order: when a tensor is visited, every consumer
        // has already deposited its contribution, so its flow is complete.
        for t in order.iter().rev() {
            let Some(grad) = flows.remove(&t.id()) else {
                continue;
            };
            t.with_op(|op| -> Result<()> {
                if let Some(node) = op {
                    let contributions = input_grads(&node.primitive, &node.inputs, t, &grad)?;
                    for (input, contrib) in node.inputs.iter().zip(contributions) {
                        let slot = flows.entry(input.id()).or_insert_with(|| vec![0.0; input.len()]);
                        for (s, c) in slot.iter_mut().zip(&contrib) {
                            *s += c;
                        }
                    }
                }
                Ok(())
            })?;
            if t.requires_grad() {
                t.accumulate_grad(&grad);
            }
        }
        Ok(())
    }
}

fn unary_chain(input: &Tensor, grad: &[f64], dydx: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
    let x = input.data();
    vec![grad.iter().zip(x.iter()).map(|(g, &v)| g * dydx(v)).collect()]
}

/// Gradient of each input given the output gradient. `output` is the forward
/// result of the node, available to rules that are cheaper in terms of y.
fn input_grads(
    p: &Primitive,
    inputs: &[Tensor],
    output: &Tensor,
    grad: &[f64],
) -> Result<Vec<Vec<f64>>> {
    Ok(match p {
        Primitive::Add => vec![grad.to_vec(), grad.to_vec()],
        Primitive::Subtract => vec![grad.to_vec(), grad.iter().map(|g| -g).collect()],
        Primitive::Multiply => {
            let a = inputs[0].data();
            let b = inputs[1].data();
            vec![
                grad.iter().zip(b.iter()).map(|(g, y)| g * y).collect(),
                grad.iter().zip(a.iter()).map(|(g, x)| g * x).collect(),
            ]
        }
        Primitive::Matmul => {
            let (m, k, n, _) = matmul_dims(p, inputs[0].shape(), inputs[1].shape())?;
            let a = inputs[0].data();
            let b = inputs[1].data();
            // dA = g @ B^T, dB = A^T @ g, computed on the promoted 2-d views.
            let bt = transpose_flat(&b, k, n);
            let at = transpose_flat(&a, m, k);
            vec![
                matmul_flat(grad, &bt, m, n, k),
                matmul_flat(&at, grad, k, m, n),
            ]
        }
        Primitive::ScalarMultiply => {
            let s = inputs[1].item();
            let x = inputs[0].data();
            let ds: f64 = grad.iter().zip(x.iter()).map(|(g, v)| g * v).sum();
            vec![grad.iter().map(|g| g * s).collect(), vec![ds]]
        }
        Primitive::Negate => vec![grad.iter().map(|g| -g).collect()],
        Primitive::Relu => unary_chain(&inputs[0], grad, |x| if x > 0.0 { 1.0 } else { 0.0 }),
        Primitive::Sigmoid => {
            let y = output.data();
            vec![grad.iter().zip(y.iter()).map(|(g, &v)| g * v * (1.0 - v)).collect()]
        }
        Primitive::Tanh => {
            let y = output.data();
            vec![grad.iter().zip(y.iter()).map(|(g, &v)| g * (1.0 - v * v)).collect()]
        }
        Primitive::Exp => {
            let y = output.data();
            vec![grad.iter().zip(y.iter()).map(|(g, &v)| g * v).collect()]
        }
        Primitive::Log => unary_chain(&inputs[0], grad, |x| 1.0 / x),
        Primitive::Square => unary_chain(&inputs[0], grad, |x| 2.0 * x),
        Primitive::Sqrt => {
            let y = output.data();
            vec![grad.iter().zip(y.iter()).map(|(g, &v)| g * 0.5 / v).collect()]
        }
        Primitive::Cos => unary_chain(&inputs[0], grad, |x| -x.sin()),
        Primitive::Sin => unary_chain(&inputs[0], grad, f64::cos),
        Primitive::Softmax => {
            // Per row: dx_i = y_i * (g_i - sum_j g_j y_j).
            let y = output.data();
            let cols = *output.shape().last().unwrap();
            let mut dx = vec![0.0; y.len()];
            for ((yrow, grow), drow) in y
                .chunks(cols)
                .zip(grad.chunks(cols))
                .zip(dx.chunks_mut(cols))
            {
                let dot: f64 = yrow.iter().zip(grow).map(|(a, b)| a * b).sum();
                for ((d, &yv), &gv) in drow.iter_mut().zip(yrow).zip(grow) {
                    *d = yv * (gv - dot);
                }
            }
            vec![dx]
        }
        Primitive::Sum => vec![vec![grad[0]; inputs[0].len()]],
        Primitive::Mean => {
            let n = inputs[0].len() as f64;
            vec![vec![grad[0] / n; inputs[0].len()]]
        }
        Primitive::Concat { axis } => {
            let shape = output.shape();
            let (outer, total, inner) = axis_blocks(shape, *axis);
            let mut grads = Vec::with_capacity(inputs.len());
            let mut at = 0;
            for t in inputs {
                let e = t.shape()[*axis];
                let mut g = vec![0.0; t.len()];
                for o in 0..outer {
                    let src = o * total * inner + at * inner;
                    let dst = o * e * inner;
                    g[dst..dst + e * inner].copy_from_slice(&grad[src..src + e * inner]);
                }
                at += e;
                grads.push(g);
            }
            grads
        }
        Primitive::Slice { axis, start, len } => {
            let shape = inputs[0].shape();
            let (outer, extent, inner) = axis_blocks(shape, *axis);
            let mut g = vec![0.0; inputs[0].len()];
            for o in 0..outer {
                let dst = o * extent * inner + start * inner;
                let src = o * len * inner;
                g[dst..dst + len * inner].copy_from_slice(&grad[src..src + len * inner]);
            }
            vec![g]
        }
        Primitive::Transpose => {
            let (r, c) = (output.shape()[0], output.shape()[1]);
            vec![transpose_flat(grad, r, c)]
        }
        Primitive::MaxPool { axis } => {
            // Gradient routes to the first maximiser along the pooled axis.
            let shape = inputs[0].shape();
            let (outer, extent, inner) = axis_blocks(shape, *axis);
            let x = inputs[0].data();
            let mut g = vec![0.0; inputs[0].len()];
            for o in 0..outer {
                for i in 0..inner {
                    let mut best = 0;
                    let mut best_v = f64::NEG_INFINITY;
                    for a in 0..extent {
                        let v = x[o * extent * inner + a * inner + i];
                        if v > best_v {
                            best_v = v;
                            best = a;
                        }
                    }
                    g[o * extent * inner + best * inner + i] = grad[o * inner + i];
                }
            }
            vec![g]
        }
        Primitive::BroadcastAdd => {
            let cols = inputs[1].len();
            let mut db = vec![0.0; cols];
            for (i, g) in grad.iter().enumerate() {
                db[i % cols] += g;
            }
            vec![grad.to_vec(), db]
        }
    })
}

fn transpose_flat(x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = x[i * cols + j];
        }
    }
    out
}
