use rand_chacha::ChaCha8Rng;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// One gate: input weight `[x_dim, h_dim]`, recurrent weight `[h_dim, h_dim]`,
/// bias `[h_dim]`.
#[derive(Clone)]
pub struct GateParams {
    pub w: Tensor,
    pub u: Tensor,
    pub b: Tensor,
}

impl GateParams {
    fn init(x_dim: usize, h_dim: usize, rng: &mut ChaCha8Rng) -> GateParams {
        use crate::rng::init_vec;
        GateParams {
            w: Tensor::param(vec![x_dim, h_dim], init_vec(rng, x_dim * h_dim)).unwrap(),
            u: Tensor::param(vec![h_dim, h_dim], init_vec(rng, h_dim * h_dim)).unwrap(),
            b: Tensor::param(vec![h_dim], init_vec(rng, h_dim)).unwrap(),
        }
    }

    fn pre_activation(&self, x: &Tensor, h: &Tensor) -> Result<Tensor> {
        x.matmul(&self.w)?.add(&h.matmul(&self.u)?)?.broadcast_add(&self.b)
    }
}

/// Standard LSTM cell parameters, one [`GateParams`] per gate.
#[derive(Clone)]
pub struct LstmCellParams {
    pub input: GateParams,
    pub forget: GateParams,
    pub output: GateParams,
    pub cell: GateParams,
    pub x_dim: usize,
    pub h_dim: usize,
}

impl LstmCellParams {
    pub fn init(x_dim: usize, h_dim: usize, rng: &mut ChaCha8Rng) -> LstmCellParams {
        LstmCellParams {
            input: GateParams::init(x_dim, h_dim, rng),
            forget: GateParams::init(x_dim, h_dim, rng),
            output: GateParams::init(x_dim, h_dim, rng),
            cell: GateParams::init(x_dim, h_dim, rng),
            x_dim,
            h_dim,
        }
    }

    pub fn gates(&self) -> [(&'static str, &GateParams); 4] {
        [
            ("input", &self.input),
            ("forget", &self.forget),
            ("output", &self.output),
            ("cell", &self.cell),
        ]
    }
}

/// One step of the gate equations:
/// `i = s(Wi x + Ui h + bi)`, `f = s(Wf x + Uf h + bf)`,
/// `o = s(Wo x + Uo h + bo)`, `g = tanh(Wc x + Uc h + bc)`,
/// `c' = f*c + i*g`, `h' = o*tanh(c')`.
///
/// `x` is `[1, x_dim]`; `h`, `c` are `[1, h_dim]`.
pub fn lstm_cell_step(
    params: &LstmCellParams,
    x: &Tensor,
    h: &Tensor,
    c: &Tensor,
) -> Result<(Tensor, Tensor)> {
    let i = params.input.pre_activation(x, h)?.sigmoid()?;
    let f = params.forget.pre_activation(x, h)?.sigmoid()?;
    let o = params.output.pre_activation(x, h)?.sigmoid()?;
    let g = params.cell.pre_activation(x, h)?.tanh()?;
    let c_next = f.mul(c)?.add(&i.mul(&g)?)?;
    let h_next = o.mul(&c_next.tanh()?)?;
    Ok((h_next, c_next))
}

/// Run a cell over `xs` `[T, x_dim]` from zero initial state. With `reverse`
/// the steps are consumed last-to-first and the collected outputs are put
/// back in input order, so row `t` always corresponds to input step `t`.
pub fn lstm_scan(params: &LstmCellParams, xs: &Tensor, reverse: bool) -> Result<Tensor> {
    if xs.rank() != 2 || xs.shape()[1] != params.x_dim {
        return Err(Error::Invalid(format!(
            "lstm expects [T, {}] inputs, got {:?}",
            params.x_dim,
            xs.shape()
        )));
    }
    let t_len = xs.shape()[0];
    if t_len == 0 {
        return Err(Error::Invalid("lstm sequence must have at least one step".into()));
    }
    let mut h = Tensor::zeros(vec![1, params.h_dim]);
    let mut c = Tensor::zeros(vec![1, params.h_dim]);
    let mut rows: Vec<Tensor> = Vec::with_capacity(t_len);
    for step in 0..t_len {
        let t = if reverse { t_len - 1 - step } else { step };
        let x = xs.slice(0, t, 1)?;
        let (h_next, c_next) = lstm_cell_step(params, &x, &h, &c)?;
        h = h_next;
        c = c_next;
        rows.push(h.clone());
    }
    if reverse {
        rows.reverse();
    }
    Tensor::concat(0, &rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
    Bi,
}

/// Parameters of one (possibly bidirectional) LSTM layer.
#[derive(Clone)]
pub struct LstmLayerParams {
    pub forward: LstmCellParams,
    pub backward: Option<LstmCellParams>,
}

impl LstmLayerParams {
    pub fn init(x_dim: usize, h_dim: usize, bidirectional: bool, rng: &mut ChaCha8Rng) -> Self {
        LstmLayerParams {
            forward: LstmCellParams::init(x_dim, h_dim, rng),
            backward: bidirectional.then(|| LstmCellParams::init(x_dim, h_dim, rng)),
        }
    }

    pub fn out_dim(&self) -> usize {
        let h = self.forward.h_dim;
        if self.backward.is_some() {
            2 * h
        } else {
            h
        }
    }
}

/// Per-step outputs `[T, h]`, or `[T, 2h]` in bi mode where each row is the
/// forward output concatenated with the time-reversed backward output for the
/// same step.
pub fn lstm_sequence(layer: &LstmLayerParams, xs: &Tensor, direction: Direction) -> Result<Tensor> {
    match direction {
        Direction::Forward => lstm_scan(&layer.forward, xs, false),
        Direction::Backward => lstm_scan(&layer.forward, xs, true),
        Direction::Bi => {
            let bwd_params = layer
                .backward
                .as_ref()
                .ok_or_else(|| Error::Invalid("bi direction requires backward cell params".into()))?;
            let fwd = lstm_scan(&layer.forward, xs, false)?;
            let bwd = lstm_scan(bwd_params, xs, true)?;
            let t_len = xs.shape()[0];
            let rows: Vec<Tensor> = (0..t_len)
                .map(|t| Tensor::concat(1, &[fwd.slice(0, t, 1)?, bwd.slice(0, t, 1)?]))
                .collect::<Result<_>>()?;
            Tensor::concat(0, &rows)
        }
    }
}
