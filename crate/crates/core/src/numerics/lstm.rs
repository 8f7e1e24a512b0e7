//! LSTM cell with forget gate and no peepholes.
//!
//! Gate rows are stacked `[input, forget, cell, output]`, each block `n`
//! rows, so `input_weights` is `4n × d_in`, `recurrent_weights` is `4n × n`
//! and `bias` has `4n` entries.

use super::init::{init_orthogonal, init_uniform};
use super::tensor::{outer_acc, Tensor};
use super::NumericsError;

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Borrowed view of one cell's weights.
#[derive(Clone, Copy, Debug)]
pub struct LstmCell<'a> {
    pub input_weights: &'a Tensor,
    pub recurrent_weights: &'a Tensor,
    pub bias: &'a Tensor,
}

impl<'a> LstmCell<'a> {
    pub fn new(
        input_weights: &'a Tensor,
        recurrent_weights: &'a Tensor,
        bias: &'a Tensor,
    ) -> Result<Self, NumericsError> {
        let cell = LstmCell { input_weights, recurrent_weights, bias };
        let n = cell.hidden_size();
        let four_n = bias.len();
        if !four_n.is_multiple_of(4)
            || input_weights.shape().len() != 2
            || input_weights.rows() != four_n
            || recurrent_weights.shape() != [four_n, n]
        {
            return Err(NumericsError::Shape(format!(
                "inconsistent LSTM shapes: input {:?}, recurrent {:?}, bias {:?}",
                input_weights.shape(),
                recurrent_weights.shape(),
                bias.shape()
            )));
        }
        Ok(cell)
    }

    pub fn hidden_size(&self) -> usize {
        self.bias.len() / 4
    }

    pub fn input_size(&self) -> usize {
        self.input_weights.cols()
    }
}

/// Owned LSTM weights.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCellParams {
    pub input_weights: Tensor,
    pub recurrent_weights: Tensor,
    pub bias: Tensor,
}

impl LstmCellParams {
    /// Orthogonal gate blocks for both weight matrices, zero biases except
    /// the forget gate which starts at 1.
    pub fn init(input_size: usize, hidden: usize, seed: u64) -> Result<Self, NumericsError> {
        let mut w_ih = Vec::with_capacity(4 * hidden * input_size);
        let mut w_hh = Vec::with_capacity(4 * hidden * hidden);
        for gate in 0..4u64 {
            let block = init_orthogonal(&[hidden, input_size], seed.wrapping_add(2 * gate))?;
            w_ih.extend_from_slice(block.data());
            let block = init_orthogonal(&[hidden, hidden], seed.wrapping_add(2 * gate + 1))?;
            w_hh.extend_from_slice(block.data());
        }
        let mut bias = vec![0.0; 4 * hidden];
        bias[hidden..2 * hidden].iter_mut().for_each(|b| *b = 1.0);
        Ok(LstmCellParams {
            input_weights: Tensor::new(vec![4 * hidden, input_size], w_ih)?,
            recurrent_weights: Tensor::new(vec![4 * hidden, hidden], w_hh)?,
            bias: Tensor::new(vec![4 * hidden], bias)?,
        })
    }

    /// Uniform random weights, used by tests that want non-degenerate cells.
    pub fn random(input_size: usize, hidden: usize, seed: u64, scale: f64) -> Result<Self, NumericsError> {
        Ok(LstmCellParams {
            input_weights: init_uniform(&[4 * hidden, input_size], seed, -scale, scale)?,
            recurrent_weights: init_uniform(&[4 * hidden, hidden], seed + 1, -scale, scale)?,
            bias: init_uniform(&[4 * hidden], seed + 2, -scale, scale)?,
        })
    }

    pub fn view(&self) -> LstmCell<'_> {
        LstmCell {
            input_weights: &self.input_weights,
            recurrent_weights: &self.recurrent_weights,
            bias: &self.bias,
        }
    }
}

/// Everything one step needs for backpropagation.
#[derive(Clone, Debug)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates `[i, f, g, o]`.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

fn step_cached(cell: LstmCell<'_>, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepCache {
    let n = cell.hidden_size();
    let mut pre = cell.bias.data().to_vec();
    cell.input_weights.matvec_acc(x, &mut pre);
    cell.recurrent_weights.matvec_acc(h_prev, &mut pre);
    let mut gates = pre;
    for (k, v) in gates.iter_mut().enumerate() {
        *v = if k / n == 2 { v.tanh() } else { sigmoid(*v) };
    }
    let mut c = vec![0.0; n];
    let mut h = vec![0.0; n];
    for j in 0..n {
        let (i, f, g, o) = (gates[j], gates[n + j], gates[2 * n + j], gates[3 * n + j]);
        c[j] = f * c_prev[j] + i * g;
        h[j] = o * c[j].tanh();
    }
    StepCache { x: x.to_vec(), h_prev: h_prev.to_vec(), c_prev: c_prev.to_vec(), gates, c, h }
}

/// One recurrence step; returns `(h, c)`.
pub fn lstm_step(
    cell: LstmCell<'_>,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), NumericsError> {
    let n = cell.hidden_size();
    if x.len() != cell.input_size() || h_prev.len() != n || c_prev.len() != n {
        return Err(NumericsError::Shape(format!(
            "lstm_step expects x[{}], h[{n}], c[{n}]; got x[{}], h[{}], c[{}]",
            cell.input_size(),
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    let step = step_cached(cell, x, h_prev, c_prev);
    Ok((step.h, step.c))
}

/// Forward trace of a cell run over a sequence from zero initial state.
#[derive(Clone, Debug, Default)]
pub struct SeqTrace {
    pub steps: Vec<StepCache>,
}

impl SeqTrace {
    /// Final hidden state; zeros of length `hidden` for an empty sequence.
    pub fn final_h(&self, hidden: usize) -> Vec<f64> {
        self.steps.last().map(|s| s.h.clone()).unwrap_or_else(|| vec![0.0; hidden])
    }

    pub fn states(&self) -> Vec<Vec<f64>> {
        self.steps.iter().map(|s| s.h.clone()).collect()
    }
}

/// Runs the cell over `inputs` in the given order.
pub fn run_lstm<X: AsRef<[f64]>>(cell: LstmCell<'_>, inputs: &[X]) -> Result<SeqTrace, NumericsError> {
    let n = cell.hidden_size();
    let mut h = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut steps = Vec::with_capacity(inputs.len());
    for x in inputs {
        let x = x.as_ref();
        if x.len() != cell.input_size() {
            return Err(NumericsError::Shape(format!(
                "LSTM input of length {} for cell expecting {}",
                x.len(),
                cell.input_size()
            )));
        }
        let step = step_cached(cell, x, &h, &c);
        h.clone_from(&step.h);
        c.clone_from(&step.c);
        steps.push(step);
    }
    Ok(SeqTrace { steps })
}

/// Bidirectional encoding: `fwd_states[i]` has consumed `seq[0..=i]`,
/// `bwd_states[i]` has consumed `seq[i..]` read from the end.
pub fn encode_sequence<X: AsRef<[f64]>>(
    fwd: LstmCell<'_>,
    bwd: LstmCell<'_>,
    seq: &[X],
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), NumericsError> {
    let fwd_states = run_lstm(fwd, seq)?.states();
    let reversed: Vec<&[f64]> = seq.iter().rev().map(|x| x.as_ref()).collect();
    let mut bwd_states = run_lstm(bwd, &reversed)?.states();
    bwd_states.reverse();
    Ok((fwd_states, bwd_states))
}

/// Gradient buffers for one cell.
#[derive(Clone, Debug)]
pub struct LstmGrads {
    pub input_weights: Vec<f64>,
    pub recurrent_weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LstmGrads {
    pub fn zeros(cell: LstmCell<'_>) -> Self {
        LstmGrads {
            input_weights: vec![0.0; cell.input_weights.len()],
            recurrent_weights: vec![0.0; cell.recurrent_weights.len()],
            bias: vec![0.0; cell.bias.len()],
        }
    }
}

/// Backpropagation through time from a gradient on the final hidden state.
///
/// Accumulates weight gradients into `grads`. When `want_dx` is set, returns
/// the gradient with respect to each input in sequence order; otherwise the
/// returned vector is empty.
pub fn backward_lstm(
    cell: LstmCell<'_>,
    trace: &SeqTrace,
    dh_final: &[f64],
    grads: &mut LstmGrads,
    want_dx: bool,
) -> Vec<Vec<f64>> {
    let n = cell.hidden_size();
    let mut dx_all = if want_dx { vec![Vec::new(); trace.steps.len()] } else { Vec::new() };
    let mut dh = dh_final.to_vec();
    let mut dc = vec![0.0; n];
    let mut da = vec![0.0; 4 * n];
    for (t, step) in trace.steps.iter().enumerate().rev() {
        let g = &step.gates;
        for j in 0..n {
            let (i, f, gg, o) = (g[j], g[n + j], g[2 * n + j], g[3 * n + j]);
            let tc = step.c[j].tanh();
            let d_o = dh[j] * tc;
            let dcj = dc[j] + dh[j] * o * (1.0 - tc * tc);
            let d_i = dcj * gg;
            let d_g = dcj * i;
            let d_f = dcj * step.c_prev[j];
            dc[j] = dcj * f;
            da[j] = d_i * i * (1.0 - i);
            da[n + j] = d_f * f * (1.0 - f);
            da[2 * n + j] = d_g * (1.0 - gg * gg);
            da[3 * n + j] = d_o * o * (1.0 - o);
        }
        outer_acc(&mut grads.input_weights, &da, &step.x);
        outer_acc(&mut grads.recurrent_weights, &da, &step.h_prev);
        for (b, &d) in grads.bias.iter_mut().zip(&da) {
            *b += d;
        }
        if want_dx {
            let mut dx = vec![0.0; step.x.len()];
            cell.input_weights.matvec_t_acc(&da, &mut dx);
            dx_all[t] = dx;
        }
        let mut dh_prev = vec![0.0; n];
        cell.recurrent_weights.matvec_t_acc(&da, &mut dh_prev);
        dh = dh_prev;
    }
    dx_all
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Scalar-loop reference written independently of the vectorized path.
    fn reference_step(p: &LstmCellParams, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = h.len();
        let d = x.len();
        let wi = p.input_weights.data();
        let wh = p.recurrent_weights.data();
        let b = p.bias.data();
        let pre = |row: usize| {
            let mut s = b[row];
            for k in 0..d {
                s += wi[row * d + k] * x[k];
            }
            for k in 0..n {
                s += wh[row * n + k] * h[k];
            }
            s
        };
        let logistic = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mut h_new = vec![0.0; n];
        let mut c_new = vec![0.0; n];
        for j in 0..n {
            let i = logistic(pre(j));
            let f = logistic(pre(n + j));
            let g = pre(2 * n + j).tanh();
            let o = logistic(pre(3 * n + j));
            c_new[j] = f * c[j] + i * g;
            h_new[j] = o * c_new[j].tanh();
        }
        (h_new, c_new)
    }

    #[test]
    fn zero_cell_gives_zero_output() {
        let p = LstmCellParams {
            input_weights: Tensor::zeros(&[16, 3]),
            recurrent_weights: Tensor::zeros(&[16, 4]),
            bias: Tensor::zeros(&[16]),
        };
        let (h, _) = lstm_step(p.view(), &[5.0, -2.0, 1.0], &[0.0; 4], &[0.0; 4]).unwrap();
        assert!(h.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_scalar_reference() {
        let p = LstmCellParams::random(3, 5, 42, 0.5).unwrap();
        let x = [0.3, -0.7, 1.1];
        let h0 = [0.1, -0.2, 0.05, 0.4, -0.3];
        let c0 = [0.2, 0.1, -0.5, 0.0, 0.3];
        let (h, c) = lstm_step(p.view(), &x, &h0, &c0).unwrap();
        let (rh, rc) = reference_step(&p, &x, &h0, &c0);
        for j in 0..5 {
            assert!((h[j] - rh[j]).abs() <= 1e-12);
            assert!((c[j] - rc[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn saturating_input_stays_bounded() {
        let p = LstmCellParams::random(3, 4, 7, 0.5).unwrap();
        let (h, c) = lstm_step(p.view(), &[1000.0, -1000.0, 1000.0], &[0.0; 4], &[0.0; 4]).unwrap();
        assert!(h.iter().all(|v| v.abs() <= 1.0 && v.is_finite()));
        assert!(c.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = LstmCellParams::random(3, 4, 7, 0.5).unwrap();
        assert!(lstm_step(p.view(), &[1.0, 2.0], &[0.0; 4], &[0.0; 4]).is_err());
        assert!(LstmCell::new(&p.input_weights, &p.input_weights, &p.bias).is_err());
    }

    #[test]
    fn init_has_unit_forget_bias() {
        let p = LstmCellParams::init(3, 4, 1).unwrap();
        assert_eq!(&p.bias.data()[4..8], &[1.0; 4]);
        assert!(p.bias.data()[..4].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn encode_sequence_edge_cases() {
        let f = LstmCellParams::random(2, 3, 1, 0.4).unwrap();
        let b = LstmCellParams::random(2, 3, 9, 0.4).unwrap();
        let empty: Vec<Vec<f64>> = Vec::new();
        let (fs, bs) = encode_sequence(f.view(), b.view(), &empty).unwrap();
        assert!(fs.is_empty() && bs.is_empty());

        // A single token: each direction is one step from zero state.
        let x = vec![vec![0.5, -1.0]];
        let (fs, bs) = encode_sequence(f.view(), b.view(), &x).unwrap();
        let (hf, _) = lstm_step(f.view(), &x[0], &[0.0; 3], &[0.0; 3]).unwrap();
        let (hb, _) = lstm_step(b.view(), &x[0], &[0.0; 3], &[0.0; 3]).unwrap();
        assert_eq!(fs[0], hf);
        assert_eq!(bs[0], hb);
    }

    #[test]
    fn reversing_input_and_swapping_cells_swaps_outputs() {
        let f = LstmCellParams::random(2, 3, 1, 0.4).unwrap();
        let b = LstmCellParams::random(2, 3, 9, 0.4).unwrap();
        let seq: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.3 - 0.5, 0.2 * i as f64]).collect();
        let (fs, bs) = encode_sequence(f.view(), b.view(), &seq).unwrap();
        let rev: Vec<Vec<f64>> = seq.iter().rev().cloned().collect();
        let (fs2, bs2) = encode_sequence(b.view(), f.view(), &rev).unwrap();
        let mut bs_rev = bs.clone();
        bs_rev.reverse();
        let mut fs_rev = fs.clone();
        fs_rev.reverse();
        assert_eq!(fs2, bs_rev);
        assert_eq!(bs2, fs_rev);
    }

    #[test]
    fn bptt_matches_finite_differences() {
        let p = LstmCellParams::random(3, 4, 11, 0.6).unwrap();
        let seq: Vec<Vec<f64>> = (0..4).map(|i| vec![0.1 * i as f64, -0.3, 0.2 + 0.05 * i as f64]).collect();
        let weights = [0.3, -0.8, 0.5, 1.2];
        let loss = |p: &LstmCellParams, seq: &[Vec<f64>]| {
            let tr = run_lstm(p.view(), seq).unwrap();
            tr.final_h(4).iter().zip(&weights).map(|(h, w)| h * w).sum::<f64>()
        };
        let trace = run_lstm(p.view(), &seq).unwrap();
        let mut grads = LstmGrads::zeros(p.view());
        let dx = backward_lstm(p.view(), &trace, &weights, &mut grads, true);
        let h = 1e-5;
        for k in 0..p.recurrent_weights.len() {
            let mut plus = p.clone();
            plus.recurrent_weights.data_mut()[k] += h;
            let mut minus = p.clone();
            minus.recurrent_weights.data_mut()[k] -= h;
            let num = (loss(&plus, &seq) - loss(&minus, &seq)) / (2.0 * h);
            assert!((num - grads.recurrent_weights[k]).abs() < 1e-8);
        }
        for t in 0..seq.len() {
            for k in 0..3 {
                let mut plus = seq.clone();
                plus[t][k] += h;
                let mut minus = seq.clone();
                minus[t][k] -= h;
                let num = (loss(&p, &plus) - loss(&p, &minus)) / (2.0 * h);
                assert!((num - dx[t][k]).abs() < 1e-8);
            }
        }
    }
}
