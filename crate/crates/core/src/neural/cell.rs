//! Single-direction LSTM with hand-written backpropagation through time.
//!
//! Gates are stacked in the order input, forget, candidate, output:
//!
//! ```text
//! a = W [x_t ; h_{t-1}] + b
//! i = σ(a_i)  f = σ(a_f)  g = tanh(a_g)  o = σ(a_o)
//! c_t = f ⊙ c_{t-1} + i ⊙ g
//! h_t = o ⊙ tanh(c_t)
//! ```

use rand::Rng;

use crate::scalar::{sigmoid, Scalar};
use crate::tensor::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmCell<T> {
    /// `4H × (I + H)`
    pub w: Matrix<T>,
    /// `1 × 4H`
    pub b: Matrix<T>,
}

/// Per-step activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct CellTrace<T> {
    /// Concatenated `[x_t ; mask ⊙ h_{t-1}]`, `n × (I + H)`.
    z: Matrix<T>,
    /// Gate activations `[i f g o]`, `n × 4H`.
    gates: Matrix<T>,
    c: Matrix<T>,
    tanh_c: Matrix<T>,
    /// Hidden states, `n × H`.
    pub h: Matrix<T>,
}

impl<T: Scalar> LstmCell<T> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w: Matrix::zeros(4 * hidden, input + hidden),
            b: Matrix::zeros(1, 4 * hidden),
        }
    }

    /// Uniform initialization in `±1/sqrt(H)`.
    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        Self {
            w: Matrix::uniform(4 * hidden, input + hidden, bound, rng),
            b: Matrix::uniform(1, 4 * hidden, bound, rng),
        }
    }

    pub fn hidden(&self) -> usize {
        self.b.cols() / 4
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols() - self.hidden()
    }

    /// Runs the cell over the rows of `xs` in order. `mask`, when given,
    /// multiplies `h_{t-1}` before it enters the gates.
    pub fn forward(&self, xs: &Matrix<T>, mask: Option<&[T]>) -> CellTrace<T> {
        let (n, h, inp) = (xs.rows(), self.hidden(), self.input_dim());
        debug_assert_eq!(xs.cols(), inp);
        let mut tr = CellTrace {
            z: Matrix::zeros(n, inp + h),
            gates: Matrix::zeros(n, 4 * h),
            c: Matrix::zeros(n, h),
            tanh_c: Matrix::zeros(n, h),
            h: Matrix::zeros(n, h),
        };
        for t in 0..n {
            let z = tr.z.row_mut(t);
            z[..inp].copy_from_slice(xs.row(t));
            if t > 0 {
                let prev = tr.h.row(t - 1);
                match mask {
                    Some(m) => {
                        for k in 0..h {
                            z[inp + k] = prev[k] * m[k];
                        }
                    }
                    None => z[inp..].copy_from_slice(prev),
                }
            }
            let a = tr.gates.row_mut(t);
            a.copy_from_slice(self.b.as_slice());
            self.w.matvec_add(tr.z.row(t), a);
            for k in 0..h {
                a[k] = sigmoid(a[k]);
                a[h + k] = sigmoid(a[h + k]);
                a[2 * h + k] = a[2 * h + k].tanh();
                a[3 * h + k] = sigmoid(a[3 * h + k]);
            }
            for k in 0..h {
                let prev_c = if t > 0 { tr.c.get(t - 1, k) } else { T::zero() };
                let g = tr.gates.row(t);
                let c = g[h + k] * prev_c + g[k] * g[2 * h + k];
                let tc = c.tanh();
                let o = g[3 * h + k];
                tr.c.set(t, k, c);
                tr.tanh_c.set(t, k, tc);
                tr.h.set(t, k, o * tc);
            }
        }
        tr
    }

    /// Backpropagates `dh` (gradient w.r.t. each `h_t`) through the
    /// sequence, accumulating into `grad` and `dx` (same shape as the input).
    pub fn backward(
        &self,
        tr: &CellTrace<T>,
        dh: &Matrix<T>,
        mask: Option<&[T]>,
        grad: &mut LstmCell<T>,
        dx: &mut Matrix<T>,
    ) {
        let n = tr.h.rows();
        let h = self.hidden();
        let inp = self.input_dim();
        let mut dh_next = vec![T::zero(); h];
        let mut dc_next = vec![T::zero(); h];
        let mut da = vec![T::zero(); 4 * h];
        let mut dz = vec![T::zero(); inp + h];
        for t in (0..n).rev() {
            let g = tr.gates.row(t);
            for k in 0..h {
                let dht = dh.get(t, k) + dh_next[k];
                let (i, f, cand, o) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
                let tc = tr.tanh_c.get(t, k);
                let dc = dht * o * (T::one() - tc * tc) + dc_next[k];
                let prev_c = if t > 0 { tr.c.get(t - 1, k) } else { T::zero() };
                da[k] = dc * cand * i * (T::one() - i);
                da[h + k] = dc * prev_c * f * (T::one() - f);
                da[2 * h + k] = dc * i * (T::one() - cand * cand);
                da[3 * h + k] = dht * tc * o * (T::one() - o);
                dc_next[k] = dc * f;
            }
            grad.w.outer_add(&da, tr.z.row(t));
            for (gb, &d) in grad.b.as_mut_slice().iter_mut().zip(&da) {
                *gb += d;
            }
            dz.iter_mut().for_each(|v| *v = T::zero());
            self.w.matvec_t_add(&da, &mut dz);
            for (o, &d) in dx.row_mut(t).iter_mut().zip(&dz[..inp]) {
                *o += d;
            }
            for k in 0..h {
                let d = dz[inp + k];
                dh_next[k] = match mask {
                    Some(m) => d * m[k],
                    None => d,
                };
            }
        }
    }
}

/// Inverted-dropout mask of width `h`: each unit is kept with probability
/// `1 - p` and scaled by `1 / (1 - p)`. `None` when `p` is zero.
pub(crate) fn dropout_mask<T: Scalar, R: Rng>(h: usize, p: f64, rng: &mut R) -> Option<Vec<T>> {
    if p <= 0.0 {
        return None;
    }
    let keep = T::lit(1.0 / (1.0 - p));
    Some(
        (0..h)
            .map(|_| {
                if rng.gen::<f64>() < p {
                    T::zero()
                } else {
                    keep
                }
            })
            .collect(),
    )
}

/// Runs a stack of cells, each reading the hidden states of the one below.
pub(crate) fn stack_forward<T: Scalar>(
    layers: &[LstmCell<T>],
    xs: &Matrix<T>,
    masks: &[Option<Vec<T>>],
) -> Vec<CellTrace<T>> {
    let mut traces: Vec<CellTrace<T>> = Vec::with_capacity(layers.len());
    for (l, cell) in layers.iter().enumerate() {
        let input = if l == 0 { xs } else { &traces[l - 1].h };
        let tr = cell.forward(input, masks[l].as_deref());
        traces.push(tr);
    }
    traces
}

/// Backward pass for [`stack_forward`]; `dh_top` is the gradient w.r.t. the
/// top layer's hidden states. Input gradients are added into `dx`.
pub(crate) fn stack_backward<T: Scalar>(
    layers: &[LstmCell<T>],
    traces: &[CellTrace<T>],
    dh_top: Matrix<T>,
    masks: &[Option<Vec<T>>],
    grads: &mut [LstmCell<T>],
    dx: &mut Matrix<T>,
) {
    let mut dh = dh_top;
    for l in (0..layers.len()).rev() {
        if l == 0 {
            layers[0].backward(&traces[0], &dh, masks[0].as_deref(), &mut grads[0], dx);
        } else {
            let mut below = Matrix::zeros(dh.rows(), layers[l].input_dim());
            layers[l].backward(
                &traces[l],
                &dh,
                masks[l].as_deref(),
                &mut grads[l],
                &mut below,
            );
            dh = below;
        }
    }
}

/// Rows of `m` in reverse order.
pub(crate) fn reversed<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for r in 0..m.rows() {
        out.row_mut(m.rows() - 1 - r).copy_from_slice(m.row(r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn loss(cell: &LstmCell<f64>, xs: &Matrix<f64>, w: &Matrix<f64>, mask: Option<&[f64]>) -> f64 {
        let tr = cell.forward(xs, mask);
        tr.h.as_slice()
            .iter()
            .zip(w.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cell = LstmCell::<f64>::init(3, 4, &mut rng);
        let xs = Matrix::uniform(5, 3, 1.0, &mut rng);
        let weights = Matrix::uniform(5, 4, 1.0, &mut rng);
        let mask = [2.0, 0.0, 2.0, 2.0];
        for mask in [None, Some(&mask[..])] {
            let tr = cell.forward(&xs, mask);
            let mut grad = LstmCell::zeros(3, 4);
            let mut dx = Matrix::zeros(5, 3);
            cell.backward(&tr, &weights, mask, &mut grad, &mut dx);

            let eps = 1e-6;
            let mut probe = cell.clone();
            for i in 0..cell.w.as_slice().len() {
                let orig = probe.w.as_slice()[i];
                probe.w.as_mut_slice()[i] = orig + eps;
                let up = loss(&probe, &xs, &weights, mask);
                probe.w.as_mut_slice()[i] = orig - eps;
                let down = loss(&probe, &xs, &weights, mask);
                probe.w.as_mut_slice()[i] = orig;
                let num = (up - down) / (2.0 * eps);
                assert!((num - grad.w.as_slice()[i]).abs() < 1e-7, "w[{i}]");
            }
            for i in 0..4 * 4 {
                let mut p = cell.clone();
                p.b.as_mut_slice()[i] += eps;
                let up = loss(&p, &xs, &weights, mask);
                p.b.as_mut_slice()[i] -= 2.0 * eps;
                let down = loss(&p, &xs, &weights, mask);
                assert!(((up - down) / (2.0 * eps) - grad.b.as_slice()[i]).abs() < 1e-7);
            }
            for i in 0..xs.as_slice().len() {
                let mut x = xs.clone();
                x.as_mut_slice()[i] += eps;
                let up = loss(&cell, &x, &weights, mask);
                x.as_mut_slice()[i] -= 2.0 * eps;
                let down = loss(&cell, &x, &weights, mask);
                assert!(((up - down) / (2.0 * eps) - dx.as_slice()[i]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn causal_in_processing_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cell = LstmCell::<f64>::init(2, 3, &mut rng);
        let xs = Matrix::uniform(4, 2, 1.0, &mut rng);
        let mut ys = xs.clone();
        ys.set(3, 0, 5.0);
        let a = cell.forward(&xs, None).h;
        let b = cell.forward(&ys, None).h;
        assert_eq!(a.row(0), b.row(0));
        assert_eq!(a.row(2), b.row(2));
        assert_ne!(a.row(3), b.row(3));
    }

    #[test]
    fn zero_weights_give_zero_states() {
        let cell = LstmCell::<f32>::zeros(2, 3);
        let tr = cell.forward(&Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]), None);
        assert!(tr.h.as_slice().iter().all(|&v| v == 0.0));
    }
}
