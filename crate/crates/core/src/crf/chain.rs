//! Exact inference for a first-order linear chain over an emission matrix.
//!
//! Shared by the feature CRF and the neural CRF output layer. Emissions are
//! `n × L` (position × label); transitions are indexed `[from][to]`.

use crate::scalar::{log_sum_exp, Scalar};
use crate::tensor::{Matrix, ParamSet};

/// Label-transition scores plus start and stop vectors (`1 × L` each).
#[derive(Debug, Clone, PartialEq)]
pub struct Transitions<T> {
    pub matrix: Matrix<T>,
    pub start: Matrix<T>,
    pub stop: Matrix<T>,
}

impl<T: Scalar> Transitions<T> {
    pub fn zeros(labels: usize) -> Self {
        Self {
            matrix: Matrix::zeros(labels, labels),
            start: Matrix::zeros(1, labels),
            stop: Matrix::zeros(1, labels),
        }
    }

    pub fn labels(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn trans(&self, from: usize, to: usize) -> T {
        self.matrix.get(from, to)
    }

    #[inline]
    pub fn start(&self, y: usize) -> T {
        self.start.get(0, y)
    }

    #[inline]
    pub fn stop(&self, y: usize) -> T {
        self.stop.get(0, y)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks()
            .iter()
            .all(|(_, b)| b.as_slice().iter().all(|v| *v == T::zero()))
    }
}

impl<T: Scalar> ParamSet<T> for Transitions<T> {
    fn blocks(&self) -> Vec<(&'static str, &Matrix<T>)> {
        vec![
            ("transitions", &self.matrix),
            ("start", &self.start),
            ("stop", &self.stop),
        ]
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix<T>> {
        vec![&mut self.matrix, &mut self.start, &mut self.stop]
    }
}

/// Unnormalized log score of one label path.
pub fn path_score<T: Scalar>(em: &Matrix<T>, tr: &Transitions<T>, path: &[usize]) -> T {
    debug_assert_eq!(em.rows(), path.len());
    let mut s = tr.start(path[0]) + em.get(0, path[0]);
    for t in 1..path.len() {
        s += tr.trans(path[t - 1], path[t]) + em.get(t, path[t]);
    }
    s + tr.stop(path[path.len() - 1])
}

/// `alpha[t][y]`: log-sum of all prefixes ending in `y` at `t`, emission included.
fn forward<T: Scalar>(em: &Matrix<T>, tr: &Transitions<T>) -> Matrix<T> {
    let (n, l) = (em.rows(), em.cols());
    let mut alpha = Matrix::zeros(n, l);
    for y in 0..l {
        alpha.set(0, y, tr.start(y) + em.get(0, y));
    }
    let mut buf = vec![T::zero(); l];
    for t in 1..n {
        for y in 0..l {
            for (p, b) in buf.iter_mut().enumerate() {
                *b = alpha.get(t - 1, p) + tr.trans(p, y);
            }
            alpha.set(t, y, log_sum_exp(&buf) + em.get(t, y));
        }
    }
    alpha
}

/// `beta[t][y]`: log-sum of all suffixes after `t` given `y` at `t`, stop included.
fn backward<T: Scalar>(em: &Matrix<T>, tr: &Transitions<T>) -> Matrix<T> {
    let (n, l) = (em.rows(), em.cols());
    let mut beta = Matrix::zeros(n, l);
    for y in 0..l {
        beta.set(n - 1, y, tr.stop(y));
    }
    let mut buf = vec![T::zero(); l];
    for t in (0..n - 1).rev() {
        for y in 0..l {
            for (nx, b) in buf.iter_mut().enumerate() {
                *b = tr.trans(y, nx) + em.get(t + 1, nx) + beta.get(t + 1, nx);
            }
            beta.set(t, y, log_sum_exp(&buf));
        }
    }
    beta
}

fn log_z_from_alpha<T: Scalar>(alpha: &Matrix<T>, tr: &Transitions<T>) -> T {
    let n = alpha.rows();
    let last: Vec<T> = (0..alpha.cols())
        .map(|y| alpha.get(n - 1, y) + tr.stop(y))
        .collect();
    log_sum_exp(&last)
}

/// Log partition function by the forward recursion in log space.
pub fn log_partition<T: Scalar>(em: &Matrix<T>, tr: &Transitions<T>) -> T {
    log_z_from_alpha(&forward(em, tr), tr)
}

/// Per-position label marginals `P(y_t = y)`.
pub fn marginals<T: Scalar>(em: &Matrix<T>, tr: &Transitions<T>) -> Matrix<T> {
    let alpha = forward(em, tr);
    let beta = backward(em, tr);
    let log_z = log_z_from_alpha(&alpha, tr);
    let mut m = Matrix::zeros(em.rows(), em.cols());
    for t in 0..em.rows() {
        for y in 0..em.cols() {
            m.set(t, y, (alpha.get(t, y) + beta.get(t, y) - log_z).exp());
        }
    }
    m
}

/// Negative log-likelihood of `gold`.
///
/// Adds `∂loss/∂emissions` into `d_em` and, when given, `∂loss/∂transitions`
/// into `d_tr` (expected minus observed counts).
pub fn nll_grad<T: Scalar>(
    em: &Matrix<T>,
    tr: &Transitions<T>,
    gold: &[usize],
    d_em: &mut Matrix<T>,
    d_tr: Option<&mut Transitions<T>>,
) -> T {
    let (n, l) = (em.rows(), em.cols());
    let alpha = forward(em, tr);
    let beta = backward(em, tr);
    let log_z = log_z_from_alpha(&alpha, tr);

    for t in 0..n {
        for y in 0..l {
            let p = (alpha.get(t, y) + beta.get(t, y) - log_z).exp();
            d_em.add_at(t, y, p);
        }
        d_em.add_at(t, gold[t], -T::one());
    }

    if let Some(d_tr) = d_tr {
        for y in 0..l {
            let p0 = (alpha.get(0, y) + beta.get(0, y) - log_z).exp();
            d_tr.start.add_at(0, y, p0);
            let pn = (alpha.get(n - 1, y) + beta.get(n - 1, y) - log_z).exp();
            d_tr.stop.add_at(0, y, pn);
        }
        d_tr.start.add_at(0, gold[0], -T::one());
        d_tr.stop.add_at(0, gold[n - 1], -T::one());
        for t in 1..n {
            for a in 0..l {
                let base = alpha.get(t - 1, a) - log_z;
                for b in 0..l {
                    let lp = base + tr.trans(a, b) + em.get(t, b) + beta.get(t, b);
                    d_tr.matrix.add_at(a, b, lp.exp());
                }
            }
            d_tr.matrix.add_at(gold[t - 1], gold[t], -T::one());
        }
    }

    log_z - path_score(em, tr, gold)
}

/// Highest-scoring path and its score. Ties go to the lowest label index.
pub fn viterbi<T: Scalar>(em: &Matrix<T>, tr: &Transitions<T>) -> (Vec<usize>, T) {
    let (n, l) = (em.rows(), em.cols());
    let mut delta: Vec<T> = (0..l).map(|y| tr.start(y) + em.get(0, y)).collect();
    let mut back = vec![0usize; n * l];
    let mut next = vec![T::zero(); l];
    for t in 1..n {
        for y in 0..l {
            let mut best = 0;
            let mut best_score = delta[0] + tr.trans(0, y);
            for p in 1..l {
                let s = delta[p] + tr.trans(p, y);
                if s > best_score {
                    best = p;
                    best_score = s;
                }
            }
            back[t * l + y] = best;
            next[y] = best_score + em.get(t, y);
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut last = 0;
    let mut best_score = delta[0] + tr.stop(0);
    for y in 1..l {
        let s = delta[y] + tr.stop(y);
        if s > best_score {
            last = y;
            best_score = s;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = back[t * l + path[t]];
    }
    (path, best_score)
}
