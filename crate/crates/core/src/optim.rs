//! Training hyperparameters and first-order optimizers.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptimizerKind {
    /// Plain SGD, no momentum.
    Sgd,
    Adam,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::InvalidArgument(format!(
                "unknown optimizer '{other}'"
            ))),
        }
    }
}

/// Hyperparameters shared by every trainer.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Probability of replacing an input token with the UNK sentinel.
    pub word_dropout: f64,
    /// Probability of dropping a recurrent hidden unit (one mask per
    /// sequence and direction). Ignored by the CRF.
    pub variational_dropout: f64,
    /// Global gradient-norm clipping threshold; `None` disables clipping.
    pub grad_clip: Option<f64>,
}

impl TrainConfig {
    /// Final CRF settings: lr 0.1, mini-batch 32, SGD, dropouts 0.05 / 0.5.
    pub fn crf_defaults() -> Self {
        Self {
            learning_rate: 0.1,
            batch_size: 32,
            epochs: 10,
            optimizer: OptimizerKind::Sgd,
            seed: 0,
            word_dropout: 0.05,
            variational_dropout: 0.5,
            grad_clip: None,
        }
    }

    /// Final LSTM-CRF settings: lr 0.1, mini-batch 128, SGD, dropouts 0.05 / 0.5.
    pub fn lstm_crf_defaults() -> Self {
        Self {
            batch_size: 128,
            grad_clip: Some(5.0),
            ..Self::crf_defaults()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be >= 1".into()));
        }
        for (name, p) in [
            ("word_dropout", self.word_dropout),
            ("variational_dropout", self.variational_dropout),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be in [0, 1), got {p}"
                )));
            }
        }
        if let Some(c) = self.grad_clip {
            if !(c > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "grad_clip must be > 0, got {c}"
                )));
            }
        }
        Ok(())
    }
}

impl TrainConfig {
    /// Sets one hyperparameter by name. Returns `Ok(false)` for keys that
    /// belong to no field here. `grad_clip=none` disables clipping.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "lr" | "learning_rate" => self.learning_rate = parse_value(key, value)?,
            "batch" | "batch_size" => self.batch_size = parse_value(key, value)?,
            "epochs" => self.epochs = parse_value(key, value)?,
            "optimizer" => self.optimizer = value.parse()?,
            "seed" => self.seed = parse_value(key, value)?,
            "word_dropout" => self.word_dropout = parse_value(key, value)?,
            "variational_dropout" => self.variational_dropout = parse_value(key, value)?,
            "grad_clip" => {
                self.grad_clip = match value {
                    "none" | "off" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            _ => return Ok(false),
        }
        Ok(true)
    }
}

pub(crate) fn parse_value<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value for {key}: '{value}'")))
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::crf_defaults()
    }
}

/// Mean training loss per epoch, in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    pub steps: usize,
}

impl TrainReport {
    pub fn final_loss(&self) -> Option<f64> {
        self.epoch_losses.last().copied()
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Stateful optimizer over a [`ParamSet`]. Block sizes may grow between
/// steps (the CRF extends its feature table during training).
#[derive(Debug, Clone)]
pub struct Optimizer<T> {
    kind: OptimizerKind,
    lr: T,
    step: i32,
    first: Vec<Vec<T>>,
    second: Vec<Vec<T>>,
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Self {
            kind,
            lr: T::lit(learning_rate),
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn apply<P: ParamSet<T>>(&mut self, params: &mut P, grad: &P) {
        let grads = grad.blocks();
        let mut blocks = params.blocks_mut();
        debug_assert_eq!(blocks.len(), grads.len());
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, (_, g)) in blocks.iter_mut().zip(&grads) {
                    for (w, &d) in p.as_mut_slice().iter_mut().zip(g.as_slice()) {
                        *w -= self.lr * d;
                    }
                }
            }
            OptimizerKind::Adam => {
                self.step += 1;
                if self.first.len() < blocks.len() {
                    self.first.resize(blocks.len(), Vec::new());
                    self.second.resize(blocks.len(), Vec::new());
                }
                let b1 = T::lit(ADAM_BETA1);
                let b2 = T::lit(ADAM_BETA2);
                let eps = T::lit(ADAM_EPS);
                let c1 = T::one() - b1.powi(self.step);
                let c2 = T::one() - b2.powi(self.step);
                for (k, (p, (_, g))) in blocks.iter_mut().zip(&grads).enumerate() {
                    let n = p.as_slice().len();
                    self.first[k].resize(n, T::zero());
                    self.second[k].resize(n, T::zero());
                    let (m, v) = (&mut self.first[k], &mut self.second[k]);
                    for (i, (w, &d)) in p.as_mut_slice().iter_mut().zip(g.as_slice()).enumerate() {
                        m[i] = b1 * m[i] + (T::one() - b1) * d;
                        v[i] = b2 * v[i] + (T::one() - b2) * d * d;
                        let mh = m[i] / c1;
                        let vh = v[i] / c2;
                        *w -= self.lr * mh / (vh.sqrt() + eps);
                    }
                }
            }
        }
    }
}

/// Rescales `grad` so its global L2 norm is at most `max_norm`; returns the
/// norm before clipping.
pub fn clip_grad_norm<T: Scalar, P: ParamSet<T>>(grad: &mut P, max_norm: f64) -> f64 {
    let norm = grad.sq_norm().to_f64_lossy().sqrt();
    if norm > max_norm {
        grad.scale(T::lit(max_norm / norm));
    }
    norm
}
