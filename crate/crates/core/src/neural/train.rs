use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{LstmConfig, LstmCrfModel, OutputLayer};
use crate::error::{Error, Result};
use crate::labeling::LabeledSequence;
use crate::optim::{clip_grad_norm, Optimizer, TrainConfig, TrainReport};
use crate::scalar::Scalar;
use crate::tensor::ParamSet;
use crate::title2vec::{build_vocab_from, BiLmModel};

/// BiLSTM with a CRF output layer. With `bilm`, its contextual vectors are
/// the frozen input; otherwise a table is trained over the training tokens.
pub fn train_lstm_crf<T: Scalar>(
    data: &[LabeledSequence],
    cfg: &TrainConfig,
    arch: &LstmConfig,
    bilm: Option<&BiLmModel<T>>,
) -> Result<(LstmCrfModel<T>, TrainReport)> {
    train(OutputLayer::Crf, data, cfg, arch, bilm)
}

/// Same network with a per-token softmax output and no transitions.
pub fn train_lstm_softmax<T: Scalar>(
    data: &[LabeledSequence],
    cfg: &TrainConfig,
    arch: &LstmConfig,
    bilm: Option<&BiLmModel<T>>,
) -> Result<(LstmCrfModel<T>, TrainReport)> {
    train(OutputLayer::Softmax, data, cfg, arch, bilm)
}

/// Fresh model for `data`, seeded by `cfg.seed`.
pub fn init_tagger<T: Scalar>(
    output: OutputLayer,
    data: &[LabeledSequence],
    cfg: &TrainConfig,
    arch: &LstmConfig,
    bilm: Option<&BiLmModel<T>>,
) -> Result<LstmCrfModel<T>> {
    match bilm {
        Some(b) => LstmCrfModel::with_title2vec(output, *arch, b.clone(), cfg.seed),
        None => {
            let vocab = build_vocab_from(data.iter().map(|s| s.tokens.as_slice()), 1)?;
            LstmCrfModel::with_table(output, *arch, vocab, cfg.seed)
        }
    }
}

fn train<T: Scalar>(
    output: OutputLayer,
    data: &[LabeledSequence],
    cfg: &TrainConfig,
    arch: &LstmConfig,
    bilm: Option<&BiLmModel<T>>,
) -> Result<(LstmCrfModel<T>, TrainReport)> {
    cfg.validate()?;
    arch.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if let Some(i) = data.iter().position(|s| s.is_empty()) {
        return Err(Error::InvalidArgument(format!(
            "training title {i} has no tokens"
        )));
    }
    let mut model = init_tagger(output, data, cfg, arch, bilm)?;
    let report = train_model(&mut model, data, cfg)?;
    Ok((model, report))
}

/// Continues training `model` in place. Each epoch shuffles the data with
/// a generator derived from `cfg.seed`.
pub fn train_model<T: Scalar>(
    model: &mut LstmCrfModel<T>,
    data: &[LabeledSequence],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5851_f42d_4c95_7f2d);
    let mut opt = Optimizer::<T>::new(cfg.optimizer, cfg.learning_rate);
    let golds: Vec<Vec<usize>> = data
        .iter()
        .map(|s| s.labels.iter().map(|l| l.index()).collect())
        .collect();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grad = model.params().zeros_like();
    let mut report = TrainReport::default();
    let kind = model.output().kind();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grad.fill_zero();
            let mut batch_loss = T::zero();
            for &i in batch {
                let (tokens, masks) = model.sample_noise(
                    &data[i].tokens,
                    cfg.word_dropout,
                    cfg.variational_dropout,
                    &mut rng,
                );
                batch_loss += model.accumulate(&tokens, &golds[i], &masks, &mut grad)?;
            }
            let loss = batch_loss.to_f64_lossy();
            if !loss.is_finite() || !grad.all_finite() {
                log::error!("{kind} diverged: epoch {epoch}, batch {b}, loss {loss}");
                return Err(Error::Diverged {
                    epoch,
                    batch: b,
                    loss,
                });
            }
            total += loss;
            grad.scale(T::one() / T::lit(batch.len() as f64));
            if let Some(c) = cfg.grad_clip {
                clip_grad_norm(&mut grad, c);
            }
            opt.apply(model.params_mut(), &grad);
            report.steps += 1;
        }
        let mean = total / data.len() as f64;
        log::info!("{kind} epoch {} loss {mean:.6}", epoch + 1);
        report.epoch_losses.push(mean);
    }
    Ok(report)
}
