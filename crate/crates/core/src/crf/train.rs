use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::word_dropout;
use super::model::{CrfKind, CrfModel};
use crate::error::{Error, Result};
use crate::gazetteer::Gazetteer;
use crate::labeling::LabeledSequence;
use crate::optim::{clip_grad_norm, Optimizer, TrainConfig, TrainReport};
use crate::scalar::Scalar;
use crate::tensor::ParamSet;

/// Mini-batch training of a linear-chain CRF. The loss of a batch is the
/// mean per-title negative log-likelihood. The feature vocab grows as new
/// features are met and is frozen on return.
pub fn train_crf<T: Scalar>(
    data: &[LabeledSequence],
    cfg: &TrainConfig,
    gazetteer: Option<&Gazetteer>,
) -> Result<(CrfModel<T>, TrainReport)> {
    train(CrfKind::Crf, data, cfg, gazetteer)
}

/// Same pipeline as [`train_crf`] with transitions pinned at zero.
pub fn train_logreg<T: Scalar>(
    data: &[LabeledSequence],
    cfg: &TrainConfig,
    gazetteer: Option<&Gazetteer>,
) -> Result<(CrfModel<T>, TrainReport)> {
    train(CrfKind::LogReg, data, cfg, gazetteer)
}

fn train<T: Scalar>(
    kind: CrfKind,
    data: &[LabeledSequence],
    cfg: &TrainConfig,
    gazetteer: Option<&Gazetteer>,
) -> Result<(CrfModel<T>, TrainReport)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if let Some(i) = data.iter().position(|s| s.is_empty()) {
        return Err(Error::InvalidArgument(format!(
            "training title {i} has no tokens"
        )));
    }
    let mut model = CrfModel::<T>::new(kind, gazetteer.cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = Optimizer::<T>::new(cfg.optimizer, cfg.learning_rate);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let golds: Vec<Vec<usize>> = data
        .iter()
        .map(|s| s.labels.iter().map(|l| l.index()).collect())
        .collect();
    let mut report = TrainReport::default();
    let mut grad = model.params().zeros_like();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let ids: Vec<_> = batch
                .iter()
                .map(|&i| {
                    let tokens = word_dropout(&data[i].tokens, cfg.word_dropout, &mut rng);
                    model.intern(&tokens)
                })
                .collect();
            grad.emission.grow_rows(model.vocab().len());
            grad.fill_zero();
            let mut batch_loss = T::zero();
            for (ids, &i) in ids.iter().zip(batch) {
                batch_loss += model.accumulate(ids, &golds[i], &mut grad);
            }
            let batch_loss = batch_loss.to_f64_lossy();
            if !batch_loss.is_finite() || !grad.all_finite() {
                log::error!("{kind} diverged: epoch {epoch}, batch {b}, loss {batch_loss}");
                return Err(Error::Diverged {
                    epoch,
                    batch: b,
                    loss: batch_loss,
                });
            }
            total += batch_loss;
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
    model.freeze();
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synth_corpus;
    use crate::labeling::{auto_tag, auto_tag_tokens};
    use crate::optim::OptimizerKind;

    fn example(s: &str) -> LabeledSequence {
        let t: Vec<String> = s.split_whitespace().map(String::from).collect();
        auto_tag_tokens(&t, &Gazetteer::builtin()).unwrap()
    }

    fn synth_data(seed: u64, n: usize) -> Vec<LabeledSequence> {
        let g = Gazetteer::builtin();
        synth_corpus(&g, seed, n)
            .unwrap()
            .titles
            .iter()
            .map(|t| auto_tag(t, &g).unwrap())
            .collect()
    }

    #[test]
    fn memorizes_repeated_example() {
        let data = vec![example("senior vice president of global sales apac"); 10];
        let cfg = TrainConfig {
            batch_size: 1,
            epochs: 50,
            word_dropout: 0.0,
            ..TrainConfig::crf_defaults()
        };
        let (_, report) = train_crf::<f64>(&data, &cfg, None).unwrap();
        assert!(
            report.final_loss().unwrap() < 0.01,
            "{:?}",
            report.final_loss()
        );
    }

    #[test]
    fn seeded_training_is_bitwise_reproducible() {
        let data = synth_data(5, 200);
        let cfg = TrainConfig {
            epochs: 2,
            seed: 11,
            ..TrainConfig::crf_defaults()
        };
        let g = Gazetteer::builtin();
        let (a, ra) = train_crf::<f32>(&data, &cfg, Some(&g)).unwrap();
        let (b, rb) = train_crf::<f32>(&data, &cfg, Some(&g)).unwrap();
        assert_eq!(a.to_file().to_bytes(), b.to_file().to_bytes());
        assert_eq!(ra, rb);
        let (c, _) = train_crf::<f32>(&data, &TrainConfig { seed: 12, ..cfg }, Some(&g)).unwrap();
        assert_ne!(a.to_file().to_bytes(), c.to_file().to_bytes());
    }

    #[test]
    fn loss_trends_down() {
        let data = synth_data(6, 400);
        let cfg = TrainConfig {
            epochs: 5,
            ..TrainConfig::crf_defaults()
        };
        let (_, r) = train_crf::<f64>(&data, &cfg, Some(&Gazetteer::builtin())).unwrap();
        let l = &r.epoch_losses;
        assert!(l[l.len() - 1] < l[0] * 0.5, "{l:?}");
        for w in l.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "{l:?}");
        }
    }

    #[test]
    fn logreg_fits_gazetteer_labels() {
        let g = Gazetteer::builtin();
        let train = synth_data(8, 1500);
        let test = synth_data(9, 300);
        let cfg = TrainConfig {
            epochs: 8,
            ..TrainConfig::crf_defaults()
        };
        let (m, _) = train_logreg::<f32>(&train, &cfg, Some(&g)).unwrap();
        assert!(m.params().transitions.is_zero());
        let (mut right, mut total) = (0, 0);
        for ex in &test {
            let pred = m.viterbi_decode(&ex.tokens).unwrap();
            right += pred.iter().zip(&ex.labels).filter(|(a, b)| a == b).count();
            total += ex.len();
        }
        let acc = right as f64 / total as f64;
        assert!(acc >= 0.99, "token accuracy {acc}");
    }

    #[test]
    fn adam_trains_too() {
        let data = synth_data(2, 100);
        let cfg = TrainConfig {
            optimizer: OptimizerKind::Adam,
            learning_rate: 0.01,
            epochs: 3,
            ..TrainConfig::crf_defaults()
        };
        let (_, r) = train_crf::<f64>(&data, &cfg, None).unwrap();
        assert!(r.epoch_losses[2] < r.epoch_losses[0]);
    }

    #[test]
    fn divergence_is_reported() {
        let data = vec![example("sales manager"); 4];
        let cfg = TrainConfig {
            learning_rate: 1e300,
            epochs: 5,
            batch_size: 1,
            word_dropout: 0.0,
            ..TrainConfig::crf_defaults()
        };
        let err = train_crf::<f32>(&data, &cfg, None).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }

    #[test]
    fn empty_training_set_is_rejected() {
        assert!(matches!(
            train_crf::<f64>(&[], &TrainConfig::default(), None),
            Err(Error::Empty(_))
        ));
    }
}
