use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::vocab::{build_vocab, Vocab};
use crate::container::ModelFile;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::neural::cell::{dropout_mask, stack_backward, stack_forward, CellTrace};
use crate::neural::LstmCell;
use crate::optim::{clip_grad_norm, Optimizer, TrainConfig, TrainReport};
use crate::scalar::{log_sum_exp, Scalar};
use crate::tensor::{Matrix, ParamSet};

/// Embedding width `D`, hidden size `H` and layer count `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BiLmDims {
    pub embedding: usize,
    pub hidden: usize,
    pub layers: usize,
}

impl BiLmDims {
    /// `1024 + 2·512·2 = 3072`.
    pub const FULL_SCALE: BiLmDims = BiLmDims {
        embedding: 1024,
        hidden: 512,
        layers: 2,
    };

    pub fn new(embedding: usize, hidden: usize, layers: usize) -> Result<Self> {
        if embedding == 0 || hidden == 0 || layers == 0 {
            return Err(Error::InvalidArgument(format!(
                "biLM dimensions must be positive, got D={embedding} H={hidden} L={layers}"
            )));
        }
        Ok(Self {
            embedding,
            hidden,
            layers,
        })
    }

    /// Width of a contextual token vector, `D + 2·H·L`.
    pub fn contextual_dim(&self) -> usize {
        self.embedding + 2 * self.hidden * self.layers
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiLmParams<T> {
    /// Shared input table, `V × D`.
    pub embedding: Matrix<T>,
    pub fwd: Vec<LstmCell<T>>,
    pub bwd: Vec<LstmCell<T>>,
    /// `V × H` each.
    pub fwd_out: Matrix<T>,
    pub fwd_bias: Matrix<T>,
    pub bwd_out: Matrix<T>,
    pub bwd_bias: Matrix<T>,
}

impl<T: Scalar> ParamSet<T> for BiLmParams<T> {
    fn blocks(&self) -> Vec<(&'static str, &Matrix<T>)> {
        let mut b = vec![("embedding", &self.embedding)];
        for c in &self.fwd {
            b.push(("fwd.w", &c.w));
            b.push(("fwd.b", &c.b));
        }
        for c in &self.bwd {
            b.push(("bwd.w", &c.w));
            b.push(("bwd.b", &c.b));
        }
        b.extend([
            ("fwd_out", &self.fwd_out),
            ("fwd_bias", &self.fwd_bias),
            ("bwd_out", &self.bwd_out),
            ("bwd_bias", &self.bwd_bias),
        ]);
        b
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix<T>> {
        let mut b = vec![&mut self.embedding];
        for c in self.fwd.iter_mut().chain(self.bwd.iter_mut()) {
            b.push(&mut c.w);
            b.push(&mut c.b);
        }
        b.extend([
            &mut self.fwd_out,
            &mut self.fwd_bias,
            &mut self.bwd_out,
            &mut self.bwd_bias,
        ]);
        b
    }
}

/// Pair of LSTM language models over a shared input embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLmModel<T> {
    vocab: Vocab,
    dims: BiLmDims,
    params: BiLmParams<T>,
}

struct DirectionPass<T> {
    traces: Vec<CellTrace<T>>,
    /// Softmax over the vocab per input position.
    probs: Matrix<T>,
    loss: T,
}

impl<T: Scalar> BiLmModel<T> {
    /// Random initialization: embeddings in `±0.1`, cells in `±1/sqrt(H)`,
    /// output projections in `±1/sqrt(H)` with zero bias.
    pub fn new(vocab: Vocab, dims: BiLmDims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = vocab.len();
        let (d, h) = (dims.embedding, dims.hidden);
        let embedding = Matrix::uniform(v, d, 0.1, &mut rng);
        let stack = |rng: &mut ChaCha8Rng| {
            (0..dims.layers)
                .map(|l| LstmCell::init(if l == 0 { d } else { h }, h, rng))
                .collect::<Vec<_>>()
        };
        let fwd = stack(&mut rng);
        let bwd = stack(&mut rng);
        let bound = 1.0 / (h as f64).sqrt();
        let fwd_out = Matrix::uniform(v, h, bound, &mut rng);
        let bwd_out = Matrix::uniform(v, h, bound, &mut rng);
        Self {
            vocab,
            dims,
            params: BiLmParams {
                embedding,
                fwd,
                bwd,
                fwd_out,
                fwd_bias: Matrix::zeros(1, v),
                bwd_out,
                bwd_bias: Matrix::zeros(1, v),
            },
        }
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn dims(&self) -> BiLmDims {
        self.dims
    }

    pub fn params(&self) -> &BiLmParams<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut BiLmParams<T> {
        &mut self.params
    }

    pub fn contextual_dim(&self) -> usize {
        self.dims.contextual_dim()
    }

    /// Input and target ids for one direction. Inputs start with the
    /// direction's opening sentinel; targets end with its closing one.
    fn direction_ids(ids: &[usize], dir: Direction) -> (Vec<usize>, Vec<usize>) {
        let seq: Vec<usize> = match dir {
            Direction::Forward => ids.to_vec(),
            Direction::Backward => ids.iter().rev().copied().collect(),
        };
        let (open, close) = match dir {
            Direction::Forward => (Vocab::BOS_ID, Vocab::EOS_ID),
            Direction::Backward => (Vocab::EOS_ID, Vocab::BOS_ID),
        };
        let mut input = vec![open];
        input.extend(&seq);
        let mut target = seq;
        target.push(close);
        (input, target)
    }

    fn parts(&self, dir: Direction) -> (&[LstmCell<T>], &Matrix<T>, &Matrix<T>) {
        match dir {
            Direction::Forward => (
                &self.params.fwd,
                &self.params.fwd_out,
                &self.params.fwd_bias,
            ),
            Direction::Backward => (
                &self.params.bwd,
                &self.params.bwd_out,
                &self.params.bwd_bias,
            ),
        }
    }

    fn lookup(&self, ids: &[usize]) -> Matrix<T> {
        let mut xs = Matrix::zeros(ids.len(), self.dims.embedding);
        for (t, &id) in ids.iter().enumerate() {
            xs.row_mut(t).copy_from_slice(self.params.embedding.row(id));
        }
        xs
    }

    fn run(
        &self,
        dir: Direction,
        input: &[usize],
        target: &[usize],
        masks: &[Option<Vec<T>>],
    ) -> DirectionPass<T> {
        let (layers, out, bias) = self.parts(dir);
        let traces = stack_forward(layers, &self.lookup(input), masks);
        let top = &traces[traces.len() - 1].h;
        let v = self.vocab.len();
        let mut probs = Matrix::zeros(input.len(), v);
        let mut loss = T::zero();
        for t in 0..input.len() {
            let row = probs.row_mut(t);
            row.copy_from_slice(bias.as_slice());
            out.matvec_add(top.row(t), row);
            let lse = log_sum_exp(row);
            loss += lse - row[target[t]];
            for p in row.iter_mut() {
                *p = (*p - lse).exp();
            }
        }
        DirectionPass {
            traces,
            probs,
            loss,
        }
    }

    /// Per-position log-distributions over the vocab. Row `t < n` scores
    /// the token at position `t` given only the tokens before it
    /// (forward) or after it (backward); row `n` scores the closing
    /// sentinel.
    pub fn log_probs(&self, tokens: &[String], dir: Direction) -> Result<Matrix<T>> {
        non_empty(tokens)?;
        let ids = self.vocab.encode(tokens);
        let (input, target) = Self::direction_ids(&ids, dir);
        let masks = vec![None; self.dims.layers];
        let pass = self.run(dir, &input, &target, &masks);
        let n = tokens.len();
        let mut out = Matrix::zeros(n + 1, self.vocab.len());
        for j in 0..=n {
            let pos = match dir {
                Direction::Forward => j,
                Direction::Backward if j == n => n,
                Direction::Backward => n - 1 - j,
            };
            for (o, &p) in out.row_mut(pos).iter_mut().zip(pass.probs.row(j)) {
                *o = p.ln();
            }
        }
        Ok(out)
    }

    /// Contextual vectors, one row per token: the input embedding, then
    /// every forward layer's state, then every backward layer's state.
    pub fn embed_title(&self, tokens: &[String]) -> Result<Matrix<T>> {
        non_empty(tokens)?;
        let n = tokens.len();
        let ids = self.vocab.encode(tokens);
        let (d, h, layers) = (self.dims.embedding, self.dims.hidden, self.dims.layers);
        let masks = vec![None; layers];
        let mut out = Matrix::zeros(n, self.contextual_dim());
        for (t, &id) in ids.iter().enumerate() {
            out.row_mut(t)[..d].copy_from_slice(self.params.embedding.row(id));
        }
        for (k, dir) in [Direction::Forward, Direction::Backward]
            .into_iter()
            .enumerate()
        {
            let (input, _) = Self::direction_ids(&ids, dir);
            let (cells, _, _) = self.parts(dir);
            let traces = stack_forward(cells, &self.lookup(&input), &masks);
            for (l, tr) in traces.iter().enumerate() {
                let off = d + (k * layers + l) * h;
                for t in 0..n {
                    // state after reading token t
                    let j = match dir {
                        Direction::Forward => t + 1,
                        Direction::Backward => n - t,
                    };
                    out.row_mut(t)[off..off + h].copy_from_slice(tr.h.row(j));
                }
            }
        }
        Ok(out)
    }

    /// Summed cross-entropy of both directions for one title, with the
    /// gradient added into `grad`. Returns the loss and the prediction count.
    fn accumulate(
        &self,
        input_ids: &[usize],
        target_ids: &[usize],
        masks: &[Vec<Option<Vec<T>>>; 2],
        grad: &mut BiLmParams<T>,
    ) -> (T, usize) {
        let mut total = T::zero();
        let mut count = 0;
        for (k, dir) in [Direction::Forward, Direction::Backward]
            .into_iter()
            .enumerate()
        {
            let (input, _) = Self::direction_ids(input_ids, dir);
            let (_, target) = Self::direction_ids(target_ids, dir);
            let pass = self.run(dir, &input, &target, &masks[k]);
            total += pass.loss;
            count += input.len();
            let (cells, out, _) = self.parts(dir);
            let top = &pass.traces[pass.traces.len() - 1].h;
            let mut dh = Matrix::zeros(input.len(), self.dims.hidden);
            let (g_cells, g_out, g_bias) = match dir {
                Direction::Forward => (&mut grad.fwd, &mut grad.fwd_out, &mut grad.fwd_bias),
                Direction::Backward => (&mut grad.bwd, &mut grad.bwd_out, &mut grad.bwd_bias),
            };
            let mut dlogits = vec![T::zero(); self.vocab.len()];
            for t in 0..input.len() {
                dlogits.copy_from_slice(pass.probs.row(t));
                dlogits[target[t]] -= T::one();
                g_out.outer_add(&dlogits, top.row(t));
                for (b, &d) in g_bias.as_mut_slice().iter_mut().zip(&dlogits) {
                    *b += d;
                }
                out.matvec_t_add(&dlogits, dh.row_mut(t));
            }
            let mut dx = Matrix::zeros(input.len(), self.dims.embedding);
            stack_backward(cells, &pass.traces, dh, &masks[k], g_cells, &mut dx);
            for (t, &id) in input.iter().enumerate() {
                for (e, &d) in grad.embedding.row_mut(id).iter_mut().zip(dx.row(t)) {
                    *e += d;
                }
            }
        }
        (total, count)
    }

    /// Summed forward and backward cross-entropy of one title and its
    /// gradient, without dropout.
    pub fn nll_and_gradient(&self, tokens: &[String]) -> Result<(T, BiLmParams<T>)> {
        non_empty(tokens)?;
        let ids = self.vocab.encode(tokens);
        let none = vec![None; self.dims.layers];
        let masks = [none.clone(), none];
        let mut grad = self.params.zeros_like();
        let (loss, _) = self.accumulate(&ids, &ids, &masks, &mut grad);
        Ok((loss, grad))
    }

    /// `exp` of the mean per-token cross-entropy over both directions.
    pub fn perplexity<S: AsRef<[String]>>(&self, titles: &[S]) -> Result<f64> {
        let mut total = 0.0;
        let mut count = 0usize;
        for t in titles {
            let t = t.as_ref();
            if t.is_empty() {
                continue;
            }
            let ids = self.vocab.encode(t);
            let masks = vec![None; self.dims.layers];
            for dir in [Direction::Forward, Direction::Backward] {
                let (input, target) = Self::direction_ids(&ids, dir);
                total += self.run(dir, &input, &target, &masks).loss.to_f64_lossy();
                count += input.len();
            }
        }
        if count == 0 {
            return Err(Error::Empty("evaluation titles"));
        }
        Ok((total / count as f64).exp())
    }

    pub fn to_file(&self) -> ModelFile {
        let mut f = ModelFile::new("bilm");
        f.push_meta("format", 1);
        f.push_meta("embedding", self.dims.embedding);
        f.push_meta("hidden", self.dims.hidden);
        f.push_meta("layers", self.dims.layers);
        f.push_meta("min_count", self.vocab.min_count());
        f.push_list("vocab", self.vocab.tokens()[3..].to_vec());
        f.push_tensor("embedding", &self.params.embedding);
        for (name, cells) in [("fwd", &self.params.fwd), ("bwd", &self.params.bwd)] {
            for (l, c) in cells.iter().enumerate() {
                f.push_tensor(&format!("{name}.{l}.w"), &c.w);
                f.push_tensor(&format!("{name}.{l}.b"), &c.b);
            }
        }
        f.push_tensor("fwd_out", &self.params.fwd_out);
        f.push_tensor("fwd_bias", &self.params.fwd_bias);
        f.push_tensor("bwd_out", &self.params.bwd_out);
        f.push_tensor("bwd_bias", &self.params.bwd_bias);
        f
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        file.expect_kind(&["bilm"])?;
        let dims = BiLmDims::new(
            file.meta_parse("embedding")?,
            file.meta_parse("hidden")?,
            file.meta_parse("layers")?,
        )?;
        let vocab = Vocab::from_tokens(
            file.list("vocab")?.iter().cloned(),
            file.meta_parse("min_count")?,
        )?;
        let (v, d, h) = (vocab.len(), dims.embedding, dims.hidden);
        let cells = |name: &str| {
            (0..dims.layers)
                .map(|l| {
                    let inp = if l == 0 { d } else { h };
                    Ok(LstmCell {
                        w: file.tensor(&format!("{name}.{l}.w"), 4 * h, inp + h)?,
                        b: file.tensor(&format!("{name}.{l}.b"), 1, 4 * h)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        };
        let params = BiLmParams {
            embedding: file.tensor("embedding", v, d)?,
            fwd: cells("fwd")?,
            bwd: cells("bwd")?,
            fwd_out: file.tensor("fwd_out", v, h)?,
            fwd_bias: file.tensor("fwd_bias", 1, v)?,
            bwd_out: file.tensor("bwd_out", v, h)?,
            bwd_bias: file.tensor("bwd_bias", 1, v)?,
        };
        Ok(Self {
            vocab,
            dims,
            params,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_file().save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_file(&ModelFile::load(path)?)
    }

    /// Hex SHA-256 of the serialized model; embedding files and taggers
    /// built on this model record it.
    pub fn content_hash(&self) -> String {
        self.to_file().content_hash()
    }
}

fn non_empty(tokens: &[String]) -> Result<()> {
    if tokens.is_empty() {
        Err(Error::Empty("token sequence"))
    } else {
        Ok(())
    }
}

/// Trains a biLM on `corpus` with a vocab of every corpus token. A batch's
/// loss is the summed cross-entropy of its titles divided by the batch size.
/// The report's per-epoch losses are mean per-token cross-entropies over
/// both directions, so `exp` of each is the epoch's training perplexity.
pub fn train_bilm<T: Scalar>(
    corpus: &Corpus,
    dims: BiLmDims,
    cfg: &TrainConfig,
) -> Result<(BiLmModel<T>, TrainReport)> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    let vocab = build_vocab(corpus, 1)?;
    let mut model = BiLmModel::<T>::new(vocab, dims, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let data: Vec<Vec<usize>> = corpus
        .titles
        .iter()
        .map(|t| model.vocab.encode(&t.tokens))
        .collect();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut opt = Optimizer::<T>::new(cfg.optimizer, cfg.learning_rate);
    let mut grad = model.params.zeros_like();
    let mut report = TrainReport::default();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut total, mut count) = (0.0, 0usize);
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grad.fill_zero();
            let mut batch_loss = T::zero();
            for &i in batch {
                let target = &data[i];
                let input: Vec<usize> = target
                    .iter()
                    .map(|&id| {
                        if rng.gen::<f64>() < cfg.word_dropout {
                            Vocab::UNK_ID
                        } else {
                            id
                        }
                    })
                    .collect();
                let masks = [0, 1].map(|_| {
                    (0..dims.layers)
                        .map(|_| dropout_mask(dims.hidden, cfg.variational_dropout, &mut rng))
                        .collect::<Vec<_>>()
                });
                let (loss, n) = model.accumulate(&input, target, &masks, &mut grad);
                batch_loss += loss;
                count += n;
            }
            let loss = batch_loss.to_f64_lossy();
            if !loss.is_finite() || !grad.all_finite() {
                log::error!("bilm diverged: epoch {epoch}, batch {b}, loss {loss}");
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
            opt.apply(&mut model.params, &grad);
            report.steps += 1;
        }
        let mean = total / count as f64;
        log::info!("bilm epoch {} perplexity {:.4}", epoch + 1, mean.exp());
        report.epoch_losses.push(mean);
    }
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synth_corpus;
    use crate::gazetteer::Gazetteer;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn tiny_model(seed: u64) -> BiLmModel<f64> {
        let c = Corpus::from_raw_lines(["sales manager", "senior sales director asia", "cto"], "t");
        let v = build_vocab(&c, 1).unwrap();
        BiLmModel::new(v, BiLmDims::new(4, 4, 2).unwrap(), seed)
    }

    #[test]
    fn contextual_dimension_contract() {
        let c = Corpus::from_raw_lines(["a b c"], "t");
        let v = build_vocab(&c, 1).unwrap();
        for (d, h, l) in [(8, 16, 1), (4, 4, 2), (3, 5, 3)] {
            let m = BiLmModel::<f32>::new(v.clone(), BiLmDims::new(d, h, l).unwrap(), 0);
            let e = m.embed_title(&toks("a b c")).unwrap();
            assert_eq!(e.cols(), d + 2 * h * l);
            assert_eq!(e.rows(), 3);
        }
        assert_eq!(BiLmDims::new(8, 16, 1).unwrap().contextual_dim(), 40);
        assert_eq!(BiLmDims::FULL_SCALE.contextual_dim(), 3072);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = tiny_model(3);
        let t = toks("senior sales unknownword");
        let (_, grad) = m.nll_and_gradient(&t).unwrap();
        let h = 1e-6;
        let mut probe = m.clone();
        let nblocks = grad.blocks().len();
        let (mut diff, mut norm_a, mut norm_n) = (0.0, 0.0, 0.0);
        for b in 0..nblocks {
            let len = grad.blocks()[b].1.as_slice().len();
            let (mut bd, mut ba) = (0.0, 0.0);
            for i in 0..len {
                let orig = probe.params.blocks()[b].1.as_slice()[i];
                probe.params.blocks_mut()[b].as_mut_slice()[i] = orig + h;
                let up = probe.nll_and_gradient(&t).unwrap().0;
                probe.params.blocks_mut()[b].as_mut_slice()[i] = orig - h;
                let down = probe.nll_and_gradient(&t).unwrap().0;
                probe.params.blocks_mut()[b].as_mut_slice()[i] = orig;
                let num = (up - down) / (2.0 * h);
                let ana = grad.blocks()[b].1.as_slice()[i];
                bd += (num - ana) * (num - ana);
                ba += ana * ana;
                diff += (num - ana) * (num - ana);
                norm_a += ana * ana;
                norm_n += num * num;
            }
            let name = grad.blocks()[b].0;
            assert!(bd.sqrt() <= 1e-3 * ba.sqrt().max(1e-8), "block {name}");
        }
        assert!(diff.sqrt() / norm_a.sqrt().max(norm_n.sqrt()) < 1e-3);
    }

    #[test]
    fn direction_causality() {
        let m = tiny_model(5);
        let a = toks("senior sales director asia");
        let mut b = a.clone();
        b[2] = "cto".into();
        let fa = m.log_probs(&a, Direction::Forward).unwrap();
        let fb = m.log_probs(&b, Direction::Forward).unwrap();
        // forward rows 0..=2 only see tokens before position 2
        for t in 0..=2 {
            assert_eq!(fa.row(t), fb.row(t));
        }
        assert_ne!(fa.row(3), fb.row(3));
        let ba = m.log_probs(&a, Direction::Backward).unwrap();
        let bb = m.log_probs(&b, Direction::Backward).unwrap();
        for t in 2..4 {
            assert_eq!(ba.row(t), bb.row(t));
        }
        assert_ne!(ba.row(1), bb.row(1));
        assert_ne!(ba.row(4), bb.row(4));
    }

    #[test]
    fn log_probs_normalize() {
        let m = tiny_model(1);
        let lp = m
            .log_probs(&toks("sales manager"), Direction::Backward)
            .unwrap();
        for r in 0..lp.rows() {
            let s: f64 = lp.row(r).iter().map(|v| v.exp()).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    fn toy_corpus() -> Corpus {
        synth_corpus(&Gazetteer::builtin(), 17, 50).unwrap()
    }

    fn toy_cfg() -> TrainConfig {
        TrainConfig {
            learning_rate: 0.5,
            batch_size: 4,
            epochs: 5,
            word_dropout: 0.0,
            variational_dropout: 0.0,
            grad_clip: Some(5.0),
            seed: 1,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn perplexity_drops_below_uniform() {
        let c = toy_corpus();
        let dims = BiLmDims::new(16, 16, 1).unwrap();
        let (m, r) = train_bilm::<f64>(&c, dims, &toy_cfg()).unwrap();
        let v = m.vocab().len() as f64;
        let ppl = r.epoch_losses.iter().map(|l| l.exp()).collect::<Vec<_>>();
        assert!(*ppl.last().unwrap() < v, "{ppl:?} vs {v}");
        for w in ppl.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "{ppl:?}");
        }
        let titles: Vec<_> = c.titles.iter().map(|t| t.tokens.clone()).collect();
        assert!(m.perplexity(&titles).unwrap() < v);
    }

    #[test]
    fn training_is_reproducible_and_round_trips() {
        let c = toy_corpus();
        let dims = BiLmDims::new(6, 5, 1).unwrap();
        let cfg = TrainConfig {
            epochs: 1,
            variational_dropout: 0.5,
            word_dropout: 0.05,
            ..toy_cfg()
        };
        let (a, _) = train_bilm::<f32>(&c, dims, &cfg).unwrap();
        let (b, _) = train_bilm::<f32>(&c, dims, &cfg).unwrap();
        assert_eq!(a.to_file().to_bytes(), b.to_file().to_bytes());
        let back =
            BiLmModel::<f32>::from_file(&ModelFile::from_bytes(&a.to_file().to_bytes()).unwrap())
                .unwrap();
        assert_eq!(back, a);
        assert_eq!(back.content_hash(), a.content_hash());
    }

    #[test]
    fn same_token_differs_by_context() {
        let c = toy_corpus();
        let (m, _) = train_bilm::<f64>(&c, BiLmDims::new(8, 8, 1).unwrap(), &toy_cfg()).unwrap();
        let a = m.embed_title(&toks("director")).unwrap();
        let b = m.embed_title(&toks("sales director asia")).unwrap();
        let (x, y) = (a.row(0), b.row(1));
        let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        let cos = dot
            / (x.iter().map(|v| v * v).sum::<f64>().sqrt()
                * y.iter().map(|v| v * v).sum::<f64>().sqrt());
        assert!(cos < 1.0 - 1e-9, "{cos}");
    }

    #[test]
    fn full_scale_instantiation() {
        let c = Corpus::from_raw_lines(["chief executive officer"], "t");
        let v = build_vocab(&c, 1).unwrap();
        let m = BiLmModel::<f32>::new(v, BiLmDims::FULL_SCALE, 0);
        let e = m.embed_title(&toks("chief executive officer")).unwrap();
        assert_eq!((e.rows(), e.cols()), (3, 3072));
    }
}
