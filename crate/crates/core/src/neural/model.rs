use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cell::{dropout_mask, reversed, CellTrace, LstmCell};
use crate::container::ModelFile;
use crate::crf::chain::{self, Transitions};
use crate::crf::word_dropout;
use crate::error::{Error, Result};
use crate::labeling::{BioesLabel, LabeledSequence};
use crate::optim::parse_value;
use crate::scalar::{argmax, Scalar};
use crate::tensor::{Matrix, ParamSet};
use crate::title2vec::{BiLmModel, Vocab};

const NUM_LABELS: usize = BioesLabel::COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputLayer {
    /// Viterbi over emissions plus learned transitions.
    Crf,
    /// Per-token softmax and argmax.
    Softmax,
}

impl OutputLayer {
    pub fn kind(self) -> &'static str {
        match self {
            OutputLayer::Crf => "lstm-crf",
            OutputLayer::Softmax => "lstm",
        }
    }
}

impl fmt::Display for OutputLayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind())
    }
}

impl FromStr for OutputLayer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lstm-crf" => Ok(OutputLayer::Crf),
            "lstm" => Ok(OutputLayer::Softmax),
            other => Err(Error::InvalidArgument(format!(
                "unknown tagger kind '{other}'"
            ))),
        }
    }
}

/// Network shape. The embedding width only applies to a trainable table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LstmConfig {
    pub embedding_dim: usize,
    pub hidden: usize,
    pub layers: usize,
}

impl Default for LstmConfig {
    /// 64-dim embeddings, one layer of 256 units per direction.
    fn default() -> Self {
        Self {
            embedding_dim: 64,
            hidden: 256,
            layers: 1,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 || self.hidden == 0 || self.layers == 0 {
            return Err(Error::InvalidArgument(format!(
                "LSTM dimensions must be positive, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Sets `hidden`, `layers` or `embedding_dim` by name; `Ok(false)` for
    /// any other key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "hidden" => self.hidden = parse_value(key, value)?,
            "layers" => self.layers = parse_value(key, value)?,
            "embedding_dim" => self.embedding_dim = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Where token input vectors come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Embeddings<T> {
    /// Trainable lookup table; the weights live in [`TaggerParams::embedding`].
    Table(Vocab),
    /// Frozen contextual vectors from a biLM, identified by its content hash.
    Title2vec {
        model: Box<BiLmModel<T>>,
        hash: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerParams<T> {
    /// `V × D`; empty when the embeddings are frozen.
    pub embedding: Matrix<T>,
    pub fwd: Vec<LstmCell<T>>,
    pub bwd: Vec<LstmCell<T>>,
    /// `13 × 2H`: forward half first.
    pub proj: Matrix<T>,
    pub proj_bias: Matrix<T>,
    pub transitions: Transitions<T>,
}

impl<T: Scalar> ParamSet<T> for TaggerParams<T> {
    fn blocks(&self) -> Vec<(&'static str, &Matrix<T>)> {
        let mut b = vec![("embedding", &self.embedding)];
        for (f, w) in self.fwd.iter().zip(&self.bwd) {
            b.extend([
                ("fwd.w", &f.w),
                ("fwd.b", &f.b),
                ("bwd.w", &w.w),
                ("bwd.b", &w.b),
            ]);
        }
        b.extend([("proj", &self.proj), ("proj_bias", &self.proj_bias)]);
        b.extend(self.transitions.blocks());
        b
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix<T>> {
        let mut b = vec![&mut self.embedding];
        for (f, w) in self.fwd.iter_mut().zip(self.bwd.iter_mut()) {
            b.extend([&mut f.w, &mut f.b, &mut w.w, &mut w.b]);
        }
        b.extend([&mut self.proj, &mut self.proj_bias]);
        b.extend(self.transitions.blocks_mut());
        b
    }
}

/// Bidirectional LSTM tagger. Layer `l > 0` reads the concatenated forward
/// and backward states of layer `l - 1`; the top layer's concatenation is
/// projected to 13 emission scores.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCrfModel<T> {
    output: OutputLayer,
    config: LstmConfig,
    embeddings: Embeddings<T>,
    params: TaggerParams<T>,
}

pub(crate) struct Pass<T> {
    xs: Matrix<T>,
    layers: Vec<(CellTrace<T>, CellTrace<T>)>,
    /// Top-layer `[fwd ; bwd]` states, `n × 2H`.
    top: Matrix<T>,
    pub(crate) emissions: Matrix<T>,
}

/// Per layer, the forward and backward recurrent masks.
pub(crate) type Masks<T> = Vec<[Option<Vec<T>>; 2]>;

impl<T: Scalar> LstmCrfModel<T> {
    /// Random initialization: table in `±0.1`, cells and projection in
    /// `±1/sqrt(H)`, zero transitions.
    pub fn new(
        output: OutputLayer,
        config: LstmConfig,
        embeddings: Embeddings<T>,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = config.hidden;
        let (embedding, input) = match &embeddings {
            Embeddings::Table(v) => (
                Matrix::uniform(v.len(), config.embedding_dim, 0.1, &mut rng),
                config.embedding_dim,
            ),
            Embeddings::Title2vec { model, .. } => (Matrix::zeros(0, 0), model.contextual_dim()),
        };
        let mut fwd = Vec::new();
        let mut bwd = Vec::new();
        for l in 0..config.layers {
            let i = if l == 0 { input } else { 2 * h };
            fwd.push(LstmCell::init(i, h, &mut rng));
            bwd.push(LstmCell::init(i, h, &mut rng));
        }
        let bound = 1.0 / (h as f64).sqrt();
        Ok(Self {
            output,
            config,
            embeddings,
            params: TaggerParams {
                embedding,
                fwd,
                bwd,
                proj: Matrix::uniform(NUM_LABELS, 2 * h, bound, &mut rng),
                proj_bias: Matrix::zeros(1, NUM_LABELS),
                transitions: Transitions::zeros(NUM_LABELS),
            },
        })
    }

    /// Trainable-table embeddings over `vocab`.
    pub fn with_table(
        output: OutputLayer,
        config: LstmConfig,
        vocab: Vocab,
        seed: u64,
    ) -> Result<Self> {
        Self::new(output, config, Embeddings::Table(vocab), seed)
    }

    /// Frozen biLM input vectors.
    pub fn with_title2vec(
        output: OutputLayer,
        config: LstmConfig,
        bilm: BiLmModel<T>,
        seed: u64,
    ) -> Result<Self> {
        let hash = bilm.content_hash();
        Self::new(
            output,
            config,
            Embeddings::Title2vec {
                model: Box::new(bilm),
                hash,
            },
            seed,
        )
    }

    pub fn output(&self) -> OutputLayer {
        self.output
    }

    pub fn config(&self) -> LstmConfig {
        self.config
    }

    pub fn embeddings(&self) -> &Embeddings<T> {
        &self.embeddings
    }

    pub fn params(&self) -> &TaggerParams<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut TaggerParams<T> {
        &mut self.params
    }

    fn input_vectors(&self, tokens: &[String]) -> Result<Matrix<T>> {
        match &self.embeddings {
            Embeddings::Table(v) => {
                let mut xs = Matrix::zeros(tokens.len(), self.params.embedding.cols());
                for (t, tok) in tokens.iter().enumerate() {
                    xs.row_mut(t)
                        .copy_from_slice(self.params.embedding.row(v.id(tok)));
                }
                Ok(xs)
            }
            Embeddings::Title2vec { model, .. } => model.embed_title(tokens),
        }
    }

    pub(crate) fn forward(&self, tokens: &[String], masks: &Masks<T>) -> Result<Pass<T>> {
        non_empty(tokens)?;
        let xs = self.input_vectors(tokens)?;
        let n = tokens.len();
        let h = self.config.hidden;
        let mut layers = Vec::with_capacity(self.config.layers);
        let mut below: Option<Matrix<T>> = None;
        for l in 0..self.config.layers {
            let input = below.as_ref().unwrap_or(&xs);
            let f = self.params.fwd[l].forward(input, masks[l][0].as_deref());
            let b = self.params.bwd[l].forward(&reversed(input), masks[l][1].as_deref());
            let mut out = Matrix::zeros(n, 2 * h);
            for t in 0..n {
                let row = out.row_mut(t);
                row[..h].copy_from_slice(f.h.row(t));
                row[h..].copy_from_slice(b.h.row(n - 1 - t));
            }
            layers.push((f, b));
            below = Some(out);
        }
        let top = below.expect("at least one layer");
        let mut emissions = Matrix::zeros(n, NUM_LABELS);
        for t in 0..n {
            let row = emissions.row_mut(t);
            row.copy_from_slice(self.params.proj_bias.as_slice());
            self.params.proj.matvec_add(top.row(t), row);
        }
        Ok(Pass {
            xs,
            layers,
            top,
            emissions,
        })
    }

    fn no_masks(&self) -> Masks<T> {
        (0..self.config.layers).map(|_| [None, None]).collect()
    }

    /// Eval-mode emission scores, `len × 13`.
    pub fn bilstm_emissions(&self, tokens: &[String]) -> Result<Matrix<T>> {
        Ok(self.forward(tokens, &self.no_masks())?.emissions)
    }

    fn active_transitions(&self) -> Option<&Transitions<T>> {
        match self.output {
            OutputLayer::Crf => Some(&self.params.transitions),
            OutputLayer::Softmax => None,
        }
    }

    /// Backpropagates `d_em` through the projection, both directions of
    /// every layer and, for a trainable table, the embeddings.
    fn backward(
        &self,
        tokens: &[String],
        pass: &Pass<T>,
        d_em: &Matrix<T>,
        masks: &Masks<T>,
        grad: &mut TaggerParams<T>,
    ) {
        let n = tokens.len();
        let h = self.config.hidden;
        let mut d_out = Matrix::zeros(n, 2 * h);
        for t in 0..n {
            grad.proj.outer_add(d_em.row(t), pass.top.row(t));
            for (b, &d) in grad.proj_bias.as_mut_slice().iter_mut().zip(d_em.row(t)) {
                *b += d;
            }
            self.params.proj.matvec_t_add(d_em.row(t), d_out.row_mut(t));
        }
        for l in (0..self.config.layers).rev() {
            let (f_tr, b_tr) = &pass.layers[l];
            let mut d_f = Matrix::zeros(n, h);
            let mut d_b = Matrix::zeros(n, h);
            for t in 0..n {
                d_f.row_mut(t).copy_from_slice(&d_out.row(t)[..h]);
                d_b.row_mut(n - 1 - t).copy_from_slice(&d_out.row(t)[h..]);
            }
            let input_dim = self.params.fwd[l].input_dim();
            let mut dx = Matrix::zeros(n, input_dim);
            let mut dx_rev = Matrix::zeros(n, input_dim);
            self.params.fwd[l].backward(
                f_tr,
                &d_f,
                masks[l][0].as_deref(),
                &mut grad.fwd[l],
                &mut dx,
            );
            self.params.bwd[l].backward(
                b_tr,
                &d_b,
                masks[l][1].as_deref(),
                &mut grad.bwd[l],
                &mut dx_rev,
            );
            for t in 0..n {
                for (o, &d) in dx.row_mut(t).iter_mut().zip(dx_rev.row(n - 1 - t)) {
                    *o += d;
                }
            }
            d_out = dx;
        }
        if let Embeddings::Table(v) = &self.embeddings {
            for (t, tok) in tokens.iter().enumerate() {
                for (e, &d) in grad
                    .embedding
                    .row_mut(v.id(tok))
                    .iter_mut()
                    .zip(d_out.row(t))
                {
                    *e += d;
                }
            }
        }
        debug_assert_eq!(pass.xs.rows(), n);
    }

    /// Loss of one (possibly word-dropped) example under the given masks,
    /// with its gradient added into `grad`.
    pub(crate) fn accumulate(
        &self,
        tokens: &[String],
        gold: &[usize],
        masks: &Masks<T>,
        grad: &mut TaggerParams<T>,
    ) -> Result<T> {
        let pass = self.forward(tokens, masks)?;
        let mut d_em = Matrix::zeros(tokens.len(), NUM_LABELS);
        let zero;
        let (tr, d_tr) = match self.output {
            OutputLayer::Crf => (&self.params.transitions, Some(&mut grad.transitions)),
            OutputLayer::Softmax => {
                zero = Transitions::zeros(NUM_LABELS);
                (&zero, None)
            }
        };
        let loss = chain::nll_grad(&pass.emissions, tr, gold, &mut d_em, d_tr);
        self.backward(tokens, &pass, &d_em, masks, grad);
        Ok(loss)
    }

    /// Eval-mode loss (CRF negative log-likelihood, or summed per-token
    /// cross-entropy) and its gradient for every parameter block.
    pub fn nll_and_gradient(&self, example: &LabeledSequence) -> Result<(T, TaggerParams<T>)> {
        aligned(example)?;
        let gold: Vec<usize> = example.labels.iter().map(|l| l.index()).collect();
        let mut grad = self.params.zeros_like();
        let loss = self.accumulate(&example.tokens, &gold, &self.no_masks(), &mut grad)?;
        Ok((loss, grad))
    }

    /// Viterbi for the CRF output, per-token argmax for softmax.
    pub fn predict(&self, tokens: &[String]) -> Result<Vec<BioesLabel>> {
        let em = self.bilstm_emissions(tokens)?;
        let path = match self.active_transitions() {
            Some(tr) => chain::viterbi(&em, tr).0,
            None => (0..em.rows()).map(|t| argmax(em.row(t))).collect(),
        };
        Ok(path
            .into_iter()
            .map(|i| BioesLabel::from_index(i).expect("label index"))
            .collect())
    }

    pub fn predict_sequence(&self, tokens: &[String]) -> Result<LabeledSequence> {
        LabeledSequence::prediction(tokens.to_vec(), self.predict(tokens)?)
    }

    /// Training-time corruption of one example: word dropout on the tokens
    /// and fresh recurrent masks per layer and direction.
    pub(crate) fn sample_noise<R: Rng>(
        &self,
        tokens: &[String],
        word_p: f64,
        var_p: f64,
        rng: &mut R,
    ) -> (Vec<String>, Masks<T>) {
        let dropped = word_dropout(tokens, word_p, rng);
        let masks = (0..self.config.layers)
            .map(|_| {
                let f = dropout_mask(self.config.hidden, var_p, rng);
                let b = dropout_mask(self.config.hidden, var_p, rng);
                [f, b]
            })
            .collect();
        (dropped, masks)
    }

    pub fn to_file(&self) -> ModelFile {
        let mut f = ModelFile::new(self.output.kind());
        f.push_meta("format", 1);
        f.push_meta("hidden", self.config.hidden);
        f.push_meta("layers", self.config.layers);
        f.push_meta("embedding_dim", self.config.embedding_dim);
        f.push_list("labels", BioesLabel::all().map(|l| l.to_string()).collect());
        match &self.embeddings {
            Embeddings::Table(v) => {
                f.push_meta("embeddings", "table");
                f.push_list("vocab", v.tokens()[3..].to_vec());
                f.push_tensor("embedding", &self.params.embedding);
            }
            Embeddings::Title2vec { hash, .. } => {
                f.push_meta("embeddings", "title2vec");
                f.push_meta("title2vec_hash", hash);
            }
        }
        for (l, (fc, bc)) in self.params.fwd.iter().zip(&self.params.bwd).enumerate() {
            f.push_tensor(&format!("fwd.{l}.w"), &fc.w);
            f.push_tensor(&format!("fwd.{l}.b"), &fc.b);
            f.push_tensor(&format!("bwd.{l}.w"), &bc.w);
            f.push_tensor(&format!("bwd.{l}.b"), &bc.b);
        }
        f.push_tensor("proj", &self.params.proj);
        f.push_tensor("proj_bias", &self.params.proj_bias);
        for (name, m) in self.params.transitions.blocks() {
            f.push_tensor(name, m);
        }
        f
    }

    /// Reads a tagger. Models built on frozen biLM vectors need that biLM,
    /// which must match the recorded content hash.
    pub fn from_file(file: &ModelFile, bilm: Option<BiLmModel<T>>) -> Result<Self> {
        file.expect_kind(&["lstm-crf", "lstm"])?;
        let output: OutputLayer = file.kind.parse()?;
        crate::crf::check_labels(file.list("labels")?)?;
        let config = LstmConfig {
            embedding_dim: file.meta_parse("embedding_dim")?,
            hidden: file.meta_parse("hidden")?,
            layers: file.meta_parse("layers")?,
        };
        config.validate()?;
        let (embeddings, embedding, input) = match file.meta("embeddings")? {
            "table" => {
                let vocab = Vocab::from_tokens(file.list("vocab")?.iter().cloned(), 1)?;
                let table = file.tensor("embedding", vocab.len(), config.embedding_dim)?;
                (Embeddings::Table(vocab), table, config.embedding_dim)
            }
            "title2vec" => {
                let want = file.meta("title2vec_hash")?;
                let model = bilm.ok_or_else(|| {
                    Error::Model(format!("tagger needs the biLM with content hash {want}"))
                })?;
                let hash = model.content_hash();
                if hash != want {
                    return Err(Error::Model(format!(
                        "biLM content hash {hash} does not match the tagger's {want}"
                    )));
                }
                let dim = model.contextual_dim();
                (
                    Embeddings::Title2vec {
                        model: Box::new(model),
                        hash,
                    },
                    Matrix::zeros(0, 0),
                    dim,
                )
            }
            other => {
                return Err(Error::Model(format!(
                    "unknown embedding provider '{other}'"
                )))
            }
        };
        let h = config.hidden;
        let mut fwd = Vec::new();
        let mut bwd = Vec::new();
        for l in 0..config.layers {
            let i = if l == 0 { input } else { 2 * h };
            for (name, out) in [("fwd", &mut fwd), ("bwd", &mut bwd)] {
                out.push(LstmCell {
                    w: file.tensor(&format!("{name}.{l}.w"), 4 * h, i + h)?,
                    b: file.tensor(&format!("{name}.{l}.b"), 1, 4 * h)?,
                });
            }
        }
        let params = TaggerParams {
            embedding,
            fwd,
            bwd,
            proj: file.tensor("proj", NUM_LABELS, 2 * h)?,
            proj_bias: file.tensor("proj_bias", 1, NUM_LABELS)?,
            transitions: Transitions {
                matrix: file.tensor("transitions", NUM_LABELS, NUM_LABELS)?,
                start: file.tensor("start", 1, NUM_LABELS)?,
                stop: file.tensor("stop", 1, NUM_LABELS)?,
            },
        };
        Ok(Self {
            output,
            config,
            embeddings,
            params,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_file().save(path)
    }

    pub fn load(path: impl AsRef<Path>, bilm: Option<BiLmModel<T>>) -> Result<Self> {
        Self::from_file(&ModelFile::load(path)?, bilm)
    }
}

fn non_empty(tokens: &[String]) -> Result<()> {
    if tokens.is_empty() {
        Err(Error::Empty("token sequence"))
    } else {
        Ok(())
    }
}

fn aligned(ex: &LabeledSequence) -> Result<()> {
    if ex.tokens.len() != ex.labels.len() {
        return Err(Error::Misaligned(format!(
            "{} tokens but {} labels",
            ex.tokens.len(),
            ex.labels.len()
        )));
    }
    Ok(())
}
