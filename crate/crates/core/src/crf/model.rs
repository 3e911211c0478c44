use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::chain::{self, Transitions};
use super::features::{extract_features, FeatureVocab};
use crate::container::ModelFile;
use crate::error::{Error, Result};
use crate::gazetteer::Gazetteer;
use crate::labeling::{BioesLabel, LabeledSequence};
use crate::scalar::{argmax, axpy, Scalar};
use crate::tensor::{Matrix, ParamSet};

const NUM_LABELS: usize = BioesLabel::COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrfKind {
    Crf,
    /// Transitions pinned at zero; decoding is per-token argmax.
    LogReg,
}

impl CrfKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CrfKind::Crf => "crf",
            CrfKind::LogReg => "logreg",
        }
    }
}

impl fmt::Display for CrfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CrfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crf" => Ok(CrfKind::Crf),
            "logreg" => Ok(CrfKind::LogReg),
            other => Err(Error::InvalidArgument(format!(
                "unknown CRF kind '{other}'"
            ))),
        }
    }
}

/// Emission table (`features × labels`) plus the label-transition block.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfParams<T> {
    pub emission: Matrix<T>,
    pub transitions: Transitions<T>,
}

impl<T: Scalar> CrfParams<T> {
    pub fn zeros(features: usize) -> Self {
        Self {
            emission: Matrix::zeros(features, NUM_LABELS),
            transitions: Transitions::zeros(NUM_LABELS),
        }
    }
}

impl<T: Scalar> ParamSet<T> for CrfParams<T> {
    fn blocks(&self) -> Vec<(&'static str, &Matrix<T>)> {
        let mut b = vec![("emission", &self.emission)];
        b.extend(self.transitions.blocks());
        b
    }

    fn blocks_mut(&mut self) -> Vec<&mut Matrix<T>> {
        let mut b = vec![&mut self.emission];
        b.extend(self.transitions.blocks_mut());
        b
    }
}

/// Feature-based linear-chain CRF over the 13 BIOES labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel<T> {
    kind: CrfKind,
    vocab: FeatureVocab,
    params: CrfParams<T>,
    gazetteer: Option<Gazetteer>,
}

impl<T: Scalar> CrfModel<T> {
    /// Empty model with an open (growable) feature vocab.
    pub fn new(kind: CrfKind, gazetteer: Option<Gazetteer>) -> Self {
        Self {
            kind,
            vocab: FeatureVocab::new(),
            params: CrfParams::zeros(0),
            gazetteer,
        }
    }

    /// Model with an explicit frozen vocab and weights.
    pub fn from_parts(
        kind: CrfKind,
        vocab: FeatureVocab,
        params: CrfParams<T>,
        gazetteer: Option<Gazetteer>,
    ) -> Result<Self> {
        if params.emission.rows() != vocab.len() {
            return Err(Error::Dimension {
                expected: vocab.len(),
                actual: params.emission.rows(),
            });
        }
        if params.emission.cols() != NUM_LABELS || params.transitions.labels() != NUM_LABELS {
            return Err(Error::Dimension {
                expected: NUM_LABELS,
                actual: params.emission.cols(),
            });
        }
        if kind == CrfKind::LogReg && !params.transitions.is_zero() {
            return Err(Error::Model(
                "logreg model with non-zero transitions".into(),
            ));
        }
        Ok(Self {
            kind,
            vocab,
            params,
            gazetteer,
        })
    }

    pub fn kind(&self) -> CrfKind {
        self.kind
    }

    pub fn vocab(&self) -> &FeatureVocab {
        &self.vocab
    }

    pub fn params(&self) -> &CrfParams<T> {
        &self.params
    }

    pub fn gazetteer(&self) -> Option<&Gazetteer> {
        self.gazetteer.as_ref()
    }

    pub(crate) fn params_mut(&mut self) -> &mut CrfParams<T> {
        &mut self.params
    }

    pub(crate) fn freeze(&mut self) {
        self.vocab.freeze();
    }

    /// Feature ids per position; features missing from the vocab are dropped.
    pub fn feature_ids(&self, tokens: &[String]) -> Vec<Vec<usize>> {
        (0..tokens.len())
            .map(|i| {
                extract_features(tokens, i, self.gazetteer.as_ref())
                    .iter()
                    .filter_map(|f| self.vocab.get(f))
                    .collect()
            })
            .collect()
    }

    /// Like [`feature_ids`](Self::feature_ids) but adds unseen features to an
    /// unfrozen vocab, growing the emission table with zero rows.
    pub(crate) fn intern(&mut self, tokens: &[String]) -> Vec<Vec<usize>> {
        let gaz = self.gazetteer.as_ref();
        let vocab = &mut self.vocab;
        let ids = (0..tokens.len())
            .map(|i| {
                extract_features(tokens, i, gaz)
                    .iter()
                    .filter_map(|f| vocab.get_or_insert(f))
                    .collect()
            })
            .collect();
        self.params.emission.grow_rows(self.vocab.len());
        ids
    }

    pub(crate) fn emissions_from_ids(&self, ids: &[Vec<usize>]) -> Matrix<T> {
        let mut em = Matrix::zeros(ids.len(), NUM_LABELS);
        for (t, feats) in ids.iter().enumerate() {
            let row = em.row_mut(t);
            for &f in feats {
                axpy(T::one(), self.params.emission.row(f), row);
            }
        }
        em
    }

    /// Emission scores, `len × 13`.
    pub fn emissions(&self, tokens: &[String]) -> Matrix<T> {
        self.emissions_from_ids(&self.feature_ids(tokens))
    }

    pub fn log_partition(&self, tokens: &[String]) -> Result<T> {
        non_empty(tokens)?;
        Ok(chain::log_partition(
            &self.emissions(tokens),
            &self.params.transitions,
        ))
    }

    /// Unnormalized score of a label path.
    pub fn path_score(&self, tokens: &[String], labels: &[BioesLabel]) -> Result<T> {
        non_empty(tokens)?;
        aligned(tokens, labels)?;
        let path: Vec<usize> = labels.iter().map(|l| l.index()).collect();
        Ok(chain::path_score(
            &self.emissions(tokens),
            &self.params.transitions,
            &path,
        ))
    }

    /// Adds the NLL gradient for one example into `grad` and returns the loss.
    pub(crate) fn accumulate(
        &self,
        ids: &[Vec<usize>],
        gold: &[usize],
        grad: &mut CrfParams<T>,
    ) -> T {
        let em = self.emissions_from_ids(ids);
        let mut d_em = Matrix::zeros(em.rows(), NUM_LABELS);
        let d_tr = match self.kind {
            CrfKind::Crf => Some(&mut grad.transitions),
            CrfKind::LogReg => None,
        };
        let loss = chain::nll_grad(&em, &self.params.transitions, gold, &mut d_em, d_tr);
        for (t, feats) in ids.iter().enumerate() {
            for &f in feats {
                axpy(T::one(), d_em.row(t), grad.emission.row_mut(f));
            }
        }
        loss
    }

    /// Negative log-likelihood of the gold path and its gradient with
    /// respect to every weight. Features outside the vocab are ignored.
    pub fn nll_and_gradient(&self, example: &LabeledSequence) -> Result<(T, CrfParams<T>)> {
        non_empty(&example.tokens)?;
        aligned(&example.tokens, &example.labels)?;
        let ids = self.feature_ids(&example.tokens);
        let gold: Vec<usize> = example.labels.iter().map(|l| l.index()).collect();
        let mut grad = self.params.zeros_like();
        let loss = self.accumulate(&ids, &gold, &mut grad);
        Ok((loss, grad))
    }

    /// Best label path. LogReg models take the per-token argmax.
    pub fn viterbi_decode(&self, tokens: &[String]) -> Result<Vec<BioesLabel>> {
        non_empty(tokens)?;
        let em = self.emissions(tokens);
        let path = match self.kind {
            CrfKind::Crf => chain::viterbi(&em, &self.params.transitions).0,
            CrfKind::LogReg => (0..em.rows()).map(|t| argmax(em.row(t))).collect(),
        };
        Ok(path.into_iter().map(label).collect())
    }

    pub fn predict(&self, tokens: &[String]) -> Result<LabeledSequence> {
        let labels = self.viterbi_decode(tokens)?;
        LabeledSequence::prediction(tokens.to_vec(), labels)
    }

    pub fn to_file(&self) -> ModelFile {
        let mut f = ModelFile::new(self.kind.as_str());
        f.push_meta("format", 1);
        f.push_list("labels", BioesLabel::all().map(|l| l.to_string()).collect());
        f.push_list("features", self.vocab.names().to_vec());
        if let Some(g) = &self.gazetteer {
            let mut buf = Vec::new();
            g.write_tsv(&mut buf).expect("writing to a Vec cannot fail");
            f.push_list(
                "gazetteer",
                vec![String::from_utf8(buf).expect("gazetteer is UTF-8")],
            );
        }
        f.push_tensor("emission", &self.params.emission);
        for (name, m) in self.params.transitions.blocks() {
            f.push_tensor(name, m);
        }
        f
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        file.expect_kind(&["crf", "logreg"])?;
        let kind: CrfKind = file.kind.parse()?;
        check_labels(file.list("labels")?)?;
        let vocab = FeatureVocab::from_names(file.list("features")?.to_vec());
        let gazetteer = match file.list("gazetteer") {
            Ok(text) => Some(Gazetteer::read_tsv(text.concat().as_bytes())?),
            Err(_) => None,
        };
        let params = CrfParams {
            emission: file.tensor("emission", vocab.len(), NUM_LABELS)?,
            transitions: Transitions {
                matrix: file.tensor("transitions", NUM_LABELS, NUM_LABELS)?,
                start: file.tensor("start", 1, NUM_LABELS)?,
                stop: file.tensor("stop", 1, NUM_LABELS)?,
            },
        };
        Self::from_parts(kind, vocab, params, gazetteer)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_file().save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_file(&ModelFile::load(path)?)
    }
}

pub(crate) fn label(i: usize) -> BioesLabel {
    BioesLabel::from_index(i).expect("label index in range")
}

pub(crate) fn check_labels(labels: &[String]) -> Result<()> {
    let expected: Vec<String> = BioesLabel::all().map(|l| l.to_string()).collect();
    if labels != expected.as_slice() {
        return Err(Error::Model(format!("unexpected label list {labels:?}")));
    }
    Ok(())
}

pub(crate) fn non_empty(tokens: &[String]) -> Result<()> {
    if tokens.is_empty() {
        Err(Error::Empty("token sequence"))
    } else {
        Ok(())
    }
}

fn aligned(tokens: &[String], labels: &[BioesLabel]) -> Result<()> {
    if tokens.len() != labels.len() {
        return Err(Error::Misaligned(format!(
            "{} tokens but {} labels",
            tokens.len(),
            labels.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf::chain::tests::all_paths;
    use crate::labeling::auto_tag_tokens;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    /// Model whose vocab covers `titles`, with uniform random weights.
    fn random_model(kind: CrfKind, titles: &[&str], seed: u64) -> CrfModel<f64> {
        let mut m = CrfModel::new(kind, Some(Gazetteer::builtin()));
        for t in titles {
            m.intern(&toks(t));
        }
        m.freeze();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = m.vocab.len();
        m.params.emission = Matrix::uniform(n, NUM_LABELS, 0.5, &mut rng);
        if kind == CrfKind::Crf {
            m.params.transitions = Transitions {
                matrix: Matrix::uniform(NUM_LABELS, NUM_LABELS, 1.0, &mut rng),
                start: Matrix::uniform(1, NUM_LABELS, 1.0, &mut rng),
                stop: Matrix::uniform(1, NUM_LABELS, 1.0, &mut rng),
            };
        }
        m
    }

    #[test]
    fn zero_model_partition_and_loss() {
        let mut m = CrfModel::<f64>::new(CrfKind::Crf, None);
        let t = toks("senior sales manager");
        m.intern(&t);
        let z = m.log_partition(&t).unwrap();
        assert_relative_eq!(z, 3.0 * 13f64.ln(), epsilon = 1e-12);
        let ex = auto_tag_tokens(&t, &Gazetteer::builtin()).unwrap();
        let (loss, _) = m.nll_and_gradient(&ex).unwrap();
        assert_relative_eq!(loss, 3.0 * 13f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn length_one_partition_closed_form() {
        let m = random_model(CrfKind::Crf, &["director"], 5);
        let t = toks("director");
        let em = m.emissions(&t);
        let tr = &m.params.transitions;
        let want = (0..13)
            .map(|y| (em.get(0, y) + tr.start(y) + tr.stop(y)).exp())
            .sum::<f64>()
            .ln();
        assert_relative_eq!(m.log_partition(&t).unwrap(), want, epsilon = 1e-12);
    }

    #[test]
    fn partition_and_viterbi_match_brute_force() {
        let titles = ["chief financial officer", "sales manager", "apac"];
        let m = random_model(CrfKind::Crf, &titles, 9);
        for t in titles {
            let t = toks(t);
            let em = m.emissions(&t);
            let paths = all_paths(t.len(), 13);
            let scores: Vec<f64> = paths
                .iter()
                .map(|p| chain::path_score(&em, &m.params.transitions, p))
                .collect();
            let brute = scores.iter().map(|s| s.exp()).sum::<f64>().ln();
            assert_relative_eq!(m.log_partition(&t).unwrap(), brute, epsilon = 1e-9);
            let best = argmax(&scores);
            let want: Vec<BioesLabel> = paths[best].iter().map(|&i| label(i)).collect();
            assert_eq!(m.viterbi_decode(&t).unwrap(), want);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let title = "senior vice president global sales";
        let m = random_model(CrfKind::Crf, &[title], 21);
        let t = toks(title);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let labels: Vec<BioesLabel> =
                (0..t.len()).map(|_| label(rng.gen_range(0..13))).collect();
            let ex = LabeledSequence::prediction(t.clone(), labels).unwrap();
            let (_, grad) = m.nll_and_gradient(&ex).unwrap();
            let numeric = finite_difference(&m, &ex);
            let diff: f64 = grad
                .blocks()
                .iter()
                .zip(numeric.blocks())
                .flat_map(|((_, a), (_, b))| {
                    a.as_slice()
                        .iter()
                        .zip(b.as_slice())
                        .map(|(x, y)| (x - y).powi(2))
                })
                .sum::<f64>()
                .sqrt();
            let scale = grad.sq_norm().sqrt().max(numeric.sq_norm().sqrt());
            assert!(diff / scale < 1e-6, "relative error {}", diff / scale);
        }
    }

    fn finite_difference(m: &CrfModel<f64>, ex: &LabeledSequence) -> CrfParams<f64> {
        let h = 1e-5;
        let mut out = m.params.zeros_like();
        let mut probe = m.clone();
        let nblocks = probe.params.blocks().len();
        for b in 0..nblocks {
            let len = probe.params.blocks()[b].1.as_slice().len();
            for i in 0..len {
                let orig = probe.params.blocks()[b].1.as_slice()[i];
                probe.params.blocks_mut()[b].as_mut_slice()[i] = orig + h;
                let up = probe.nll_and_gradient(ex).unwrap().0;
                probe.params.blocks_mut()[b].as_mut_slice()[i] = orig - h;
                let down = probe.nll_and_gradient(ex).unwrap().0;
                probe.params.blocks_mut()[b].as_mut_slice()[i] = orig;
                out.blocks_mut()[b].as_mut_slice()[i] = (up - down) / (2.0 * h);
            }
        }
        out
    }

    #[test]
    fn logreg_decode_is_per_token_argmax() {
        let title = "head of marketing apac";
        let m = random_model(CrfKind::LogReg, &[title], 4);
        let t = toks(title);
        let em = m.emissions(&t);
        let want: Vec<BioesLabel> = (0..t.len()).map(|i| label(argmax(em.row(i)))).collect();
        assert_eq!(m.viterbi_decode(&t).unwrap(), want);
        let mut as_crf = m.clone();
        as_crf.kind = CrfKind::Crf;
        assert_eq!(as_crf.viterbi_decode(&t).unwrap(), want);
    }

    #[test]
    fn logreg_gradient_leaves_transitions_zero() {
        let title = "sales director";
        let m = random_model(CrfKind::LogReg, &[title], 8);
        let ex = auto_tag_tokens(&toks(title), &Gazetteer::builtin()).unwrap();
        let (_, g) = m.nll_and_gradient(&ex).unwrap();
        assert!(g.transitions.is_zero());
    }

    #[test]
    fn unseen_features_are_ignored_at_inference() {
        let m = random_model(CrfKind::Crf, &["sales manager"], 1);
        let before = m.vocab.len();
        let out = m.viterbi_decode(&toks("quantum wrangler")).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(m.vocab.len(), before);
    }

    #[test]
    fn scaling_weights_keeps_path() {
        let title = "regional sales manager asia";
        let m = random_model(CrfKind::Crf, &[title], 12);
        let mut scaled = m.clone();
        scaled.params.scale(3.5);
        let t = toks(title);
        assert_eq!(
            m.viterbi_decode(&t).unwrap(),
            scaled.viterbi_decode(&t).unwrap()
        );
    }

    #[test]
    fn container_round_trip() {
        let m = random_model(CrfKind::Crf, &["chief executive officer"], 2);
        let bytes = m.to_file().to_bytes();
        let back: CrfModel<f64> =
            CrfModel::from_file(&ModelFile::from_bytes(&bytes).unwrap()).unwrap();
        assert_eq!(back.vocab, m.vocab);
        assert_eq!(back.gazetteer, m.gazetteer);
        // weights pass through f32
        let w32: CrfParams<f64> = CrfParams {
            emission: m.params.emission.cast::<f32>().cast(),
            transitions: Transitions {
                matrix: m.params.transitions.matrix.cast::<f32>().cast(),
                start: m.params.transitions.start.cast::<f32>().cast(),
                stop: m.params.transitions.stop.cast::<f32>().cast(),
            },
        };
        assert_eq!(back.params, w32);
        assert_eq!(back.to_file().to_bytes(), bytes);
    }

    #[test]
    fn empty_input_is_an_error() {
        let m = CrfModel::<f32>::new(CrfKind::Crf, None);
        assert!(matches!(m.viterbi_decode(&[]), Err(Error::Empty(_))));
    }
}
