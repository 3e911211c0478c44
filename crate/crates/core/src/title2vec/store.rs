//! Text store of per-title token vectors.
//!
//! ```text
//! ipod-emb v1 <dim> <hash>
//! title <id> <token count>
//! <token> <v_1> ... <v_dim>
//! ...
//! ```
//!
//! Values are `f32` written with Rust's shortest round-trip formatting, so
//! reading a file back reproduces every bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::bilm::BiLmModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Matrix;

const HEADER: &str = "ipod-emb v1";

#[derive(Debug, Clone, PartialEq)]
pub struct TitleEmbedding {
    pub id: String,
    pub tokens: Vec<String>,
    /// `tokens.len() × dim`
    pub vectors: Matrix<f32>,
}

impl TitleEmbedding {
    /// Mean of the token vectors.
    pub fn pooled(&self) -> Vec<f32> {
        mean_pool(&self.vectors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    dim: usize,
    /// Content hash of the producing model, or any identifier without spaces.
    hash: String,
    titles: Vec<TitleEmbedding>,
}

impl EmbeddingFile {
    pub fn new(dim: usize, hash: impl Into<String>) -> Result<Self> {
        let hash = hash.into();
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "embedding dimension must be positive".into(),
            ));
        }
        if hash.is_empty() || hash.contains(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "bad embedding hash '{hash}'"
            )));
        }
        Ok(Self {
            dim,
            hash,
            titles: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn titles(&self) -> &[TitleEmbedding] {
        &self.titles
    }

    pub fn len(&self) -> usize {
        self.titles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.titles.is_empty()
    }

    pub fn push(
        &mut self,
        id: impl Into<String>,
        tokens: Vec<String>,
        vectors: Matrix<f32>,
    ) -> Result<()> {
        let id = id.into();
        if id.is_empty() || id.contains(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("bad title id '{id}'")));
        }
        if tokens.is_empty() {
            return Err(Error::Empty("title tokens"));
        }
        if let Some(t) = tokens
            .iter()
            .find(|t| t.is_empty() || t.contains(char::is_whitespace))
        {
            return Err(Error::InvalidArgument(format!("bad token '{t}'")));
        }
        if vectors.cols() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                actual: vectors.cols(),
            });
        }
        if vectors.rows() != tokens.len() {
            return Err(Error::Misaligned(format!(
                "{} tokens but {} vectors",
                tokens.len(),
                vectors.rows()
            )));
        }
        if !vectors.is_finite() {
            return Err(Error::InvalidArgument("non-finite embedding value".into()));
        }
        self.titles.push(TitleEmbedding {
            id,
            tokens,
            vectors,
        });
        Ok(())
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{HEADER} {} {}", self.dim, self.hash)?;
        for t in &self.titles {
            writeln!(w, "title {} {}", t.id, t.tokens.len())?;
            for (i, tok) in t.tokens.iter().enumerate() {
                write!(w, "{tok}")?;
                for v in t.vectors.row(i) {
                    write!(w, " {v}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |line: usize, reason: String| Error::Format {
            what: "embedding file",
            line,
            reason,
        };
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Empty("embedding file"))?;
        let header = header?;
        let rest = header
            .strip_prefix(HEADER)
            .ok_or_else(|| bad(1, format!("expected '{HEADER} <dim> <hash>'")))?;
        let parts: Vec<&str> = rest.split_whitespace().collect();
        let [dim, hash] = parts[..] else {
            return Err(bad(1, format!("expected '{HEADER} <dim> <hash>'")));
        };
        let dim: usize = dim
            .parse()
            .map_err(|_| bad(1, format!("bad dimension '{dim}'")))?;
        let mut store = Self::new(dim, hash).map_err(|e| bad(1, e.to_string()))?;
        while let Some((i, line)) = lines.next() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(' ').collect();
            let ["title", id, n] = parts[..] else {
                return Err(bad(i + 1, "expected 'title <id> <count>'".into()));
            };
            let n: usize = n
                .parse()
                .map_err(|_| bad(i + 1, format!("bad count '{n}'")))?;
            let mut tokens = Vec::with_capacity(n);
            let mut data = Vec::with_capacity(n * dim);
            for _ in 0..n {
                let (j, line) = lines
                    .next()
                    .ok_or_else(|| bad(i + 1, "title truncated".into()))?;
                let line = line?;
                let mut fields = line.split(' ');
                tokens.push(fields.next().unwrap_or_default().to_string());
                let before = data.len();
                for f in fields {
                    data.push(
                        f.parse::<f32>()
                            .map_err(|_| bad(j + 1, format!("bad value '{f}'")))?,
                    );
                }
                if data.len() - before != dim {
                    return Err(bad(
                        j + 1,
                        format!("expected {dim} values, got {}", data.len() - before),
                    ));
                }
            }
            store
                .push(id, tokens, Matrix::from_vec(n, dim, data))
                .map_err(|e| bad(i + 1, e.to_string()))?;
        }
        Ok(store)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(f))
    }

    /// Embeds every title with `model`; ids are `t1`, `t2`, ... in order.
    /// Empty titles are skipped.
    pub fn from_model<T: Scalar, S: AsRef<[String]>>(
        model: &BiLmModel<T>,
        titles: &[S],
    ) -> Result<Self> {
        let mut store = Self::new(model.contextual_dim(), model.content_hash())?;
        for (i, t) in titles.iter().enumerate() {
            let t = t.as_ref();
            if t.is_empty() {
                continue;
            }
            let v = model.embed_title(t)?.cast();
            store.push(format!("t{}", i + 1), t.to_vec(), v)?;
        }
        Ok(store)
    }
}

pub fn mean_pool<T: Scalar>(m: &Matrix<T>) -> Vec<T> {
    let mut out = vec![T::zero(); m.cols()];
    for r in 0..m.rows() {
        for (o, &v) in out.iter_mut().zip(m.row(r)) {
            *o += v;
        }
    }
    let n = T::lit(m.rows().max(1) as f64);
    out.iter_mut().for_each(|v| *v /= n);
    out
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub id: String,
    pub title: String,
    pub similarity: f64,
}

/// Top-`k` titles by cosine similarity of their mean-pooled vectors to
/// `query`, best first; ties keep store order.
pub fn nearest_titles(store: &EmbeddingFile, query: &[f32], k: usize) -> Result<Vec<Neighbor>> {
    if store.is_empty() {
        return Err(Error::Empty("embedding store"));
    }
    if query.len() != store.dim() {
        return Err(Error::Dimension {
            expected: store.dim(),
            actual: query.len(),
        });
    }
    let mut scored: Vec<Neighbor> = store
        .titles()
        .iter()
        .map(|t| Neighbor {
            id: t.id.clone(),
            title: t.tokens.join(" "),
            similarity: cosine(&t.pooled(), query),
        })
        .collect();
    scored.sort_by(|a, b| b.similarity.total_cmp(&a.similarity));
    scored.truncate(k);
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synth_corpus;
    use crate::gazetteer::Gazetteer;
    use crate::optim::TrainConfig;
    use crate::title2vec::{train_bilm, BiLmDims};

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn sample() -> EmbeddingFile {
        let mut s = EmbeddingFile::new(3, "abc123").unwrap();
        s.push(
            "t1",
            toks("sales manager"),
            Matrix::from_vec(2, 3, vec![0.1, -0.0, 1e-30, 3.4028235e38, -2.5, 1.0 / 3.0]),
        )
        .unwrap();
        s.push(
            "t2",
            toks("cto"),
            Matrix::from_vec(1, 3, vec![0.0, 1.0, 0.0]),
        )
        .unwrap();
        s
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let mut buf = Vec::new();
        s.write(&mut buf).unwrap();
        let back = EmbeddingFile::read(buf.as_slice()).unwrap();
        let bits = |e: &EmbeddingFile| {
            e.titles()
                .iter()
                .flat_map(|t| t.vectors.as_slice().iter().map(|v| v.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&back), bits(&s));
        assert_eq!(back.titles()[0].tokens, s.titles()[0].tokens);
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(buf, again);
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("ipod-emb v1 3 abc123\n"));
    }

    #[test]
    fn dimension_is_enforced() {
        let mut s = sample();
        assert!(matches!(
            s.push("t3", toks("x"), Matrix::zeros(1, 4)),
            Err(Error::Dimension {
                expected: 3,
                actual: 4
            })
        ));
        assert!(EmbeddingFile::read("ipod-emb v1 2 h\ntitle a 1\nx 1 2 3\n".as_bytes()).is_err());
        assert!(nearest_titles(&s, &[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn own_vector_ranks_first() {
        let s = sample();
        let q = s.titles()[1].pooled();
        let hits = nearest_titles(&s, &q, 10).unwrap();
        assert_eq!(hits.len(), 2);
        assert_eq!(hits[0].id, "t2");
        assert!((hits[0].similarity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_keep_store_order() {
        let mut s = EmbeddingFile::new(2, "h").unwrap();
        for id in ["a", "b", "c"] {
            s.push(id, toks("x"), Matrix::from_vec(1, 2, vec![1.0, 0.0]))
                .unwrap();
        }
        let ids: Vec<_> = nearest_titles(&s, &[2.0, 0.0], 2)
            .unwrap()
            .into_iter()
            .map(|n| n.id)
            .collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn related_title_ranks_above_unrelated() {
        let c = synth_corpus(&Gazetteer::builtin(), 21, 400).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.5,
            batch_size: 8,
            epochs: 3,
            word_dropout: 0.0,
            variational_dropout: 0.0,
            grad_clip: Some(5.0),
            seed: 4,
            ..TrainConfig::default()
        };
        let (m, _) = train_bilm::<f32>(&c, BiLmDims::new(16, 16, 1).unwrap(), &cfg).unwrap();
        let titles = [toks("project manager"), toks("asia pacific")];
        let store = EmbeddingFile::from_model(&m, &titles).unwrap();
        assert_eq!(store.hash(), m.content_hash());
        let q = mean_pool(&m.embed_title(&toks("senior project manager")).unwrap());
        let hits = nearest_titles(&store, &q, 2).unwrap();
        assert_eq!(hits[0].title, "project manager", "{hits:?}");
    }
}
