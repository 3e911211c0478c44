use std::collections::{BTreeMap, HashMap};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

/// Token ↔ id map. Ids 0, 1, 2 are the `<unk>`, `<s>`, `</s>` sentinels;
/// corpus tokens follow by descending count, ties in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
    min_count: usize,
}

impl Vocab {
    pub const UNK_ID: usize = 0;
    pub const BOS_ID: usize = 1;
    pub const EOS_ID: usize = 2;

    /// Vocab over the given non-sentinel tokens, in the given order.
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>, min_count: usize) -> Result<Self> {
        let mut all: Vec<String> = vec![UNK.into(), BOS.into(), EOS.into()];
        all.extend(tokens);
        let mut ids = HashMap::with_capacity(all.len());
        for (i, t) in all.iter().enumerate() {
            if ids.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate vocab token '{t}'"
                )));
            }
        }
        Ok(Self {
            tokens: all,
            ids,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    /// Id of `token`, or [`Vocab::UNK_ID`].
    pub fn id(&self, token: &str) -> usize {
        self.ids.get(token).copied().unwrap_or(Self::UNK_ID)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    /// Every token including the sentinels, in id order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }
}

/// Builds a vocab from token sequences; tokens seen fewer than `min_count`
/// times map to `<unk>`.
pub fn build_vocab_from<'a>(
    sequences: impl IntoIterator<Item = &'a [String]>,
    min_count: usize,
) -> Result<Vocab> {
    if min_count == 0 {
        return Err(Error::InvalidArgument("min_count must be >= 1".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut any = false;
    for seq in sequences {
        for t in seq {
            any = true;
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    if !any {
        return Err(Error::Empty("corpus"));
    }
    let mut kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(t, c)| c >= min_count && t != UNK && t != BOS && t != EOS)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Vocab::from_tokens(kept.into_iter().map(|(t, _)| t.to_string()), min_count)
}

pub fn build_vocab(corpus: &Corpus, min_count: usize) -> Result<Vocab> {
    build_vocab_from(corpus.titles.iter().map(|t| t.tokens.as_slice()), min_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_maps_rare_tokens_to_unk() {
        let c = Corpus::from_raw_lines(["a a b"], "t");
        let v = build_vocab(&c, 2).unwrap();
        assert_eq!(v.tokens(), ["<unk>", "<s>", "</s>", "a"]);
        assert_eq!(v.id("b"), Vocab::UNK_ID);
        let v1 = build_vocab(&c, 1).unwrap();
        assert!(v1.contains("a") && v1.contains("b"));
        assert_eq!(v1.len(), 5);
    }

    #[test]
    fn order_is_count_then_lexicographic() {
        let c = Corpus::from_raw_lines(["z y y x", "x w"], "t");
        let v = build_vocab(&c, 1).unwrap();
        assert_eq!(&v.tokens()[3..], ["x", "y", "w", "z"]);
    }

    #[test]
    fn errors() {
        let c = Corpus::from_raw_lines(["a"], "t");
        assert!(build_vocab(&c, 0).is_err());
        let empty = Corpus::from_raw_lines(Vec::<&str>::new(), "t");
        assert!(matches!(build_vocab(&empty, 1), Err(Error::Empty(_))));
    }
}
