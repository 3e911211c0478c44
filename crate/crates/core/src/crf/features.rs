use std::collections::HashMap;

use rand::Rng;

use crate::gazetteer::Gazetteer;

/// Word-dropout replacement token.
pub const UNK: &str = "<unk>";
const BOS: &str = "<s>";
const EOS: &str = "</s>";

/// Dense feature-string → id mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureVocab {
    names: Vec<String>,
    ids: HashMap<String, usize>,
    frozen: bool,
}

impl FeatureVocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names(names: Vec<String>) -> Self {
        let ids = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Self {
            names,
            ids,
            frozen: true,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.ids.get(name).copied()
    }

    /// Returns the id, adding the feature unless the vocab is frozen.
    pub fn get_or_insert(&mut self, name: &str) -> Option<usize> {
        if let Some(&id) = self.ids.get(name) {
            return Some(id);
        }
        if self.frozen {
            return None;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        Some(id)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Copy of `tokens` with each token independently replaced by [`UNK`]
/// with probability `p`. Draws one random number per token even when `p` is 0.
pub fn word_dropout<R: Rng>(tokens: &[String], p: f64, rng: &mut R) -> Vec<String> {
    tokens
        .iter()
        .map(|t| {
            if rng.gen::<f64>() < p {
                UNK.to_string()
            } else {
                t.clone()
            }
        })
        .collect()
}

fn word(tokens: &[String], i: isize) -> &str {
    if i < 0 {
        BOS
    } else if i as usize >= tokens.len() {
        EOS
    } else {
        &tokens[i as usize]
    }
}

/// Feature strings for position `i`, in a fixed template order:
/// bias, the word window `w-2..w+2`, prefixes and suffixes up to three
/// characters, the previous-word bigram, first/last flags and, with a
/// gazetteer, the gazetteer tags of `i-1`, `i` and `i+1`.
pub fn extract_features(tokens: &[String], i: usize, gazetteer: Option<&Gazetteer>) -> Vec<String> {
    let mut f = Vec::with_capacity(24);
    let at = i as isize;
    let tok = tokens[i].as_str();
    f.push("bias".to_string());
    f.push(format!("w0={tok}"));
    f.push(format!("w-1={}", word(tokens, at - 1)));
    f.push(format!("w+1={}", word(tokens, at + 1)));
    f.push(format!("w-2={}", word(tokens, at - 2)));
    f.push(format!("w+2={}", word(tokens, at + 2)));
    if tok != UNK {
        let chars: Vec<char> = tok.chars().collect();
        for k in 1..=3.min(chars.len()) {
            f.push(format!("p{k}={}", chars[..k].iter().collect::<String>()));
            f.push(format!(
                "s{k}={}",
                chars[chars.len() - k..].iter().collect::<String>()
            ));
        }
    }
    f.push(format!("bi={}|{tok}", word(tokens, at - 1)));
    if i == 0 {
        f.push("first".to_string());
    }
    if i + 1 == tokens.len() {
        f.push("last".to_string());
    }
    if let Some(g) = gazetteer {
        for (key, j) in [("gaz-1", at - 1), ("gaz", at), ("gaz+1", at + 1)] {
            let w = word(tokens, j);
            match w {
                UNK => {}
                BOS | EOS => f.push(format!("{key}={w}")),
                _ => f.push(format!("{key}={}", g.lookup(w))),
            }
        }
    }
    f
}
