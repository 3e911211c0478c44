//! BIOES labels, chunk encoding/decoding and gazetteer auto-tagging.

mod conll;
mod split;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::corpus::Title;
use crate::error::{Error, Result};
use crate::gazetteer::{CoarseTag, Gazetteer};

pub use conll::{load_conll, read_conll, save_conll, write_conll};
pub use split::{split_dataset, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prefix {
    B,
    I,
    E,
    S,
    /// The bare `O` label.
    None,
}

const ENTITY_ORDER: [CoarseTag; 3] = [CoarseTag::Res, CoarseTag::Fun, CoarseTag::Loc];
const PREFIX_ORDER: [Prefix; 4] = [Prefix::B, Prefix::I, Prefix::E, Prefix::S];

/// One of the 13 BIOES labels, stored as its dense index.
///
/// Index 0 is `O`; then `B, I, E, S` for RES, FUN and LOC in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BioesLabel(u8);

impl BioesLabel {
    pub const O: BioesLabel = BioesLabel(0);
    pub const COUNT: usize = 13;

    /// `None` pairs only with `O`; `B/I/E/S` only with an entity tag.
    pub fn new(prefix: Prefix, tag: CoarseTag) -> Result<Self> {
        match (prefix, tag) {
            (Prefix::None, CoarseTag::O) => Ok(Self::O),
            (Prefix::None, _) | (_, CoarseTag::O) => Err(Error::InvalidArgument(format!(
                "no BIOES label for prefix {prefix:?} with tag {tag}"
            ))),
            (p, t) => {
                let ti = ENTITY_ORDER.iter().position(|&x| x == t).unwrap();
                let pi = PREFIX_ORDER.iter().position(|&x| x == p).unwrap();
                Ok(Self((1 + ti * 4 + pi) as u8))
            }
        }
    }

    pub fn entity(prefix: Prefix, tag: CoarseTag) -> Self {
        Self::new(prefix, tag).expect("entity label")
    }

    pub fn from_index(i: usize) -> Option<Self> {
        (i < Self::COUNT).then_some(Self(i as u8))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = BioesLabel> {
        (0..Self::COUNT as u8).map(BioesLabel)
    }

    pub fn prefix(self) -> Prefix {
        if self.0 == 0 {
            Prefix::None
        } else {
            PREFIX_ORDER[(self.0 as usize - 1) % 4]
        }
    }

    pub fn tag(self) -> CoarseTag {
        if self.0 == 0 {
            CoarseTag::O
        } else {
            ENTITY_ORDER[(self.0 as usize - 1) / 4]
        }
    }

    pub fn is_o(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for BioesLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.prefix() {
            Prefix::None => return f.write_str("O"),
            Prefix::B => "B",
            Prefix::I => "I",
            Prefix::E => "E",
            Prefix::S => "S",
        };
        write!(f, "{p}-{}", self.tag())
    }
}

impl FromStr for BioesLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "O" {
            return Ok(Self::O);
        }
        let bad = || Error::InvalidArgument(format!("not a BIOES label: '{s}'"));
        let (p, t) = s.split_once('-').ok_or_else(bad)?;
        let prefix = match p {
            "B" => Prefix::B,
            "I" => Prefix::I,
            "E" => Prefix::E,
            "S" => Prefix::S,
            _ => return Err(bad()),
        };
        let tag: CoarseTag = t.parse().map_err(|_| bad())?;
        Self::new(prefix, tag).map_err(|_| bad())
    }
}

/// A contiguous entity span, `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chunk {
    pub tag: CoarseTag,
    pub start: usize,
    pub end: usize,
}

impl Chunk {
    pub fn new(tag: CoarseTag, start: usize, end: usize) -> Self {
        Self { tag, start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodePolicy {
    /// Reject illegal transitions.
    Strict,
    /// Recover a chunking from any label sequence.
    Repair,
}

/// Maximal runs of one entity tag become chunks: a run of one is `S-X`,
/// longer runs are `B-X I-X… E-X`.
pub fn encode_bioes(coarse: &[CoarseTag]) -> Vec<BioesLabel> {
    let mut out = Vec::with_capacity(coarse.len());
    let mut i = 0;
    while i < coarse.len() {
        let tag = coarse[i];
        let mut j = i + 1;
        while j < coarse.len() && coarse[j] == tag {
            j += 1;
        }
        if tag == CoarseTag::O {
            out.extend(std::iter::repeat_n(BioesLabel::O, j - i));
        } else if j - i == 1 {
            out.push(BioesLabel::entity(Prefix::S, tag));
        } else {
            out.push(BioesLabel::entity(Prefix::B, tag));
            for _ in i + 1..j - 1 {
                out.push(BioesLabel::entity(Prefix::I, tag));
            }
            out.push(BioesLabel::entity(Prefix::E, tag));
        }
        i = j;
    }
    out
}

/// Recovers chunks from labels.
///
/// Under `Repair`, an orphan `I-X` opens a chunk, an orphan `E-X` closes a
/// one-token chunk, and a chunk interrupted by another label or by the end
/// of the sequence is closed just before the interruption.
pub fn decode_bioes(labels: &[BioesLabel], policy: DecodePolicy) -> Result<Vec<Chunk>> {
    let strict = policy == DecodePolicy::Strict;
    let illegal = |position: usize, reason: String| Error::IllegalSequence { position, reason };
    let mut chunks = Vec::new();
    let mut open: Option<(CoarseTag, usize)> = None;
    for (i, &label) in labels.iter().enumerate() {
        let tag = label.tag();
        let continues = matches!(open, Some((t, _)) if t == tag);
        match label.prefix() {
            Prefix::I | Prefix::E if continues => {
                if label.prefix() == Prefix::E {
                    let (t, s) = open.take().unwrap();
                    chunks.push(Chunk::new(t, s, i));
                }
            }
            p => {
                if let Some((t, s)) = open.take() {
                    if strict {
                        return Err(illegal(i, format!("{label} inside an open {t} chunk")));
                    }
                    chunks.push(Chunk::new(t, s, i - 1));
                }
                match p {
                    Prefix::None => {}
                    Prefix::S => chunks.push(Chunk::new(tag, i, i)),
                    Prefix::B => open = Some((tag, i)),
                    Prefix::I | Prefix::E if strict => {
                        return Err(illegal(i, format!("{label} without a preceding B-{tag}")));
                    }
                    Prefix::I => open = Some((tag, i)),
                    Prefix::E => chunks.push(Chunk::new(tag, i, i)),
                }
            }
        }
    }
    if let Some((t, s)) = open {
        if strict {
            return Err(illegal(
                labels.len() - 1,
                format!("{t} chunk is never closed"),
            ));
        }
        chunks.push(Chunk::new(t, s, labels.len() - 1));
    }
    Ok(chunks)
}

pub fn is_legal(labels: &[BioesLabel]) -> bool {
    decode_bioes(labels, DecodePolicy::Strict).is_ok()
}

/// Tokens with one BIOES label each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSequence {
    pub tokens: Vec<String>,
    pub labels: Vec<BioesLabel>,
}

impl LabeledSequence {
    /// Gold data: lengths must match and the labels must be BIOES-legal.
    pub fn new(tokens: Vec<String>, labels: Vec<BioesLabel>) -> Result<Self> {
        let seq = Self::prediction(tokens, labels)?;
        decode_bioes(&seq.labels, DecodePolicy::Strict)?;
        Ok(seq)
    }

    /// Model output: only the lengths are checked, since a tagger without
    /// transition constraints may emit illegal sequences.
    pub fn prediction(tokens: Vec<String>, labels: Vec<BioesLabel>) -> Result<Self> {
        if tokens.len() != labels.len() {
            return Err(Error::Misaligned(format!(
                "{} tokens but {} labels",
                tokens.len(),
                labels.len()
            )));
        }
        Ok(Self { tokens, labels })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn coarse(&self) -> Vec<CoarseTag> {
        self.labels.iter().map(|l| l.tag()).collect()
    }

    pub fn chunks(&self, policy: DecodePolicy) -> Result<Vec<Chunk>> {
        decode_bioes(&self.labels, policy)
    }
}

/// Per-token gazetteer lookup followed by [`encode_bioes`].
pub fn auto_tag(title: &Title, gazetteer: &Gazetteer) -> Result<LabeledSequence> {
    auto_tag_tokens(&title.tokens, gazetteer)
}

pub fn auto_tag_tokens(tokens: &[String], gazetteer: &Gazetteer) -> Result<LabeledSequence> {
    if tokens.is_empty() {
        return Err(Error::Empty("title"));
    }
    let coarse: Vec<CoarseTag> = tokens.iter().map(|t| gazetteer.lookup(t)).collect();
    Ok(LabeledSequence {
        tokens: tokens.to_vec(),
        labels: encode_bioes(&coarse),
    })
}

/// Token totals per coarse tag.
pub fn tag_counts(data: &[LabeledSequence]) -> BTreeMap<CoarseTag, usize> {
    let mut counts: BTreeMap<CoarseTag, usize> = CoarseTag::ALL.iter().map(|&t| (t, 0)).collect();
    for seq in data {
        for l in &seq.labels {
            *counts.get_mut(&l.tag()).unwrap() += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::normalize_title;
    use CoarseTag::*;

    fn labels(s: &str) -> Vec<BioesLabel> {
        s.split_whitespace().map(|l| l.parse().unwrap()).collect()
    }

    #[test]
    fn thirteen_distinct_labels_round_trip_through_text() {
        let all: Vec<BioesLabel> = BioesLabel::all().collect();
        assert_eq!(all.len(), 13);
        for l in all {
            assert_eq!(l.to_string().parse::<BioesLabel>().unwrap(), l);
            assert_eq!(l.is_o(), l.tag() == O);
        }
        assert!("X-RES".parse::<BioesLabel>().is_err());
        assert!("B-O".parse::<BioesLabel>().is_err());
        assert!(BioesLabel::new(Prefix::None, Res).is_err());
    }

    #[test]
    fn worked_example_encoding() {
        assert_eq!(
            encode_bioes(&[Res, Fun, Res, Loc, Loc]),
            labels("S-RES S-FUN S-RES B-LOC E-LOC")
        );
    }

    #[test]
    fn run_length_rule() {
        assert_eq!(encode_bioes(&[Loc, Loc, Loc]), labels("B-LOC I-LOC E-LOC"));
        assert_eq!(encode_bioes(&[O]), labels("O"));
        assert_eq!(encode_bioes(&[O, O, Res]), labels("O O S-RES"));
    }

    #[test]
    fn decode_worked_example() {
        let c = decode_bioes(
            &labels("S-RES S-FUN S-RES B-LOC E-LOC"),
            DecodePolicy::Strict,
        )
        .unwrap();
        assert_eq!(
            c,
            vec![
                Chunk::new(Res, 0, 0),
                Chunk::new(Fun, 1, 1),
                Chunk::new(Res, 2, 2),
                Chunk::new(Loc, 3, 4)
            ]
        );
        let c = decode_bioes(&labels("B-LOC E-LOC"), DecodePolicy::Strict).unwrap();
        assert_eq!(c, vec![Chunk::new(Loc, 0, 1)]);
    }

    #[test]
    fn strict_names_first_offending_position() {
        let err = decode_bioes(&labels("S-RES I-FUN E-FUN"), DecodePolicy::Strict).unwrap_err();
        assert!(matches!(err, Error::IllegalSequence { position: 1, .. }));
        let err = decode_bioes(&labels("B-RES E-FUN"), DecodePolicy::Strict).unwrap_err();
        assert!(matches!(err, Error::IllegalSequence { position: 1, .. }));
        let err = decode_bioes(&labels("O B-RES I-RES"), DecodePolicy::Strict).unwrap_err();
        assert!(matches!(err, Error::IllegalSequence { position: 2, .. }));
    }

    #[test]
    fn repair_orphans() {
        let r = |s: &str| decode_bioes(&labels(s), DecodePolicy::Repair).unwrap();
        assert_eq!(r("I-FUN E-FUN"), vec![Chunk::new(Fun, 0, 1)]);
        assert_eq!(r("E-RES"), vec![Chunk::new(Res, 0, 0)]);
        assert_eq!(
            r("B-RES O S-LOC"),
            vec![Chunk::new(Res, 0, 0), Chunk::new(Loc, 2, 2)]
        );
        assert_eq!(
            r("B-RES I-FUN"),
            vec![Chunk::new(Res, 0, 0), Chunk::new(Fun, 1, 1)]
        );
    }

    #[test]
    fn auto_tag_examples() {
        let g = Gazetteer::builtin();
        let t = normalize_title("Chief Financial Officer Asia Pacific");
        assert_eq!(
            auto_tag(&t, &g).unwrap().labels,
            labels("S-RES S-FUN S-RES B-LOC E-LOC")
        );
        assert_eq!(
            auto_tag(&normalize_title("manager"), &g).unwrap().labels,
            labels("S-RES")
        );
        assert_eq!(
            auto_tag(&normalize_title("zxqv"), &g).unwrap().labels,
            labels("O")
        );
        assert!(auto_tag(&normalize_title("!!"), &g).is_err());
    }

    #[test]
    fn gold_sequences_must_be_legal() {
        let toks = vec!["a".to_string(), "b".to_string()];
        assert!(LabeledSequence::new(toks.clone(), labels("I-RES E-RES")).is_err());
        assert!(LabeledSequence::prediction(toks.clone(), labels("I-RES E-RES")).is_ok());
        assert!(LabeledSequence::prediction(toks, labels("O")).is_err());
    }

    #[test]
    fn counts_by_coarse_tag() {
        let g = Gazetteer::builtin();
        let seqs: Vec<_> = ["senior sales manager", "director of asia"]
            .iter()
            .map(|s| auto_tag(&normalize_title(s), &g).unwrap())
            .collect();
        let c = tag_counts(&seqs);
        assert_eq!((c[&Res], c[&Fun], c[&Loc], c[&O]), (3, 1, 1, 1));
    }
}
