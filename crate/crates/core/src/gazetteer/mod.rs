//! Token gazetteer built from three annotators' votes.

mod builtin;
mod irr;

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{ngram_counts, Corpus};
use crate::error::{Error, Result};

pub use irr::{cohens_kappa, irr_report, percentage_agreement, synth_annotations, IrrReport};

/// Coarse entity class of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoarseTag {
    Res,
    Fun,
    Loc,
    O,
}

impl CoarseTag {
    pub const ALL: [CoarseTag; 4] = [CoarseTag::Res, CoarseTag::Fun, CoarseTag::Loc, CoarseTag::O];
    /// Entity tags in report order.
    pub const ENTITIES: [CoarseTag; 3] = [CoarseTag::Fun, CoarseTag::Loc, CoarseTag::Res];

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseTag::Res => "RES",
            CoarseTag::Fun => "FUN",
            CoarseTag::Loc => "LOC",
            CoarseTag::O => "O",
        }
    }

    pub fn is_entity(self) -> bool {
        self != CoarseTag::O
    }
}

impl fmt::Display for CoarseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoarseTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "RES" => Ok(CoarseTag::Res),
            "FUN" => Ok(CoarseTag::Fun),
            "LOC" => Ok(CoarseTag::Loc),
            "O" => Ok(CoarseTag::O),
            other => Err(Error::InvalidArgument(format!(
                "unknown coarse tag '{other}'"
            ))),
        }
    }
}

/// One annotator's votes, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet {
    pub annotator_id: String,
    votes: Vec<(String, CoarseTag)>,
    index: HashMap<String, usize>,
}

impl AnnotationSet {
    /// Fails on a duplicate token.
    pub fn new(
        annotator_id: impl Into<String>,
        votes: impl IntoIterator<Item = (String, CoarseTag)>,
    ) -> Result<Self> {
        let mut set = Self {
            annotator_id: annotator_id.into(),
            votes: Vec::new(),
            index: HashMap::new(),
        };
        for (token, tag) in votes {
            if set.index.contains_key(&token) {
                return Err(Error::InvalidArgument(format!(
                    "annotator {} voted twice on '{token}'",
                    set.annotator_id
                )));
            }
            set.index.insert(token.clone(), set.votes.len());
            set.votes.push((token, tag));
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.votes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.votes.is_empty()
    }

    pub fn votes(&self) -> &[(String, CoarseTag)] {
        &self.votes
    }

    pub fn vote(&self, token: &str) -> Option<CoarseTag> {
        self.index.get(token).map(|&i| self.votes[i].1)
    }

    /// Reads `token<TAB>tag` lines.
    pub fn read<R: BufRead>(annotator_id: &str, reader: R) -> Result<Self> {
        let mut votes = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(tok), Some(tag), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Format {
                    what: "annotation file",
                    line: i + 1,
                    reason: "expected token<TAB>tag".into(),
                });
            };
            let tag = tag.parse().map_err(|e: Error| Error::Format {
                what: "annotation file",
                line: i + 1,
                reason: e.to_string(),
            })?;
            votes.push((tok.to_string(), tag));
        }
        Self::new(annotator_id, votes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::read(&id, BufReader::new(f))
    }

    pub(crate) fn same_coverage(&self, other: &AnnotationSet) -> bool {
        self.len() == other.len() && self.votes.iter().all(|(t, _)| other.index.contains_key(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Agreement {
    Unanimous,
    Majority,
}

impl Agreement {
    pub fn as_str(self) -> &'static str {
        match self {
            Agreement::Unanimous => "UNANIMOUS",
            Agreement::Majority => "MAJORITY",
        }
    }
}

impl FromStr for Agreement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "UNANIMOUS" => Ok(Agreement::Unanimous),
            "MAJORITY" => Ok(Agreement::Majority),
            other => Err(Error::InvalidArgument(format!(
                "unknown agreement '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerEntry {
    pub token: String,
    pub tag: CoarseTag,
    pub votes: [CoarseTag; 3],
    pub agreement: Agreement,
}

/// Token → coarse tag dictionary. Entry order is preserved for output.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    index: HashMap<String, usize>,
}

/// Result of merging three annotation sets.
#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub gazetteer: Gazetteer,
    /// Tokens on which all three annotators disagreed.
    pub rejected: Vec<String>,
}

fn majority(votes: [CoarseTag; 3]) -> Option<(CoarseTag, Agreement)> {
    let [a, b, c] = votes;
    if a == b && b == c {
        Some((a, Agreement::Unanimous))
    } else if a == b || a == c {
        Some((a, Agreement::Majority))
    } else if b == c {
        Some((b, Agreement::Majority))
    } else {
        None
    }
}

/// Majority vote per token; tokens without a two-vote majority are rejected.
pub fn merge_annotations(sets: &[AnnotationSet; 3]) -> Result<MergeOutcome> {
    if !sets[0].same_coverage(&sets[1]) || !sets[0].same_coverage(&sets[2]) {
        return Err(Error::Misaligned(
            "annotation sets cover different tokens".into(),
        ));
    }
    let mut entries = Vec::new();
    let mut rejected = Vec::new();
    for (token, a) in sets[0].votes() {
        let votes = [
            *a,
            sets[1].vote(token).unwrap(),
            sets[2].vote(token).unwrap(),
        ];
        match majority(votes) {
            Some((tag, agreement)) => entries.push(GazetteerEntry {
                token: token.clone(),
                tag,
                votes,
                agreement,
            }),
            None => rejected.push(token.clone()),
        }
    }
    Ok(MergeOutcome {
        gazetteer: Gazetteer::from_entries(entries)?,
        rejected,
    })
}

/// The `k` most frequent unigrams. When the vocabulary is smaller than `k`
/// the whole vocabulary is returned together with a warning message.
pub fn top_unigrams(corpus: &Corpus, k: usize) -> Result<(Vec<String>, Option<String>)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let table = ngram_counts(corpus, 1)?;
    let warning = (k > table.entries.len()).then(|| {
        format!(
            "requested top {k} unigrams but the vocabulary has only {} tokens",
            table.entries.len()
        )
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    let tokens = table.top(k).iter().map(|(g, _)| g[0].clone()).collect();
    Ok((tokens, warning))
}

impl Gazetteer {
    pub fn from_entries(entries: Vec<GazetteerEntry>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.token.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate gazetteer token '{}'",
                    e.token
                )));
            }
        }
        Ok(Self { entries, index })
    }

    /// Unanimous entries from a plain token → tag list.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, CoarseTag)>) -> Result<Self> {
        Self::from_entries(
            pairs
                .into_iter()
                .map(|(t, tag)| GazetteerEntry {
                    token: t.to_string(),
                    tag,
                    votes: [tag; 3],
                    agreement: Agreement::Unanimous,
                })
                .collect(),
        )
    }

    /// A small hand-written gazetteer seeded with common title vocabulary.
    pub fn builtin() -> Self {
        builtin::builtin()
    }

    /// Tag for a normalized token; out-of-gazetteer tokens are `O`.
    pub fn lookup(&self, token: &str) -> CoarseTag {
        self.get(token).map_or(CoarseTag::O, |e| e.tag)
    }

    pub fn get(&self, token: &str) -> Option<&GazetteerEntry> {
        self.index.get(token).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tokens_with_tag(&self, tag: CoarseTag) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.tag == tag)
            .map(|e| e.token.as_str())
            .collect()
    }

    pub fn count(&self, agreement: Agreement) -> usize {
        self.entries
            .iter()
            .filter(|e| e.agreement == agreement)
            .count()
    }

    /// Reorders entries by descending corpus frequency (lexicographic ties);
    /// tokens absent from the corpus go last, lexicographically.
    pub fn sort_by_frequency(&mut self, corpus: &Corpus) {
        let mut freq: HashMap<&str, usize> = HashMap::new();
        for t in &corpus.titles {
            for tok in &t.tokens {
                *freq.entry(tok.as_str()).or_default() += 1;
            }
        }
        let mut entries = std::mem::take(&mut self.entries);
        entries.sort_by(|a, b| {
            let fa = freq.get(a.token.as_str()).copied().unwrap_or(0);
            let fb = freq.get(b.token.as_str()).copied().unwrap_or(0);
            fb.cmp(&fa).then_with(|| a.token.cmp(&b.token))
        });
        *self = Self::from_entries(entries).expect("tokens stay unique");
    }

    /// `token, tag, vote_a, vote_b, vote_c, agreement`, tab-separated.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.entries {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                e.token,
                e.tag,
                e.votes[0],
                e.votes[1],
                e.votes[2],
                e.agreement.as_str()
            )?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| Error::Format {
                what: "gazetteer file",
                line: i + 1,
                reason,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(bad(format!("expected 6 columns, found {}", cols.len())));
            }
            let tag: CoarseTag = cols[1].parse().map_err(|e: Error| bad(e.to_string()))?;
            let mut votes = [CoarseTag::O; 3];
            for (v, c) in votes.iter_mut().zip(&cols[2..5]) {
                *v = c.parse().map_err(|e: Error| bad(e.to_string()))?;
            }
            let agreement: Agreement = cols[5].parse().map_err(|e: Error| bad(e.to_string()))?;
            match majority(votes) {
                Some((t, a)) if t == tag && a == agreement => {}
                _ => return Err(bad("tag or agreement is inconsistent with the votes".into())),
            }
            entries.push(GazetteerEntry {
                token: cols[0].to_string(),
                tag,
                votes,
                agreement,
            });
        }
        Self::from_entries(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_tsv(BufReader::new(f))
    }
}
