use std::collections::{BTreeMap, HashMap};

use super::{Corpus, Region};
use crate::error::{Error, Result};

/// Word-count summary for one group of titles.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthSummary {
    pub count: usize,
    pub min: usize,
    pub max: usize,
    pub avg: f64,
    /// Mean of the two middle values for an even count.
    pub median: f64,
}

impl LengthSummary {
    fn from_lengths(mut lengths: Vec<usize>) -> Option<Self> {
        if lengths.is_empty() {
            return None;
        }
        lengths.sort_unstable();
        let n = lengths.len();
        let sum: usize = lengths.iter().sum();
        let median = if n % 2 == 1 {
            lengths[n / 2] as f64
        } else {
            (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
        };
        Some(Self {
            count: n,
            min: lengths[0],
            max: lengths[n - 1],
            avg: sum as f64 / n as f64,
            median,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthStats {
    pub overall: LengthSummary,
    /// Only regions that occur in the corpus.
    pub by_region: BTreeMap<Region, LengthSummary>,
}

pub fn length_stats(corpus: &Corpus) -> Result<LengthStats> {
    let overall = LengthSummary::from_lengths(corpus.titles.iter().map(|t| t.len()).collect())
        .ok_or(Error::Empty("corpus"))?;
    let mut by_region = BTreeMap::new();
    for region in Region::ALL {
        let lens: Vec<usize> = corpus
            .titles
            .iter()
            .filter(|t| t.region == region)
            .map(|t| t.len())
            .collect();
        if let Some(s) = LengthSummary::from_lengths(lens) {
            by_region.insert(region, s);
        }
    }
    Ok(LengthStats { overall, by_region })
}

/// Share of titles (in percent) per word count.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthHistogram {
    pub overall: BTreeMap<usize, f64>,
    pub by_region: BTreeMap<Region, BTreeMap<usize, f64>>,
}

impl LengthHistogram {
    /// Percentage of all titles whose length is at most `max_len`.
    pub fn cumulative_share(&self, max_len: usize) -> f64 {
        self.overall.range(..=max_len).map(|(_, p)| p).sum()
    }
}

fn percentages(lengths: impl Iterator<Item = usize>) -> BTreeMap<usize, f64> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut total = 0usize;
    for l in lengths {
        *counts.entry(l).or_default() += 1;
        total += 1;
    }
    counts
        .into_iter()
        .map(|(l, c)| (l, 100.0 * c as f64 / total as f64))
        .collect()
}

pub fn length_histogram(corpus: &Corpus) -> Result<LengthHistogram> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    let overall = percentages(corpus.titles.iter().map(|t| t.len()));
    let mut by_region = BTreeMap::new();
    for region in Region::ALL {
        if corpus.titles.iter().any(|t| t.region == region) {
            let h = percentages(
                corpus
                    .titles
                    .iter()
                    .filter(|t| t.region == region)
                    .map(|t| t.len()),
            );
            by_region.insert(region, h);
        }
    }
    Ok(LengthHistogram { overall, by_region })
}

/// Ranked n-gram counts: descending count, lexicographic ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramTable {
    pub n: usize,
    pub entries: Vec<(Vec<String>, usize)>,
}

impl NgramTable {
    pub fn top(&self, k: usize) -> &[(Vec<String>, usize)] {
        &self.entries[..k.min(self.entries.len())]
    }

    pub fn count_of(&self, gram: &[&str]) -> usize {
        self.entries
            .iter()
            .find(|(g, _)| g.iter().map(String::as_str).eq(gram.iter().copied()))
            .map_or(0, |(_, c)| *c)
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, c)| c).sum()
    }
}

pub fn ngram_counts(corpus: &Corpus, n: usize) -> Result<NgramTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("n-gram order must be >= 1".into()));
    }
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    for t in &corpus.titles {
        for w in t.tokens.windows(n) {
            *counts.entry(w).or_default() += 1;
        }
    }
    let mut entries: Vec<(Vec<String>, usize)> =
        counts.into_iter().map(|(g, c)| (g.to_vec(), c)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(NgramTable { n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusFormat, Title};

    fn corpus(lines: &[&str]) -> Corpus {
        Corpus::from_raw_lines(lines.iter().copied(), "test")
    }

    #[test]
    fn single_title_stats() {
        let s = length_stats(&corpus(&["a b c d"])).unwrap().overall;
        assert_eq!((s.min, s.max, s.median, s.avg), (4, 4, 4.0, 4.0));
    }

    #[test]
    fn three_lengths() {
        let s = length_stats(&corpus(&["a", "a b", "a b c"]))
            .unwrap()
            .overall;
        assert_eq!(s.avg, 2.0);
        assert_eq!(s.median, 2.0);
    }

    #[test]
    fn per_region_breakdown() {
        let c = Corpus::read(
            "a b c\tUS\tp1\na\tASIA\tp2\na b\tASIA\tp3\n".as_bytes(),
            CorpusFormat::Tsv,
            "t",
        )
        .unwrap();
        let s = length_stats(&c).unwrap();
        assert_eq!(s.by_region[&Region::Us].median, 3.0);
        assert_eq!(s.by_region[&Region::Asia].median, 1.5);
        assert!(!s.by_region.contains_key(&Region::Unknown));
    }

    #[test]
    fn empty_corpus_errors() {
        let c = corpus(&[]);
        assert!(length_stats(&c).is_err());
        assert!(length_histogram(&c).is_err());
    }

    #[test]
    fn histogram_bins() {
        let h = length_histogram(&corpus(&["a"])).unwrap();
        assert_eq!(h.overall[&1], 100.0);
        let h = length_histogram(&corpus(&["a", "a b c"])).unwrap();
        assert_eq!(h.overall[&1], 50.0);
        assert_eq!(h.overall[&3], 50.0);
        assert_eq!(h.cumulative_share(2), 50.0);
    }

    #[test]
    fn unigram_counts_and_order() {
        let t = ngram_counts(&corpus(&["a b a"]), 1).unwrap();
        assert_eq!(
            t.entries,
            vec![(vec!["a".to_string()], 2), (vec!["b".to_string()], 1)]
        );
    }

    #[test]
    fn ties_are_lexicographic() {
        let t = ngram_counts(&corpus(&["z y", "y z"]), 1).unwrap();
        assert_eq!(t.entries[0].0, ["y"]);
        let t = ngram_counts(&corpus(&["b c", "a b"]), 2).unwrap();
        assert_eq!(t.entries[0].0, ["a", "b"]);
        assert_eq!(t.count_of(&["b", "c"]), 1);
    }

    #[test]
    fn order_beyond_every_title_is_empty() {
        let t = ngram_counts(&corpus(&["a b"]), 3).unwrap();
        assert!(t.entries.is_empty());
        assert!(ngram_counts(&corpus(&["a"]), 0).is_err());
    }

    #[test]
    fn regions_sum_to_hundred() {
        let titles = (0..7).map(|i| Title {
            raw: String::new(),
            tokens: vec!["x".into(); 1 + i % 3],
            region: if i % 2 == 0 { Region::Us } else { Region::Asia },
            profile_id: None,
        });
        let h = length_histogram(&Corpus::new(titles, "t")).unwrap();
        for bins in h.by_region.values() {
            let s: f64 = bins.values().sum();
            assert!((s - 100.0).abs() < 0.01);
        }
    }
}
