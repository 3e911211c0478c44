//! Title corpora: normalization, loading and descriptive statistics.

mod stats;
mod synth;

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub use stats::{
    length_histogram, length_stats, ngram_counts, LengthHistogram, LengthStats, LengthSummary,
    NgramTable,
};
pub use synth::synth_corpus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Us,
    Asia,
    Unknown,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Us, Region::Asia, Region::Unknown];

    /// Lenient parse: anything other than US / ASIA maps to `Unknown`.
    pub fn parse_lenient(s: &str) -> Region {
        match s.trim().to_ascii_uppercase().as_str() {
            "US" | "USA" => Region::Us,
            "ASIA" => Region::Asia,
            _ => Region::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Us => "US",
            Region::Asia => "ASIA",
            Region::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One occupation entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Title {
    pub raw: String,
    pub tokens: Vec<String>,
    pub region: Region,
    pub profile_id: Option<String>,
}

impl Title {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Tokens joined by single spaces.
    pub fn canonical(&self) -> String {
        self.tokens.join(" ")
    }
}

// Characters that separate words; everything else outside [a-z0-9&] is dropped.
fn is_separator(c: char) -> bool {
    c.is_whitespace()
        || matches!(
            c,
            '/' | '\\'
                | ','
                | ';'
                | ':'
                | '|'
                | '-'
                | '_'
                | '+'
                | '('
                | ')'
                | '['
                | ']'
                | '{'
                | '}'
                | '<'
                | '>'
                | '\u{2010}'..='\u{2015}'
        )
}

fn push_token(out: &mut Vec<String>, word: &str) {
    if word.is_empty() {
        return;
    }
    if word.chars().all(|c| c == '&') {
        out.push("and".to_string());
        return;
    }
    let core = word.trim_matches('&');
    if word.starts_with('&') {
        out.push("and".to_string());
    }
    out.push(core.to_string());
    if word.ends_with('&') {
        out.push("and".to_string());
    }
}

/// Normalizes a raw title: compatibility decomposition and lowercasing,
/// separators to spaces, other symbols removed, standalone `&` to `and`.
/// Embedded ampersands (`r&d`) stay inside their token. No stemming.
pub fn normalize_title(raw: &str) -> Title {
    let folded: String = raw
        .nfkd()
        .collect::<String>()
        .to_lowercase()
        .nfkd()
        .collect();
    let mut cleaned = String::with_capacity(folded.len());
    for c in folded.chars() {
        if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '&' {
            cleaned.push(c);
        } else if is_separator(c) {
            cleaned.push(' ');
        }
    }
    let mut tokens = Vec::new();
    for word in cleaned.split_whitespace() {
        push_token(&mut tokens, word);
    }
    Title {
        raw: raw.to_string(),
        tokens,
        region: Region::Unknown,
        profile_id: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One raw title per line.
    Lines,
    /// `raw<TAB>region<TAB>profile_id`, no header.
    Tsv,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lines" => Ok(CorpusFormat::Lines),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(Error::InvalidArgument(format!(
                "unknown corpus format '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRow {
    pub line: usize,
    pub reason: String,
}

/// A set of non-empty titles plus the bookkeeping from loading them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub titles: Vec<Title>,
    pub source_label: String,
    /// Titles that normalized to zero tokens and were excluded.
    pub empty_titles: usize,
    pub skipped_rows: Vec<SkippedRow>,
}

impl Corpus {
    /// Builds a corpus, dropping (and counting) empty titles.
    pub fn new(titles: impl IntoIterator<Item = Title>, source_label: impl Into<String>) -> Self {
        let mut kept = Vec::new();
        let mut empty = 0;
        for t in titles {
            if t.is_empty() {
                empty += 1;
            } else {
                kept.push(t);
            }
        }
        Self {
            titles: kept,
            source_label: source_label.into(),
            empty_titles: empty,
            skipped_rows: Vec::new(),
        }
    }

    pub fn from_raw_lines<'a>(lines: impl IntoIterator<Item = &'a str>, label: &str) -> Self {
        Self::new(lines.into_iter().map(normalize_title), label)
    }

    pub fn len(&self) -> usize {
        self.titles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.titles.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.titles.iter().map(Title::len).sum()
    }

    pub fn read<R: BufRead>(reader: R, format: CorpusFormat, label: &str) -> Result<Self> {
        let mut titles = Vec::new();
        let mut skipped = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            let lineno = idx + 1;
            match format {
                CorpusFormat::Lines => titles.push(normalize_title(line)),
                CorpusFormat::Tsv => {
                    let cols: Vec<&str> = line.split('\t').collect();
                    if cols.len() != 3 {
                        log::warn!("line {lineno}: expected 3 columns, found {}", cols.len());
                        skipped.push(SkippedRow {
                            line: lineno,
                            reason: format!(
                                "expected 3 tab-separated columns, found {}",
                                cols.len()
                            ),
                        });
                        continue;
                    }
                    let mut t = normalize_title(cols[0]);
                    t.region = Region::parse_lenient(cols[1]);
                    let pid = cols[2].trim();
                    t.profile_id = (!pid.is_empty()).then(|| pid.to_string());
                    titles.push(t);
                }
            }
        }
        let mut corpus = Corpus::new(titles, label);
        corpus.skipped_rows = skipped;
        Ok(corpus)
    }

    /// Writes one canonical title per line (LINES) or canonical/region/profile (TSV).
    pub fn write<W: Write>(&self, mut w: W, format: CorpusFormat) -> Result<()> {
        for t in &self.titles {
            match format {
                CorpusFormat::Lines => writeln!(w, "{}", t.canonical())?,
                CorpusFormat::Tsv => writeln!(
                    w,
                    "{}\t{}\t{}",
                    t.canonical(),
                    t.region,
                    t.profile_id.as_deref().unwrap_or("")
                )?,
            }
        }
        Ok(())
    }

    /// Number of distinct profile ids among titles that carry one.
    pub fn profile_count(&self) -> usize {
        let mut ids: Vec<&str> = self
            .titles
            .iter()
            .filter_map(|t| t.profile_id.as_deref())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Loads a corpus file; every line goes through [`normalize_title`].
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Corpus::read(BufReader::new(file), format, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(raw: &str) -> Vec<String> {
        normalize_title(raw).tokens
    }

    #[test]
    fn worked_example_title() {
        assert_eq!(
            toks("Chief Financial Officer Asia Pacific"),
            ["chief", "financial", "officer", "asia", "pacific"]
        );
    }

    #[test]
    fn embedded_ampersand_survives() {
        assert_eq!(toks("R&D Manager"), ["r&d", "manager"]);
    }

    #[test]
    fn standalone_ampersand_becomes_and() {
        assert_eq!(toks("Sales & Marketing"), ["sales", "and", "marketing"]);
        assert_eq!(toks("Sales& Marketing"), ["sales", "and", "marketing"]);
        assert_eq!(toks("&&"), ["and"]);
    }

    #[test]
    fn separators_split_and_symbols_vanish() {
        assert_eq!(toks("VP, Sales/Marketing"), ["vp", "sales", "marketing"]);
        assert_eq!(
            toks("Sr. Vice-President (APAC)"),
            ["sr", "vice", "president", "apac"]
        );
        assert_eq!(toks("V.P. #1 @ Acme!"), ["vp", "1", "acme"]);
    }

    #[test]
    fn unicode_is_folded() {
        assert_eq!(toks("Café MANAGER"), ["cafe", "manager"]);
        assert_eq!(toks("ＦＵＬＬＷＩＤＴＨ"), ["fullwidth"]);
    }

    #[test]
    fn trivial_and_empty() {
        assert_eq!(toks("director"), ["director"]);
        let t = normalize_title("!!! ### ***");
        assert!(t.is_empty());
    }

    #[test]
    fn tsv_row_mapping() {
        let c = Corpus::read("VP Sales\tUS\tp1\n".as_bytes(), CorpusFormat::Tsv, "t").unwrap();
        assert_eq!(c.titles[0].tokens, ["vp", "sales"]);
        assert_eq!(c.titles[0].region, Region::Us);
        assert_eq!(c.titles[0].profile_id.as_deref(), Some("p1"));
    }

    #[test]
    fn malformed_tsv_rows_are_skipped_with_line_numbers() {
        let input = "a\tUS\tp1\nbroken row\nb\tasia\tp2\nc\tEU\tp3\textra\n";
        let c = Corpus::read(input.as_bytes(), CorpusFormat::Tsv, "t").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.titles[1].region, Region::Asia);
        let lines: Vec<usize> = c.skipped_rows.iter().map(|s| s.line).collect();
        assert_eq!(lines, [2, 4]);
    }

    #[test]
    fn unknown_region() {
        assert_eq!(Region::parse_lenient("europe"), Region::Unknown);
        assert_eq!(Region::parse_lenient(""), Region::Unknown);
    }

    #[test]
    fn lines_counts_and_empties() {
        let c = Corpus::read("a\n\nb c\n***\nd\n".as_bytes(), CorpusFormat::Lines, "t").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.empty_titles, 2);
    }

    #[test]
    fn load_missing_file_is_an_io_error() {
        let err = load_corpus("/nonexistent/definitely/not/here", CorpusFormat::Lines).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn profile_count_dedups() {
        let c = Corpus::read(
            "a\tUS\tp1\nb\tUS\tp1\nc\tASIA\tp2\n".as_bytes(),
            CorpusFormat::Tsv,
            "t",
        )
        .unwrap();
        assert_eq!(c.profile_count(), 2);
    }
}
