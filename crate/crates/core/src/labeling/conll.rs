//! `token<TAB>label` per line, one blank line after each title.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{BioesLabel, LabeledSequence};
use crate::error::{Error, Result};

pub fn write_conll<W: Write>(mut w: W, data: &[LabeledSequence]) -> Result<()> {
    for seq in data {
        for (tok, label) in seq.tokens.iter().zip(&seq.labels) {
            writeln!(w, "{tok}\t{label}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads CoNLL data. With `strict`, every title must be BIOES-legal
/// (gold files); otherwise illegal label sequences are accepted (predictions).
pub fn read_conll<R: BufRead>(reader: R, strict: bool) -> Result<Vec<LabeledSequence>> {
    let mut out = Vec::new();
    let mut tokens = Vec::new();
    let mut labels = Vec::new();
    let mut start_line = 1;
    let mut flush = |tokens: &mut Vec<String>, labels: &mut Vec<BioesLabel>, line: usize| {
        if tokens.is_empty() {
            return Ok(());
        }
        let (t, l) = (std::mem::take(tokens), std::mem::take(labels));
        let seq = if strict {
            LabeledSequence::new(t, l)
        } else {
            LabeledSequence::prediction(t, l)
        };
        out.push(seq.map_err(|e| Error::Format {
            what: "CoNLL file",
            line,
            reason: e.to_string(),
        })?);
        Ok::<(), Error>(())
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            flush(&mut tokens, &mut labels, start_line)?;
            start_line = i + 2;
            continue;
        }
        let (tok, label) = line.split_once('\t').ok_or_else(|| Error::Format {
            what: "CoNLL file",
            line: i + 1,
            reason: "expected token<TAB>label".into(),
        })?;
        let label: BioesLabel = label.trim().parse().map_err(|e: Error| Error::Format {
            what: "CoNLL file",
            line: i + 1,
            reason: e.to_string(),
        })?;
        tokens.push(tok.to_string());
        labels.push(label);
    }
    flush(&mut tokens, &mut labels, start_line)?;
    Ok(out)
}

pub fn load_conll(path: impl AsRef<Path>, strict: bool) -> Result<Vec<LabeledSequence>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_conll(BufReader::new(f), strict)
}

pub fn save_conll(path: impl AsRef<Path>, data: &[LabeledSequence]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_conll(&mut w, data)?;
    w.flush().map_err(|e| Error::io(path, e))
}
