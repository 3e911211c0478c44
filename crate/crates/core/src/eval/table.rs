use std::fmt::Write as _;

use super::MetricsReport;
use crate::gazetteer::CoarseTag;

/// Overall and per-tag comparison of named reports, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub overall_header: Vec<String>,
    pub overall: Vec<Vec<String>>,
    pub per_tag_header: Vec<String>,
    pub per_tag: Vec<Vec<String>>,
}

/// Overall columns are P, R, EM, F1 followed by the title-level and
/// overlap EM readings. The per-tag section gives EM (overlap) and F1 for
/// FUN, LOC and RES.
pub fn compare_models(reports: &[(String, MetricsReport)]) -> Comparison {
    let fmt = |v: f64| format!("{v:.2}");
    let overall_header = ["Model", "P", "R", "EM", "F1", "EM-title", "EM-overlap"]
        .map(String::from)
        .to_vec();
    let overall = reports
        .iter()
        .map(|(name, r)| {
            let mut row = vec![name.clone()];
            row.extend(
                [
                    r.precision,
                    r.recall,
                    r.em_token,
                    r.f1,
                    r.em_title,
                    r.em_overlap,
                ]
                .map(fmt),
            );
            row
        })
        .collect();
    let mut per_tag_header = vec!["Model".to_string()];
    for tag in CoarseTag::ENTITIES {
        per_tag_header.push(format!("{tag} EM"));
        per_tag_header.push(format!("{tag} F1"));
    }
    let per_tag = reports
        .iter()
        .map(|(name, r)| {
            let mut row = vec![name.clone()];
            for tag in CoarseTag::ENTITIES {
                let s = r.tag(tag);
                row.push(fmt(s.em));
                row.push(fmt(s.f1));
            }
            row
        })
        .collect();
    Comparison {
        overall_header,
        overall,
        per_tag_header,
        per_tag,
    }
}

impl Comparison {
    pub fn to_text(&self) -> String {
        let mut s = String::from("Overall\n");
        aligned(&mut s, &self.overall_header, &self.overall);
        s.push_str("\nPer tag\n");
        aligned(&mut s, &self.per_tag_header, &self.per_tag);
        s
    }

    /// Two tab-separated tables separated by a blank line.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (header, rows) in [
            (&self.overall_header, &self.overall),
            (&self.per_tag_header, &self.per_tag),
        ] {
            if !s.is_empty() {
                s.push('\n');
            }
            let _ = writeln!(s, "{}", header.join("\t"));
            for r in rows {
                let _ = writeln!(s, "{}", r.join("\t"));
            }
        }
        s
    }
}

fn aligned(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    for r in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let mut line = String::new();
        for (i, (c, w)) in r.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(line, "{c:<w$}");
            } else {
                let _ = write!(line, "  {c:>w$}");
            }
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::score;
    use crate::eval::tests::hand_fixture;

    #[test]
    fn layout() {
        let (g, p) = hand_fixture();
        let r = score(&g, &p).unwrap();
        let names = ["LogReg", "LSTM", "CRF", "LSTM-CRF", "Human"];
        let reports: Vec<_> = names.iter().map(|n| (n.to_string(), r.clone())).collect();
        let t = compare_models(&reports);
        assert_eq!(&t.overall_header[1..5], ["P", "R", "EM", "F1"]);
        assert_eq!(t.overall.len(), 5);
        assert_eq!(
            t.overall[0][..5],
            ["LogReg", "87.50", "77.78", "80.00", "82.35"]
        );
        assert_eq!(
            t.per_tag_header[1..],
            ["FUN EM", "FUN F1", "LOC EM", "LOC F1", "RES EM", "RES F1"]
        );
        let text = t.to_text();
        assert_eq!(
            text.lines().filter(|l| l.starts_with("LSTM-CRF")).count(),
            2
        );
        let tsv = t.to_tsv();
        assert!(tsv.starts_with("Model\tP\tR\tEM\tF1\t"));
        assert_eq!(tsv.lines().count(), 13);

        let one = compare_models(&reports[..1]);
        assert_eq!((one.overall.len(), one.per_tag.len()), (1, 1));
    }
}
