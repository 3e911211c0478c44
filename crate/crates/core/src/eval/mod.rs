//! Token-level NER metrics, the annotator baseline, comparison tables and
//! the grid-search harness.
//!
//! Counting is micro over non-O labels and prefix-sensitive: a token is a
//! true positive when its predicted label is non-O and equals gold exactly,
//! a false positive when the prediction is non-O and wrong, and a false
//! negative when gold is non-O and the prediction differs. A token with
//! gold `B-FUN` predicted as `I-FUN` is therefore both.

mod grid;
mod table;

use std::collections::BTreeMap;

pub use grid::{grid_search, GridOutcome, GridPoint, GridRow, GridSearchResult, SearchSpace};
pub use table::{compare_models, Comparison};

use crate::error::{Error, Result};
use crate::gazetteer::CoarseTag;
use crate::kv;
use crate::labeling::LabeledSequence;

/// Raw confusion counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    /// `100 · tp / (tp + fp)`; with nothing predicted it is 100 when nothing
    /// was missed either, else 0.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp, self.fn_ == 0)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_, self.fp == 0)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }

    /// `100 · tp / (tp + fp + fn)`, the overlap between the positive sets.
    pub fn overlap(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp + self.fn_, true)
    }

    fn add(&mut self, o: Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

fn ratio(num: usize, den: usize, vacuous_ok: bool) -> f64 {
    match den {
        0 if vacuous_ok => 100.0,
        0 => 0.0,
        d => 100.0 * num as f64 / d as f64,
    }
}

/// Harmonic mean of two percentages, 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Scores restricted to one coarse tag.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TagScores {
    pub precision: f64,
    pub recall: f64,
    /// Overlap `tp / (tp + fp + fn)` within the tag.
    pub em: f64,
    pub f1: f64,
    pub counts: Counts,
}

impl TagScores {
    fn from_counts(c: Counts) -> Self {
        Self {
            precision: c.precision(),
            recall: c.recall(),
            em: c.overlap(),
            f1: c.f1(),
            counts: c,
        }
    }
}

/// All values are percentages in `[0, 100]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Fraction of tokens whose full label matches gold. The headline EM.
    pub em_token: f64,
    /// Fraction of titles whose whole label sequence matches gold.
    pub em_title: f64,
    /// `tp / (tp + fp + fn)` over non-O labels.
    pub em_overlap: f64,
    pub tokens: usize,
    pub titles: usize,
    pub counts: Counts,
    /// Keyed by FUN, LOC, RES.
    pub per_tag: BTreeMap<CoarseTag, TagScores>,
}

impl MetricsReport {
    pub fn tag(&self, tag: CoarseTag) -> &TagScores {
        &self.per_tag[&tag]
    }

    /// Flat key=value pairs in a fixed order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![
            ("precision".into(), pct(self.precision)),
            ("recall".into(), pct(self.recall)),
            ("em_token".into(), pct(self.em_token)),
            ("em_title".into(), pct(self.em_title)),
            ("em_overlap".into(), pct(self.em_overlap)),
            ("f1".into(), pct(self.f1)),
            ("tokens".into(), self.tokens.to_string()),
            ("titles".into(), self.titles.to_string()),
            ("tp".into(), self.counts.tp.to_string()),
            ("fp".into(), self.counts.fp.to_string()),
            ("fn".into(), self.counts.fn_.to_string()),
        ];
        for tag in CoarseTag::ENTITIES {
            let s = self.tag(tag);
            let key = |f: &str| format!("per_tag.{tag}.{f}");
            out.extend([
                (key("precision"), pct(s.precision)),
                (key("recall"), pct(s.recall)),
                (key("em"), pct(s.em)),
                (key("f1"), pct(s.f1)),
                (key("tp"), s.counts.tp.to_string()),
                (key("fp"), s.counts.fp.to_string()),
                (key("fn"), s.counts.fn_.to_string()),
            ]);
        }
        out
    }

    pub fn to_kv(&self) -> String {
        kv::render(&self.to_pairs())
    }

    /// Inverse of [`MetricsReport::to_kv`], up to the printed precision.
    pub fn from_kv(text: &str) -> Result<Self> {
        let pairs = kv::parse(text)?;
        let num = |k: &str| -> Result<f64> {
            let v = kv::get(&pairs, k)
                .ok_or_else(|| Error::InvalidArgument(format!("metrics document lacks '{k}'")))?;
            v.parse()
                .map_err(|_| Error::InvalidArgument(format!("'{k}' is not a number: '{v}'")))
        };
        let int = |k: &str| num(k).map(|v| v as usize);
        let mut per_tag = BTreeMap::new();
        for tag in CoarseTag::ENTITIES {
            let key = |f: &str| format!("per_tag.{tag}.{f}");
            per_tag.insert(
                tag,
                TagScores {
                    precision: num(&key("precision"))?,
                    recall: num(&key("recall"))?,
                    em: num(&key("em"))?,
                    f1: num(&key("f1"))?,
                    counts: Counts {
                        tp: int(&key("tp"))?,
                        fp: int(&key("fp"))?,
                        fn_: int(&key("fn"))?,
                    },
                },
            );
        }
        Ok(Self {
            precision: num("precision")?,
            recall: num("recall")?,
            f1: num("f1")?,
            em_token: num("em_token")?,
            em_title: num("em_title")?,
            em_overlap: num("em_overlap")?,
            tokens: int("tokens")?,
            titles: int("titles")?,
            counts: Counts {
                tp: int("tp")?,
                fp: int("fp")?,
                fn_: int("fn")?,
            },
            per_tag,
        })
    }
}

fn pct(v: f64) -> String {
    format!("{v:.4}")
}

/// Scores `pred` against `gold`. Both must hold the same titles in the same
/// order with equal token counts.
pub fn score(gold: &[LabeledSequence], pred: &[LabeledSequence]) -> Result<MetricsReport> {
    if gold.len() != pred.len() {
        return Err(Error::Misaligned(format!(
            "{} gold titles but {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let mut total = Counts::default();
    let mut per_tag: BTreeMap<CoarseTag, Counts> = CoarseTag::ENTITIES
        .iter()
        .map(|&t| (t, Counts::default()))
        .collect();
    let (mut tokens, mut correct, mut exact_titles) = (0usize, 0usize, 0usize);
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Misaligned(format!(
                "title {i}: {} gold tokens but {} predicted",
                g.len(),
                p.len()
            )));
        }
        if g.tokens != p.tokens {
            return Err(Error::Misaligned(format!("title {i}: token text differs")));
        }
        let mut all = true;
        for (&gl, &pl) in g.labels.iter().zip(&p.labels) {
            tokens += 1;
            if gl == pl {
                correct += 1;
                if !gl.is_o() {
                    total.tp += 1;
                    per_tag.get_mut(&gl.tag()).unwrap().tp += 1;
                }
                continue;
            }
            all = false;
            if !pl.is_o() {
                total.fp += 1;
                per_tag.get_mut(&pl.tag()).unwrap().fp += 1;
            }
            if !gl.is_o() {
                total.fn_ += 1;
                per_tag.get_mut(&gl.tag()).unwrap().fn_ += 1;
            }
        }
        exact_titles += all as usize;
    }
    Ok(MetricsReport {
        precision: total.precision(),
        recall: total.recall(),
        f1: total.f1(),
        em_token: 100.0 * correct as f64 / tokens as f64,
        em_title: 100.0 * exact_titles as f64 / gold.len() as f64,
        em_overlap: total.overlap(),
        tokens,
        titles: gold.len(),
        counts: total,
        per_tag: per_tag
            .into_iter()
            .map(|(t, c)| (t, TagScores::from_counts(c)))
            .collect(),
    })
}

/// Annotator 1 is gold; the result is the arithmetic mean of every
/// percentage over the comparisons with annotators 2 and 3. Counts are
/// summed over both comparisons.
pub fn human_baseline(
    first: &[LabeledSequence],
    second: &[LabeledSequence],
    third: &[LabeledSequence],
) -> Result<MetricsReport> {
    let a = score(first, second)?;
    let b = score(first, third)?;
    Ok(mean_reports(&a, &b))
}

fn mean_reports(a: &MetricsReport, b: &MetricsReport) -> MetricsReport {
    let m = |x: f64, y: f64| (x + y) / 2.0;
    let mut counts = a.counts;
    counts.add(b.counts);
    let per_tag = a
        .per_tag
        .iter()
        .map(|(&t, x)| {
            let y = &b.per_tag[&t];
            let mut c = x.counts;
            c.add(y.counts);
            let s = TagScores {
                precision: m(x.precision, y.precision),
                recall: m(x.recall, y.recall),
                em: m(x.em, y.em),
                f1: m(x.f1, y.f1),
                counts: c,
            };
            (t, s)
        })
        .collect();
    MetricsReport {
        precision: m(a.precision, b.precision),
        recall: m(a.recall, b.recall),
        f1: m(a.f1, b.f1),
        em_token: m(a.em_token, b.em_token),
        em_title: m(a.em_title, b.em_title),
        em_overlap: m(a.em_overlap, b.em_overlap),
        tokens: a.tokens + b.tokens,
        titles: a.titles + b.titles,
        counts,
        per_tag,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::labeling::BioesLabel;

    pub(crate) fn seq(labels: &[&str]) -> LabeledSequence {
        let tokens = (0..labels.len()).map(|i| format!("w{i}")).collect();
        let labels = labels
            .iter()
            .map(|l| l.parse::<BioesLabel>().unwrap())
            .collect();
        LabeledSequence::prediction(tokens, labels).unwrap()
    }

    /// Ten tokens, two wrong: a LOC read as FUN and a RES missed.
    pub(crate) fn hand_fixture() -> (Vec<LabeledSequence>, Vec<LabeledSequence>) {
        let gold = vec![
            seq(&["S-RES", "S-FUN"]),
            seq(&["B-FUN", "E-FUN", "S-RES"]),
            seq(&["O", "S-LOC", "S-RES"]),
            seq(&["S-FUN", "S-RES"]),
        ];
        let pred = vec![
            seq(&["S-RES", "S-FUN"]),
            seq(&["B-FUN", "E-FUN", "S-RES"]),
            seq(&["O", "S-FUN", "S-RES"]),
            seq(&["S-FUN", "O"]),
        ];
        (gold, pred)
    }

    #[test]
    fn hand_counted_fixture() {
        let (gold, pred) = hand_fixture();
        let r = score(&gold, &pred).unwrap();
        // 9 gold positives, 8 predicted, 7 exact.
        assert_eq!(
            r.counts,
            Counts {
                tp: 7,
                fp: 1,
                fn_: 2
            }
        );
        assert_eq!(r.em_token, 80.0);
        assert_eq!(r.em_title, 50.0);
        assert_eq!(r.precision, 87.5);
        assert!((r.recall - 700.0 / 9.0).abs() < 1e-12);
        assert!((r.f1 - 1400.0 / 17.0).abs() < 1e-12);
        assert_eq!(r.em_overlap, 70.0);
        assert_eq!(
            r.tag(CoarseTag::Fun).counts,
            Counts {
                tp: 4,
                fp: 1,
                fn_: 0
            }
        );
        assert_eq!(
            r.tag(CoarseTag::Loc).counts,
            Counts {
                tp: 0,
                fp: 0,
                fn_: 1
            }
        );
        assert_eq!(
            r.tag(CoarseTag::Res).counts,
            Counts {
                tp: 3,
                fp: 0,
                fn_: 1
            }
        );
        assert_eq!(r.tag(CoarseTag::Loc).f1, 0.0);
        assert_eq!(r.tag(CoarseTag::Fun).em, 80.0);
    }

    #[test]
    fn perfect_prediction() {
        let (gold, _) = hand_fixture();
        let r = score(&gold, &gold).unwrap();
        for v in [
            r.precision,
            r.recall,
            r.f1,
            r.em_token,
            r.em_title,
            r.em_overlap,
        ] {
            assert_eq!(v, 100.0);
        }
        let all_o = vec![seq(&["O", "O"])];
        assert_eq!(score(&all_o, &all_o).unwrap().f1, 100.0);
    }

    #[test]
    fn prefix_errors_count_both_ways() {
        let r = score(&[seq(&["B-FUN", "E-FUN"])], &[seq(&["I-FUN", "E-FUN"])]).unwrap();
        assert_eq!(
            r.counts,
            Counts {
                tp: 1,
                fp: 1,
                fn_: 1
            }
        );
        assert_eq!(r.em_token, 50.0);
    }

    #[test]
    fn f1_matches_human_row() {
        assert!((f1(91.60, 99.60) - 95.40).abs() < 0.05);
    }

    #[test]
    fn overlap_em_follows_from_precision_and_recall() {
        // tp/(tp+fp+fn) = 1 / (1/P + 1/R - 1); checked against published
        // (P, R, EM) rows for LogReg, LSTM, CRF, LSTM-CRF and annotators.
        // The last field is the rounding of the published P and R, which
        // propagates almost one-for-one into the derived value.
        let rows = [
            (90.80_f64, 93.20, 85.10, 0.1),
            (99.71, 99.90, 99.61, 0.01),
            (99.90, 99.81, 99.71, 0.01),
            (99.86, 99.97, 99.83, 0.01),
            (91.60, 99.60, 91.30, 0.1),
        ];
        for (p, r, em, tol) in rows {
            let j = 100.0 / (100.0 / p + 100.0 / r - 1.0);
            assert!((j - em).abs() < tol, "{p} {r}: {j} vs {em}");
        }
        let (gold, pred) = hand_fixture();
        let rep = score(&gold, &pred).unwrap();
        let j = 100.0 / (100.0 / rep.precision + 100.0 / rep.recall - 1.0);
        assert!((j - rep.em_overlap).abs() < 1e-9);
    }

    #[test]
    fn misalignment_is_rejected() {
        let (gold, pred) = hand_fixture();
        assert!(matches!(
            score(&gold, &pred[..3]),
            Err(Error::Misaligned(_))
        ));
        let short = vec![
            seq(&["S-RES"]),
            gold[1].clone(),
            gold[2].clone(),
            gold[3].clone(),
        ];
        assert!(matches!(score(&gold, &short), Err(Error::Misaligned(_))));
        assert!(matches!(score(&[], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn human_baseline_averages() {
        // 50 single-token titles; annotator 2 disagrees on 5, annotator 3 on 3.
        let gold: Vec<_> = (0..50).map(|_| seq(&["S-RES"])).collect();
        let mut s2 = gold.clone();
        let mut s3 = gold.clone();
        for s in s2.iter_mut().take(5) {
            *s = seq(&["S-FUN"]);
        }
        for s in s3.iter_mut().skip(10).take(3) {
            *s = seq(&["O"]);
        }
        let r = human_baseline(&gold, &s2, &s3).unwrap();
        assert!((r.em_token - 92.0).abs() < 1e-12);
        let same = human_baseline(&gold, &gold, &gold).unwrap();
        assert_eq!((same.em_token, same.f1), (100.0, 100.0));
    }

    #[test]
    fn kv_round_trip() {
        let (gold, pred) = hand_fixture();
        let r = score(&gold, &pred).unwrap();
        let text = r.to_kv();
        assert!(text.starts_with("precision=87.5000\nrecall=77.7778\n"));
        assert!(text.contains("per_tag.FUN.em=80.0000\n"));
        let back = MetricsReport::from_kv(&text).unwrap();
        assert_eq!(back.to_kv(), text);
        assert_eq!(back.counts, r.counts);
    }
}
