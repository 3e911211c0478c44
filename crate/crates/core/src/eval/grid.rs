use std::fmt;
use std::fmt::Write as _;
use std::time::Instant;

use super::MetricsReport;
use crate::error::{Error, Result};
use crate::neural::LstmConfig;
use crate::optim::TrainConfig;

/// Named hyperparameter axes, each with an ordered list of values.
///
/// Points are enumerated lexicographically: the first axis varies slowest
/// and the last fastest, each in the order its values were given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchSpace {
    axes: Vec<(String, Vec<String>)>,
}

impl SearchSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn axis<I, V>(mut self, name: &str, values: I) -> Self
    where
        I: IntoIterator<Item = V>,
        V: ToString,
    {
        self.axes.push((
            name.to_string(),
            values.into_iter().map(|v| v.to_string()).collect(),
        ));
        self
    }

    /// One axis per line, `name=v1,v2,...`; `#` comments allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let mut space = Self::new();
        for (name, values) in crate::kv::parse(text)? {
            let vals: Vec<&str> = values.split(',').map(str::trim).collect();
            if vals.iter().any(|v| v.is_empty()) {
                return Err(Error::InvalidArgument(format!(
                    "axis '{name}' has an empty value"
                )));
            }
            space = space.axis(&name, vals);
        }
        Ok(space)
    }

    /// The five binary LSTM-CRF axes: learning rate, layers, hidden size,
    /// mini-batch size and optimizer. 32 points.
    pub fn lstm_crf_grid() -> Self {
        Self::new()
            .axis("lr", ["0.1", "0.01"])
            .axis("layers", ["1", "2"])
            .axis("hidden", ["128", "256"])
            .axis("batch", ["32", "128"])
            .axis("optimizer", ["adam", "sgd"])
    }

    /// The CRF has no recurrent axes.
    pub fn crf_grid() -> Self {
        Self::new()
            .axis("lr", ["0.1", "0.01"])
            .axis("batch", ["32", "128"])
            .axis("optimizer", ["adam", "sgd"])
    }

    pub fn axes(&self) -> &[(String, Vec<String>)] {
        &self.axes
    }

    /// Number of points; 1 for a space without axes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let n = self.len();
        (0..n)
            .map(|index| {
                let mut rest = index;
                let mut values = vec![(String::new(), String::new()); self.axes.len()];
                for (slot, (name, vals)) in values.iter_mut().zip(&self.axes).rev() {
                    *slot = (name.clone(), vals[rest % vals.len()].clone());
                    rest /= vals.len();
                }
                GridPoint { index, values }
            })
            .collect()
    }
}

/// One assignment of every axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPoint {
    /// Position in enumeration order.
    pub index: usize,
    pub values: Vec<(String, String)>,
}

impl GridPoint {
    pub fn get(&self, axis: &str) -> Option<&str> {
        self.values
            .iter()
            .find(|(k, _)| k == axis)
            .map(|(_, v)| v.as_str())
    }

    /// Writes every axis into `cfg` or `arch`. An axis neither recognizes
    /// is an error, as is an LSTM axis when `arch` is `None`.
    pub fn apply(&self, cfg: &mut TrainConfig, mut arch: Option<&mut LstmConfig>) -> Result<()> {
        for (k, v) in &self.values {
            let known = cfg.set(k, v)?
                || match arch.as_deref_mut() {
                    Some(a) => a.set(k, v)?,
                    None => false,
                };
            if !known {
                return Err(Error::InvalidArgument(format!(
                    "axis '{k}' does not apply to this trainer"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridOutcome {
    Scored(MetricsReport),
    /// The trainer returned an error, e.g. divergence.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub point: GridPoint,
    pub outcome: GridOutcome,
    pub seconds: f64,
}

impl GridRow {
    pub fn report(&self) -> Option<&MetricsReport> {
        match &self.outcome {
            GridOutcome::Scored(r) => Some(r),
            GridOutcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub axes: Vec<String>,
    /// In enumeration order, one per point of the space.
    pub rows: Vec<GridRow>,
    /// Row with the highest F1; earlier rows win ties. `None` if every
    /// configuration failed.
    pub best: Option<usize>,
}

impl GridSearchResult {
    pub fn best_row(&self) -> Option<&GridRow> {
        self.best.map(|i| &self.rows[i])
    }

    /// Tab-separated table: axes, then P, R, EM, F1 and status. Wall time
    /// is appended only when asked for, since it differs between runs.
    pub fn to_tsv(&self, with_time: bool) -> String {
        let mut s = String::new();
        let mut header: Vec<&str> = self.axes.iter().map(String::as_str).collect();
        header.extend(["precision", "recall", "em_token", "f1", "status"]);
        if with_time {
            header.push("seconds");
        }
        let _ = writeln!(s, "{}", header.join("\t"));
        for row in &self.rows {
            let mut cells: Vec<String> = row.point.values.iter().map(|(_, v)| v.clone()).collect();
            match &row.outcome {
                GridOutcome::Scored(r) => {
                    cells.extend(
                        [r.precision, r.recall, r.em_token, r.f1].map(|v| format!("{v:.4}")),
                    );
                    cells.push("ok".into());
                }
                GridOutcome::Failed(msg) => {
                    cells.extend(std::iter::repeat_n("-".to_string(), 4));
                    cells.push(format!("failed: {}", msg.replace(['\t', '\n'], " ")));
                }
            }
            if with_time {
                cells.push(format!("{:.3}", row.seconds));
            }
            let _ = writeln!(s, "{}", cells.join("\t"));
        }
        s
    }
}

/// Runs `trainer` on every point of `space` in enumeration order. The
/// trainer owns the data splits and epoch budget; it trains on the
/// training split and returns validation metrics. Errors it returns are
/// recorded as failed rows.
pub fn grid_search<F>(space: &SearchSpace, mut trainer: F) -> Result<GridSearchResult>
where
    F: FnMut(&GridPoint) -> Result<MetricsReport>,
{
    if let Some((name, _)) = space.axes().iter().find(|(_, v)| v.is_empty()) {
        return Err(Error::InvalidArgument(format!(
            "axis '{name}' has no values"
        )));
    }
    if space.axes().is_empty() {
        return Err(Error::Empty("search space"));
    }
    let mut rows = Vec::with_capacity(space.len());
    for point in space.points() {
        let start = Instant::now();
        let outcome = match trainer(&point) {
            Ok(r) => GridOutcome::Scored(r),
            Err(e) => {
                log::warn!("grid point {} ({point}) failed: {e}", point.index);
                GridOutcome::Failed(e.to_string())
            }
        };
        let seconds = start.elapsed().as_secs_f64();
        if let GridOutcome::Scored(r) = &outcome {
            log::info!(
                "grid point {} ({point}): f1 {:.4} in {seconds:.2}s",
                point.index,
                r.f1
            );
        }
        rows.push(GridRow {
            point,
            outcome,
            seconds,
        });
    }
    let mut best: Option<usize> = None;
    for (i, row) in rows.iter().enumerate() {
        if let Some(r) = row.report() {
            if best.is_none_or(|b| r.f1 > rows[b].report().unwrap().f1) {
                best = Some(i);
            }
        }
    }
    Ok(GridSearchResult {
        axes: space.axes().iter().map(|(n, _)| n.clone()).collect(),
        rows,
        best,
    })
}
