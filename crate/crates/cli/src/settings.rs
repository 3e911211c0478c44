//! Settings from `--config` merged with command-line flags.

use std::path::Path;

use anyhow::{Context, Result};
use occner::kv;
use occner::neural::LstmConfig;
use occner::optim::TrainConfig;

use crate::UsageError;

const KNOWN: &[&str] = &[
    "seed",
    "count",
    "lr",
    "learning_rate",
    "batch",
    "batch_size",
    "epochs",
    "optimizer",
    "word_dropout",
    "variational_dropout",
    "grad_clip",
    "hidden",
    "layers",
    "embedding_dim",
];

#[derive(Debug, Default)]
pub struct Settings {
    file: Vec<(String, String)>,
    seed: Option<u64>,
}

impl Settings {
    pub fn new(config: Option<&Path>, seed: Option<u64>) -> Result<Self> {
        let file = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| occner::Error::Io {
                    path: p.into(),
                    source: e,
                })?;
                kv::parse(&text).with_context(|| format!("config {}", p.display()))?
            }
            None => Vec::new(),
        };
        if let Some((k, _)) = file.iter().find(|(k, _)| !KNOWN.contains(&k.as_str())) {
            return Err(occner::Error::InvalidArgument(format!("unknown config key '{k}'")).into());
        }
        Ok(Self { file, seed })
    }

    fn file_value(&self, key: &str) -> Option<&str> {
        kv::get(&self.file, key)
    }

    /// The `--seed` flag, else the config's `seed`; printed to stderr.
    pub fn seed(&self) -> Result<u64> {
        let seed = match (self.seed, self.file_value("seed")) {
            (Some(s), _) => s,
            (None, Some(v)) => v
                .parse()
                .map_err(|_| occner::Error::InvalidArgument(format!("bad seed '{v}'")))?,
            (None, None) => {
                return Err(UsageError("this command is randomized and needs --seed".into()).into())
            }
        };
        eprintln!("seed={seed}");
        Ok(seed)
    }

    pub fn count(&self, flag: Option<usize>, default: usize) -> Result<usize> {
        match (flag, self.file_value("count")) {
            (Some(c), _) => Ok(c),
            (None, Some(v)) => Ok(v
                .parse()
                .map_err(|_| occner::Error::InvalidArgument(format!("bad count '{v}'")))?),
            (None, None) => Ok(default),
        }
    }

    /// Applies config values, then `flags`, to the training settings. Keys
    /// that fit neither `cfg` nor `arch` are rejected.
    pub fn apply(
        &self,
        flags: &[(String, String)],
        cfg: &mut TrainConfig,
        mut arch: Option<&mut LstmConfig>,
    ) -> Result<()> {
        let from_file = self
            .file
            .iter()
            .filter(|(k, _)| k != "seed" && k != "count");
        for (k, v) in from_file.chain(flags) {
            let used = cfg.set(k, v)?
                || match arch.as_deref_mut() {
                    Some(a) => a.set(k, v)?,
                    None => false,
                };
            if !used {
                return Err(occner::Error::InvalidArgument(format!(
                    "setting '{k}' does not apply to this model"
                ))
                .into());
            }
        }
        Ok(())
    }
}
