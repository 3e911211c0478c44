//! Feature-based linear-chain CRF and the logistic-regression baseline.

pub mod chain;
mod features;
mod model;
mod train;

pub use chain::Transitions;
pub use features::{extract_features, word_dropout, FeatureVocab, UNK};
pub(crate) use model::check_labels;
pub use model::{CrfKind, CrfModel, CrfParams};
pub use train::{train_crf, train_logreg};
