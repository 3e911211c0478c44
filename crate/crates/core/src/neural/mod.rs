//! BiLSTM taggers with a CRF or softmax output layer.

pub(crate) mod cell;
mod model;
mod train;

pub use cell::{CellTrace, LstmCell};
pub use model::{Embeddings, LstmConfig, LstmCrfModel, OutputLayer, TaggerParams};
pub use train::{init_tagger, train_lstm_crf, train_lstm_softmax, train_model};
