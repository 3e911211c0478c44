//! Contextual title embeddings from a bidirectional LSTM language model.

mod bilm;
mod store;
mod vocab;

pub use bilm::{train_bilm, BiLmDims, BiLmModel, BiLmParams, Direction};
pub use store::{cosine, mean_pool, nearest_titles, EmbeddingFile, Neighbor, TitleEmbedding};
pub use vocab::{build_vocab, build_vocab_from, Vocab, BOS, EOS, UNK};
