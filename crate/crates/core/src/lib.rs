pub mod container;
pub mod corpus;
pub mod crf;
pub mod error;
pub mod eval;
pub mod gazetteer;
pub mod kv;
pub mod labeling;
pub mod neural;
pub mod optim;
pub mod scalar;
pub mod tensor;
pub mod title2vec;

pub use error::{Error, Result};

pub type Crf32 = crf::CrfModel<f32>;
pub type Crf64 = crf::CrfModel<f64>;
pub type BiLm32 = title2vec::BiLmModel<f32>;
pub type BiLm64 = title2vec::BiLmModel<f64>;
pub type LstmCrf32 = neural::LstmCrfModel<f32>;
pub type LstmCrf64 = neural::LstmCrfModel<f64>;
