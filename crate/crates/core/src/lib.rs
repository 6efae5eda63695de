pub mod commands;
pub mod error;
pub mod eval;
pub mod facedet;
pub mod ocr;
pub mod pipeline;
pub mod postproc;
pub mod preproc;
pub mod schema;
pub mod service;
pub mod store;
pub mod synth;

pub use error::{Error, Result};
