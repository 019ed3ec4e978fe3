pub mod analysis;
pub mod diagnostics;
pub mod elicit;
pub mod error;
pub mod ingest;
pub mod model;
pub mod plot;
pub mod rng;
pub mod sampler;
pub mod synthbench;

pub use error::{Error, ErrorKind, Result};
