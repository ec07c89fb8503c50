mod error;
pub mod cddr;
pub mod cltvalidate;
pub mod discovery;
pub mod numstat;
pub mod simgen;

pub use error::{Error, Result};
