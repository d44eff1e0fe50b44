pub mod benchmarks;
pub mod cli_io;
pub mod error;
pub mod grid;
pub mod materials;
pub mod operator;
pub mod reconstruction;
pub mod time_integration;

pub use error::{Error, Result};
