//! JSON model files, result files and the command-line front end.

pub mod cli;
pub mod document;
pub mod results;

pub use document::{load_model, parse_model, ModelDocument};
