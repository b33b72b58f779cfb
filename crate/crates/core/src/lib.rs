//! Extraction of explicit metalinguistic operations from raw text.

pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod extraction;
pub mod filter;
pub mod patterns;
pub mod tagger;

pub use error::{Error, ErrorClass, Result};
