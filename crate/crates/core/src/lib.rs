//! Comparative-sentence NLI toolkit: a generator for word-order-sensitive
//! comparison pairs, lexical bias diagnostics for NLI corpora, and averaged
//! embedding classifier baselines.

pub mod corpus;
pub mod diagnostics;
pub mod error;
pub mod generator;
pub mod lexicon;
pub mod models;
pub mod report;

pub use error::{Error, Result};
