//! Weisfeiler–Leman refinement, graph-transformer tokenization, and a
//! constructive check that standard attention reproduces WL colorings.

pub mod error;
pub mod graph;
pub mod multiset;
pub mod nn;
pub mod sim;
pub mod spectral;
pub mod tokenizer;
pub mod wl;

pub use error::{Error, Result};
pub use graph::Graph;
