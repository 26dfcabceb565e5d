//! Construction of meaning-representation → reference corpora from
//! dependency-parsed review sentences, and evaluation of generator outputs
//! for semantic fidelity and stylistic control.
//!
//! The pipeline runs [`sentence`] (CoNLL-U ingestion and selection) →
//! [`extract`] (tuple and style extraction against a [`lexicon`]) →
//! [`corpus`] (serialization, splits, statistics). [`metrics`] scores any
//! generator's outputs against a built corpus.

pub mod cli;
pub mod corpus;
pub mod extract;
pub mod lexicon;
pub mod metrics;
pub mod mr;
pub mod sentence;

pub use corpus::{CorpusInstance, CorpusStats, SplitSpec};
pub use extract::build_mr;
pub use lexicon::{AttributeLexicon, AttributeType};
pub use mr::{MeaningRepresentation, MrTuple, Variant};
pub use sentence::{FilterPolicy, ParsedSentence};
