//! Statistical proof-pattern mining over a small dependently typed term language.
//!
//! The pipeline reads a corpus of theorems and definitions, turns statements
//! and proof traces into fixed-size numeric feature vectors, clusters them, and
//! renders clusters, dependency graphs and proof-flow automata as text or DOT.

pub mod cli;
pub mod clustering;
pub mod corpus;
pub mod dep_graph;
mod dot;
pub mod features;
pub mod proof_features;
pub mod report;
pub mod sample;
pub mod sexp;
pub mod term;
pub mod term_tree;

pub use corpus::{parse_corpus, Corpus, CorpusEntry, CorpusError};
pub use term::Term;
