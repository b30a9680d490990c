//! Exact tests for dependency distance minimization, and its opposite, in
//! sentences of three and four words.
//!
//! The crate reads CoNLL-U / CoNLL-X treebanks, strips punctuation and empty
//! nodes, and compares the observed sum of dependency distances `D` of each
//! sentence with its expectation under a uniformly random word order. Counts
//! of sentences above or below that expectation are tested with one-tailed
//! binomial tests whose success probabilities are exact fractions, and the
//! p-values are Holm-corrected across languages.
//!
//! ```
//! use ddm_core::tree::{enumerate_arrangements, LinearizedTree};
//! use ddm_core::null_models::expected_d_random_arrangement;
//!
//! let star = LinearizedTree::star(4, 1).unwrap();
//! let dist = enumerate_arrangements(&star, false).unwrap();
//! assert_eq!(dist.mean(), Some(expected_d_random_arrangement(4)));
//! ```

pub mod null_models;
pub mod pipeline;
pub mod stats;
pub mod tree;
pub mod treebank;

pub use null_models::{Direction, EnsembleSpec};
pub use pipeline::{analyze_collection, AnalysisConfig, Corpus, Families, LevelSpec, Report};
pub use tree::{DistanceDistribution, LinearizedTree, TreeShape};
