//! Multilevel sentiment analysis.
//!
//! The crate takes a labeled corpus and a multi-sense polarity lexicon
//! through the whole chain:
//!
//! 1. [`corpus_io`] loads `pos/`/`neg/` corpora, tokenizes, segments
//!    sentences, strips noise tokens and lemmatizes.
//! 2. [`quality`] profiles the corpus against Zipf's law and reports the
//!    Kullback-Leibler distance between ideal and observed frequencies.
//! 3. [`lexicon`] collapses every lemma's sense scores into one prior
//!    polarity with one of five aggregation formulas.
//! 4. [`scoring`] assigns priors to tokens, applies negation and
//!    intensification rules and scores sentences.
//! 5. [`features`] turns scored documents into term-level (8/6) or
//!    document-level (7/5/4) feature rows.
//! 6. [`classifiers`] trains a backprop network, a C4.5-style tree or an
//!    RBF SVM; [`evaluation`] runs stratified k-fold cross-validation with
//!    per-class precision, recall and F-score.
//! 7. [`pipeline`] glues the stages together, [`synth`] generates corpora
//!    and lexicons for experiments, and [`cli`] exposes everything as
//!    subcommands.

pub mod classifiers;
pub mod cli;
pub mod corpus_io;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod lexicon;
pub mod pipeline;
pub mod quality;
pub mod scoring;
pub mod seed;
pub mod synth;
pub(crate) mod util;

pub use error::{Error, Result};
