//! Gloss-augmented word sense disambiguation.
//!
//! A target word's context is encoded with a bidirectional LSTM and matched
//! against encodings of its candidate senses' glosses over several memory
//! passes. Gloss encodings can be enriched with glosses of related senses
//! found by walking hypernym and hyponym edges.

pub mod corpus;
pub mod evaluator;
pub mod ingest;
pub mod lexicon;
pub mod model;
pub mod numerics;
pub mod parallel;
pub mod synthetic;
pub mod trainer;
