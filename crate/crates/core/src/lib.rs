//! Core library for adversarial question authoring: the question corpus,
//! a BM25 retrieval model, neural classifiers with saliency, incremental
//! buzzer evaluation and train/test overlap analysis.

pub mod corpus;
pub mod ir;
pub mod prediction;
pub mod neural;
pub mod buzzer;
pub mod analysis;
