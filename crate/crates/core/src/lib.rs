//! Collaborative-filtering ingredient recommendation: corpus cleaning,
//! ingredient embeddings, similarity measures, recipe completion and
//! held-out evaluation.

pub mod bundle;
pub mod corpus;
pub mod embedding;
pub mod evaluation;
pub mod matrix;
pub mod recommender;
pub mod similarity;
pub mod stats;
pub mod synthetic;
