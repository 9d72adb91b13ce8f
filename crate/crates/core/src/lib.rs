//! Online handwriting character recognition from stroke structure.
//!
//! The pipeline smooths each pen trajectory, classifies every stroke as
//! horizontal or vertical, cuts it into tokens at windowed extrema
//! ("critical points"), describes every token with four features, packs
//! them into a fixed-width bit vector, and classifies with one small
//! perceptron per stroke-count cluster.

pub mod error;
pub mod eval;
pub mod features;
pub mod ink;
pub mod mlp;
pub mod pipeline;
pub mod preprocess;
pub mod recognizer;
pub mod segmentation;
pub mod service;
pub mod stages;
pub mod synthgen;

pub use error::{Error, Result};
