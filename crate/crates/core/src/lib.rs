//! Respiratory-sound COVID-19 screening pipeline.
//!
//! Nine recording categories are each turned into a log-mel-spectrogram and
//! scored by a per-category bidirectional LSTM; a questionnaire is scored by
//! a CART decision tree; the ten probabilities are fused by a weighted mean.

pub mod api;
pub mod category;
pub mod corpus;
pub mod dsp;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod model;
pub mod pipeline;
pub mod score;
pub mod symptoms;

pub use category::{SoundCategory, Source};
pub use score::{Probability, ProbabilityScore};
