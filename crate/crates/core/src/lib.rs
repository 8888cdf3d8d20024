//! Segmentation of continuous sign-language keypoint streams into isolated
//! sign words.
//!
//! The pipeline trains a window classifier on isolated signs (SVD-derived
//! per-frame features into a many-to-one recurrent network), then slides a
//! fixed window across a continuous stream and applies a threshold/Blank
//! decision rule with duplicate suppression to emit the separated word
//! sequence. A seeded synthetic keypoint generator stands in for real
//! capture data, and the metrics module reproduces the evaluation report
//! shapes end to end.

pub mod config;
pub mod decoder;
pub mod error;
pub mod features;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod predictor;
pub mod synth;
pub mod types;

pub use config::Config;
pub use error::{Error, Result};
pub use types::{
    BlankReason, ClassId, ContinuousStream, DecodeEvent, Decision, HandMatrix, KeypointFrame,
    ProbVector, Segment, SignClip,
};
