//! Window classifiers: a many-to-one gated recurrent network trained with
//! Adam, and a deterministic centroid baseline. Both map a fixed-length
//! feature window to a probability vector over the sign classes.

mod centroid;
mod lstm;
mod store;
mod train;

pub use centroid::CentroidModel;
pub use lstm::{gradient_check, RecurrentModel};
pub use store::{load_model, save_model, FORMAT_VERSION};
pub use train::{train, EpochStats, PredictorKind, TrainReport};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FeatureWindow};
use crate::preprocess::resample_clip;
use crate::types::{ClassId, ProbVector, SignClip};

/// Anything that classifies one feature window. Inference is read-only, so a
/// shared model can serve concurrent streams.
pub trait WindowClassifier: Sync {
    fn num_classes(&self) -> usize;
    fn predict(&self, window: &FeatureWindow<'_>) -> Result<ProbVector>;
}

/// A trained model plus the configuration snapshot it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorModel {
    pub kind: ModelKind,
    pub config: Config,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Centroid(CentroidModel),
    Recurrent(RecurrentModel),
}

impl PredictorModel {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ModelKind::Centroid(_) => "centroid",
            ModelKind::Recurrent(_) => "recurrent",
        }
    }

    fn check_window(&self, window: &FeatureWindow<'_>) -> Result<()> {
        if window.len() != self.config.window_size {
            return Err(Error::DimensionMismatch(format!(
                "window has {} rows, model expects {}",
                window.len(),
                self.config.window_size
            )));
        }
        if window.dim() != self.config.num_singular_values {
            return Err(Error::DimensionMismatch(format!(
                "window rows have {} values, model expects {}",
                window.dim(),
                self.config.num_singular_values
            )));
        }
        Ok(())
    }
}

impl WindowClassifier for PredictorModel {
    fn num_classes(&self) -> usize {
        match &self.kind {
            ModelKind::Centroid(m) => m.num_classes(),
            ModelKind::Recurrent(m) => m.num_classes,
        }
    }

    fn predict(&self, window: &FeatureWindow<'_>) -> Result<ProbVector> {
        self.check_window(window)?;
        match &self.kind {
            ModelKind::Centroid(m) => Ok(m.predict(window)),
            ModelKind::Recurrent(m) => Ok(m.predict(window)),
        }
    }
}

/// A training/evaluation sample: one window of features with its label.
#[derive(Debug, Clone)]
pub struct LabeledWindow {
    pub features: Vec<FeatureVector>,
    pub label: ClassId,
}

impl LabeledWindow {
    pub fn window(&self) -> FeatureWindow<'_> {
        FeatureWindow {
            features: &self.features,
            start_frame: self.features.first().map_or(0, |f| f.frame_index),
        }
    }
}

/// Equalize a clip to the window length and extract its features: the
/// training-side preprocessing path.
pub fn clip_to_window(clip: &SignClip, cfg: &Config) -> Result<LabeledWindow> {
    let resampled = resample_clip(clip, cfg.window_size)?;
    let features = crate::features::sequence_features(&resampled.frames, cfg.num_singular_values)?;
    Ok(LabeledWindow {
        features,
        label: clip.label,
    })
}

pub(crate) fn cross_entropy(probs: &[f64], label: ClassId) -> f64 {
    -probs[label].max(1e-300).ln()
}
