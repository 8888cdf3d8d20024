use crate::error::{Error, Result};

/// Pipeline configuration.
///
/// Defaults are the published model constants: 50-frame windows with stride 1,
/// acceptance threshold 0.51, 12 singular values per frame, Adam at 0.005
/// divided by 10 every 10 epochs, batch size 50, weight decay 1e-4.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub window_size: usize,
    pub stride: usize,
    pub threshold: f64,
    pub num_singular_values: usize,
    pub keypoints_per_hand: usize,
    pub learning_rate: f64,
    pub lr_decay_every: usize,
    pub lr_decay_factor: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub weight_decay: f64,
    pub momentum_beta1: f64,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            window_size: 50,
            stride: 1,
            threshold: 0.51,
            num_singular_values: 12,
            keypoints_per_hand: 21,
            learning_rate: 0.005,
            lr_decay_every: 10,
            lr_decay_factor: 10.0,
            batch_size: 50,
            max_epochs: 200,
            weight_decay: 1e-4,
            momentum_beta1: 0.92,
            train_fraction: 0.8,
            seed: 7,
        }
    }
}

impl Config {
    /// Check the structural invariants. A threshold in (0.5, 1) is required:
    /// it is what guarantees at most one class can clear it per window.
    pub fn validate(&self) -> Result<()> {
        if self.window_size < 1 {
            return Err(Error::Config("window_size must be >= 1".into()));
        }
        if self.stride < 1 {
            return Err(Error::Config("stride must be >= 1".into()));
        }
        if !(self.threshold > 0.5 && self.threshold < 1.0) {
            return Err(Error::Config(format!(
                "threshold must lie in (0.5, 1), got {}",
                self.threshold
            )));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.num_singular_values == 0 {
            return Err(Error::Config("num_singular_values must be >= 1".into()));
        }
        if self.keypoints_per_hand == 0 {
            return Err(Error::Config("keypoints_per_hand must be >= 1".into()));
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.lr_decay_every == 0 {
            return Err(Error::Config("lr_decay_every must be >= 1".into()));
        }
        if self.lr_decay_factor <= 0.0 {
            return Err(Error::Config("lr_decay_factor must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        Ok(())
    }

    /// Learning rate at a given (0-based) epoch: the base rate divided by the
    /// decay factor once per `lr_decay_every` epochs.
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        self.learning_rate / self.lr_decay_factor.powi((epoch / self.lr_decay_every) as i32)
    }
}
