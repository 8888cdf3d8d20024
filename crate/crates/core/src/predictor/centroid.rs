//! Deterministic nearest-centroid baseline: mean-pooled window features
//! against per-class mean vectors, softmax over negative distances scaled by
//! a temperature.

use crate::error::{Error, Result};
use crate::features::FeatureWindow;
use crate::types::ProbVector;

use super::LabeledWindow;

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    /// One mean feature vector per class, indexed by class id.
    pub centroids: Vec<Vec<f64>>,
    pub temperature: f64,
}

impl CentroidModel {
    pub fn num_classes(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    pub fn predict(&self, window: &FeatureWindow<'_>) -> ProbVector {
        let pooled = mean_pool(window);
        let logits: Vec<f64> = self
            .centroids
            .iter()
            .map(|c| -euclidean(&pooled, c) / self.temperature)
            .collect();
        ProbVector::softmax(&logits)
    }

    /// Per-class means in one pass, then a temperature line search on the
    /// validation set. Accuracy here counts a window only when its argmax is
    /// correct *and* clears the acceptance threshold, since a window that
    /// cannot clear it decodes to Blank; the search walks the grid from large
    /// to small temperature and keeps the largest maximizer.
    pub fn fit(
        train: &[LabeledWindow],
        val: &[LabeledWindow],
        num_classes: usize,
        threshold: f64,
    ) -> Result<CentroidModel> {
        let dim = train
            .first()
            .map(|s| s.features.first().map_or(0, |f| f.values.len()))
            .unwrap_or(0);
        let mut sums = vec![vec![0.0; dim]; num_classes];
        let mut counts = vec![0usize; num_classes];
        for sample in train {
            let pooled = mean_pool(&sample.window());
            for (acc, v) in sums[sample.label].iter_mut().zip(&pooled) {
                *acc += v;
            }
            counts[sample.label] += 1;
        }
        for label in 0..num_classes {
            if counts[label] == 0 {
                return Err(Error::EmptyClass { label });
            }
            for v in sums[label].iter_mut() {
                *v /= counts[label] as f64;
            }
        }

        let mut model = CentroidModel {
            centroids: sums,
            temperature: 1.0,
        };
        if !val.is_empty() {
            let mut best = (-1.0, model.temperature);
            for step in 0..25 {
                // 1e3 down to 1e-3, geometric.
                let tau = 10f64.powf(3.0 - 6.0 * step as f64 / 24.0);
                model.temperature = tau;
                let mut hits = 0usize;
                for sample in val {
                    let p = model.predict(&sample.window());
                    let (argmax, prob) = p.argmax();
                    if argmax == sample.label && prob > threshold {
                        hits += 1;
                    }
                }
                let acc = hits as f64 / val.len() as f64;
                if acc > best.0 {
                    best = (acc, tau);
                }
            }
            model.temperature = best.1;
        }
        Ok(model)
    }
}

fn mean_pool(window: &FeatureWindow<'_>) -> Vec<f64> {
    let dim = window.dim();
    let mut out = vec![0.0; dim];
    for row in window.features {
        for (acc, v) in out.iter_mut().zip(&row.values) {
            *acc += v;
        }
    }
    let n = window.len().max(1) as f64;
    for v in &mut out {
        *v /= n;
    }
    out
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
