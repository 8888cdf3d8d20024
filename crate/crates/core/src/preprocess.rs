//! Training-clip frame equalization, continuous-stream construction, and
//! dataset splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::{ClassId, ContinuousStream, HandMatrix, KeypointFrame, Segment, SignClip};

/// Stratified split parameters. Test clips double as the held-out pool for
/// continuous-stream construction, so every class keeps at least one.
#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction_of_train: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            val_fraction_of_train: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DatasetSplit {
    pub train: Vec<SignClip>,
    pub validation: Vec<SignClip>,
    pub test: Vec<SignClip>,
}

fn lerp_frame(a: &KeypointFrame, b: &KeypointFrame, frac: f64, index: usize) -> KeypointFrame {
    let hands = a
        .hands
        .iter()
        .zip(&b.hands)
        .map(|(ha, hb)| {
            let rows = ha
                .rows()
                .iter()
                .zip(hb.rows())
                .map(|(ra, rb)| {
                    [
                        ra[0] + (rb[0] - ra[0]) * frac,
                        ra[1] + (rb[1] - ra[1]) * frac,
                        ra[2] + (rb[2] - ra[2]) * frac,
                    ]
                })
                .collect();
            HandMatrix::new(rows)
        })
        .collect();
    KeypointFrame::new(hands, index)
}

/// Resample a clip to exactly `target_len` frames by uniform index mapping:
/// output frame `i` samples source position `i*(L-1)/(T-1)`, linearly
/// interpolating coordinates when the position is fractional. Endpoints are
/// preserved and integral positions copy source frames bit-exactly, so a clip
/// already at the target length passes through unchanged.
pub fn resample_clip(clip: &SignClip, target_len: usize) -> Result<SignClip> {
    if clip.frames.is_empty() {
        return Err(Error::EmptyClip);
    }
    assert!(target_len >= 2, "target_len must be >= 2");

    let src_len = clip.frames.len();
    let mut frames = Vec::with_capacity(target_len);
    if src_len == 1 {
        for i in 0..target_len {
            let mut f = clip.frames[0].clone();
            f.timestamp_index = i;
            frames.push(f);
        }
    } else {
        for i in 0..target_len {
            let pos = (i * (src_len - 1)) as f64 / (target_len - 1) as f64;
            let lo = pos.floor() as usize;
            let frac = pos - lo as f64;
            if frac == 0.0 {
                let mut f = clip.frames[lo].clone();
                f.timestamp_index = i;
                frames.push(f);
            } else {
                frames.push(lerp_frame(&clip.frames[lo], &clip.frames[lo + 1], frac, i));
            }
        }
    }
    Ok(SignClip::new(frames, clip.label, clip.source_id.clone()))
}

/// Concatenate clips into one continuous stream without any resampling,
/// recording a ground-truth segment per clip (inclusive end frame).
pub fn concat_clips(clips: &[SignClip]) -> Result<ContinuousStream> {
    if clips.is_empty() {
        return Err(Error::EmptyList);
    }
    let hand_count = clips[0].hand_count();
    for (i, pair) in clips.windows(2).enumerate() {
        if pair[0].label == pair[1].label {
            return Err(Error::AdjacentDuplicateLabel {
                index: i,
                label: pair[0].label,
            });
        }
    }
    let mut frames = Vec::with_capacity(clips.iter().map(SignClip::len).sum());
    let mut segments = Vec::with_capacity(clips.len());
    let mut cursor = 0;
    for clip in clips {
        if clip.is_empty() {
            return Err(Error::EmptyClip);
        }
        if clip.hand_count() != hand_count {
            return Err(Error::HandCountMismatch {
                expected: hand_count,
                got: clip.hand_count(),
            });
        }
        segments.push(Segment {
            label: clip.label,
            start_frame: cursor,
            end_frame: cursor + clip.len() - 1,
        });
        for frame in &clip.frames {
            let mut f = frame.clone();
            f.timestamp_index = cursor;
            cursor += 1;
            frames.push(f);
        }
    }
    Ok(ContinuousStream {
        frames,
        ground_truth: Some(segments),
    })
}

/// Deterministic stratified split. Per class: at least one test clip
/// (floor of the test fraction, minimum 1), then at least one validation clip
/// carved from the remaining pool whenever the pool can spare it, remainder
/// to train.
pub fn split_dataset(clips: &[SignClip], spec: &SplitSpec) -> Result<DatasetSplit> {
    assert!(
        spec.train_fraction > 0.0 && spec.train_fraction < 1.0,
        "train_fraction must lie in (0, 1)"
    );
    assert!(
        spec.val_fraction_of_train >= 0.0 && spec.val_fraction_of_train < 1.0,
        "val_fraction_of_train must lie in [0, 1)"
    );

    let mut by_class: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
    for (i, clip) in clips.iter().enumerate() {
        by_class.entry(clip.label).or_default().push(i);
    }
    for (&label, members) in &by_class {
        if members.len() < 2 {
            return Err(Error::InsufficientSamples {
                label,
                count: members.len(),
                required: 2,
            });
        }
    }

    let mut split = DatasetSplit::default();
    for (&label, members) in &by_class {
        let mut order = members.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (label as u64).wrapping_mul(0x9e3779b97f4a7c15));
        order.shuffle(&mut rng);

        // The 1e-9 nudge keeps exact-fraction products (e.g. 100 * 0.2) from
        // flooring one short after binary rounding.
        let n = order.len();
        let n_test = ((((n as f64) * (1.0 - spec.train_fraction) + 1e-9).floor() as usize).max(1))
            .min(n - 1);
        let pool = n - n_test;
        let n_val = if pool >= 2 && spec.val_fraction_of_train > 0.0 {
            (((pool as f64 * spec.val_fraction_of_train + 1e-9).floor() as usize).max(1))
                .min(pool - 1)
        } else {
            0
        };

        for (slot, &idx) in order.iter().enumerate() {
            let clip = clips[idx].clone();
            if slot < n_test {
                split.test.push(clip);
            } else if slot < n_test + n_val {
                split.validation.push(clip);
            } else {
                split.train.push(clip);
            }
        }
    }
    Ok(split)
}
