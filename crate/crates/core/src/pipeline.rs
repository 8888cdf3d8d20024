//! End-to-end orchestration shared by the CLI, the evaluation suite, and the
//! browser demo: clips -> split -> windows -> model -> decoded streams ->
//! reports.

use crate::config::Config;
use crate::decoder::{decode_stream, Transcript};
use crate::error::Result;
use crate::metrics::{isolated_accuracy, sequence_metrics, stream_report, StreamReport};
use crate::predictor::{clip_to_window, train, LabeledWindow, PredictorKind, PredictorModel, TrainReport};
use crate::preprocess::{split_dataset, DatasetSplit, SplitSpec};
use crate::types::{ContinuousStream, ProbVector, SignClip};

/// Resample each clip to the window length and extract features.
pub fn windows_for(clips: &[SignClip], cfg: &Config) -> Result<Vec<LabeledWindow>> {
    clips.iter().map(|c| clip_to_window(c, cfg)).collect()
}

/// Stratified split using the configured fractions and seed.
pub fn split_clips(clips: &[SignClip], cfg: &Config) -> Result<DatasetSplit> {
    split_dataset(
        clips,
        &SplitSpec {
            train_fraction: cfg.train_fraction,
            val_fraction_of_train: 0.1,
            seed: cfg.seed,
        },
    )
}

/// Train on a split dataset and score the held-out windows. The returned
/// report carries the test accuracy.
pub fn train_on_split(
    split: &DatasetSplit,
    cfg: &Config,
    kind: PredictorKind,
    num_classes: usize,
) -> Result<(PredictorModel, TrainReport)> {
    let train_windows = windows_for(&split.train, cfg)?;
    let val_windows = windows_for(&split.validation, cfg)?;
    let (model, mut report) = train(&train_windows, &val_windows, cfg, kind, num_classes)?;
    if !split.test.is_empty() {
        let test_windows = windows_for(&split.test, cfg)?;
        report.test_accuracy = Some(isolated_accuracy(&model, &test_windows)?);
    }
    Ok((model, report))
}

/// One decoded stream with everything downstream consumers need.
#[derive(Debug, Clone)]
pub struct StreamDecode {
    pub transcript: Transcript,
    pub probs: Vec<(usize, ProbVector)>,
    pub report: StreamReport,
}

/// Decode every stream in id order.
pub fn decode_suite(
    model: &PredictorModel,
    streams: &[ContinuousStream],
    cfg: &Config,
) -> Result<Vec<StreamDecode>> {
    streams
        .iter()
        .enumerate()
        .map(|(id, stream)| {
            let (transcript, probs) = decode_stream(stream, model, cfg)?;
            let report = stream_report(stream, id, &transcript, &probs, cfg.window_size)?;
            Ok(StreamDecode {
                transcript,
                probs,
                report,
            })
        })
        .collect()
}

/// Aggregate decode quality across a suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSummary {
    pub streams: usize,
    pub exact_matches: usize,
    pub expected_words: usize,
    pub matched_words: usize,
    pub word_recall: f64,
    pub false_recognitions: usize,
}

pub fn summarize_suite(decodes: &[StreamDecode]) -> SuiteSummary {
    let mut expected_words = 0usize;
    let mut matched_words = 0usize;
    let mut exact = 0usize;
    let mut false_recognitions = 0usize;
    for d in decodes {
        let m = sequence_metrics(&d.report.expected, &d.report.recognized);
        expected_words += d.report.expected.len();
        matched_words +=
            (m.word_recall * d.report.expected.len() as f64).round() as usize;
        exact += usize::from(d.report.exact_match);
        false_recognitions += d.report.false_recognitions.len();
    }
    SuiteSummary {
        streams: decodes.len(),
        exact_matches: exact,
        expected_words,
        matched_words,
        word_recall: if expected_words == 0 {
            1.0
        } else {
            matched_words as f64 / expected_words as f64
        },
        false_recognitions,
    }
}
