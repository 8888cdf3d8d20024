//! Evaluation: isolated-sign accuracy, per-stream confidence statistics,
//! false-recognition reporting, and word-sequence metrics.

use crate::decoder::Transcript;
use crate::error::{Error, Result};
use crate::predictor::{LabeledWindow, WindowClassifier};
use crate::types::{ClassId, ContinuousStream, DecodeEvent, Decision, ProbVector};

/// A ground-truth sign whose best interior window ranked a wrong class first
/// while the sign itself was never accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct FalseRecognition {
    pub stream_id: usize,
    pub correct_class: ClassId,
    pub correct_prob: f64,
    pub false_class: ClassId,
    pub false_prob: f64,
    pub window_start: usize,
}

/// Per-stream decode summary.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamReport {
    pub stream_id: usize,
    /// Mean top probability over accepted windows; absent when nothing was
    /// accepted.
    pub avg_max_softmax: Option<f64>,
    pub recognized: Vec<ClassId>,
    pub expected: Vec<ClassId>,
    pub false_recognitions: Vec<FalseRecognition>,
    pub exact_match: bool,
}

/// Accuracy aggregated over repeated runs (one model per seed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyStat {
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

/// Argmax accuracy of one classifier on a labeled window set.
pub fn isolated_accuracy(model: &dyn WindowClassifier, test_set: &[LabeledWindow]) -> Result<f64> {
    if test_set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut hits = 0usize;
    for sample in test_set {
        if model.predict(&sample.window())?.argmax().0 == sample.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / test_set.len() as f64)
}

/// Accuracy mean and (population) standard deviation over per-seed runs. The
/// spread over seeds is the only variance source in this artifact.
pub fn accuracy_over_seeds<F>(seeds: &[u64], mut run: F) -> Result<AccuracyStat>
where
    F: FnMut(u64) -> Result<f64>,
{
    if seeds.is_empty() {
        return Err(Error::EmptySet);
    }
    let accs: Result<Vec<f64>> = seeds.iter().map(|&s| run(s)).collect();
    let accs = accs?;
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let var = accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / accs.len() as f64;
    Ok(AccuracyStat {
        mean,
        std: var.sqrt(),
        runs: accs.len(),
    })
}

/// Mean confidence over Accept events only.
pub fn avg_max_softmax(events: &[DecodeEvent]) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for e in events {
        if let Decision::Accept { confidence, .. } = e.decision {
            sum += confidence;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::NoAccept);
    }
    Ok(sum / count as f64)
}

/// Scan each ground-truth segment: if no interior window accepted the
/// segment's own label, find the interior window with the highest top
/// probability; when that window's argmax is a different class, report the
/// miss with both probabilities. Segments too short to contain a full window
/// cannot be scanned and are skipped.
pub fn false_recognition_report(
    stream: &ContinuousStream,
    stream_id: usize,
    transcript: &Transcript,
    probs: &[(usize, ProbVector)],
    window_size: usize,
) -> Result<Vec<FalseRecognition>> {
    let segments = stream
        .ground_truth
        .as_ref()
        .ok_or(Error::MissingGroundTruth)?;

    let mut out = Vec::new();
    for segment in segments {
        let interior = |start: usize| {
            start >= segment.start_frame && start + window_size - 1 <= segment.end_frame
        };
        let accepted = transcript.events.iter().any(|e| {
            interior(e.window_start)
                && matches!(e.decision, Decision::Accept { class, .. } if class == segment.label)
        });
        if accepted {
            continue;
        }
        let best = probs
            .iter()
            .filter(|(start, _)| interior(*start))
            .max_by(|(_, a), (_, b)| {
                a.argmax().1.partial_cmp(&b.argmax().1).unwrap()
            });
        if let Some((start, p)) = best {
            let (argmax, max_prob) = p.argmax();
            if argmax != segment.label {
                out.push(FalseRecognition {
                    stream_id,
                    correct_class: segment.label,
                    correct_prob: p.as_slice()[segment.label],
                    false_class: argmax,
                    false_prob: max_prob,
                    window_start: *start,
                });
            }
        }
    }
    Ok(out)
}

/// Word-sequence comparison: Levenshtein distance, exact match, and recall
/// under the alignment that maximizes matched words.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceMetrics {
    pub exact_match: bool,
    pub word_recall: f64,
    pub edit_distance: usize,
}

pub fn sequence_metrics(expected: &[ClassId], recognized: &[ClassId]) -> SequenceMetrics {
    let edit_distance = levenshtein(expected, recognized);
    let matched = longest_common_subsequence(expected, recognized);
    let word_recall = if expected.is_empty() {
        if recognized.is_empty() {
            1.0
        } else {
            0.0
        }
    } else {
        matched as f64 / expected.len() as f64
    };
    SequenceMetrics {
        exact_match: expected == recognized,
        word_recall,
        edit_distance,
    }
}

fn levenshtein(a: &[ClassId], b: &[ClassId]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=a.len()).collect();
    let mut cur = vec![0usize; a.len() + 1];
    for (j, &bj) in b.iter().enumerate() {
        cur[0] = j + 1;
        for (i, &ai) in a.iter().enumerate() {
            let sub = prev[i] + usize::from(ai != bj);
            cur[i + 1] = sub.min(prev[i + 1] + 1).min(cur[i] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[a.len()]
}

fn longest_common_subsequence(a: &[ClassId], b: &[ClassId]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &ai in a {
        for (j, &bj) in b.iter().enumerate() {
            cur[j + 1] = if ai == bj {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
        cur.iter_mut().for_each(|v| *v = 0);
    }
    prev[b.len()]
}

/// Assemble the per-stream report from a decode run.
pub fn stream_report(
    stream: &ContinuousStream,
    stream_id: usize,
    transcript: &Transcript,
    probs: &[(usize, ProbVector)],
    window_size: usize,
) -> Result<StreamReport> {
    let expected: Vec<ClassId> = stream
        .ground_truth
        .as_ref()
        .ok_or(Error::MissingGroundTruth)?
        .iter()
        .map(|s| s.label)
        .collect();
    let false_recognitions =
        false_recognition_report(stream, stream_id, transcript, probs, window_size)?;
    Ok(StreamReport {
        stream_id,
        avg_max_softmax: avg_max_softmax(&transcript.events).ok(),
        recognized: transcript.words.clone(),
        expected: expected.clone(),
        false_recognitions,
        exact_match: expected == transcript.words,
    })
}
