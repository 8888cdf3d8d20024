//! Sliding-window word separation.
//!
//! A fixed-size window slides across the stream with a configurable stride.
//! Each window is classified independently; a window is accepted as a word
//! only when its top probability strictly exceeds the threshold and its class
//! differs from the most recently accepted one. Everything else becomes a
//! Blank, and Blanks are dropped from the final word sequence.
//!
//! A threshold above 0.5 guarantees at most one class can clear it per
//! window, since the probabilities sum to one.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::features::{extract_window, sequence_features};
use crate::predictor::WindowClassifier;
use crate::types::{BlankReason, ClassId, ContinuousStream, DecodeEvent, Decision, ProbVector};

/// Streaming decoder state: the duplicate-suppression memory plus the
/// append-only event log.
#[derive(Debug, Clone, Default)]
pub struct DecoderState {
    pub last_accepted: Option<ClassId>,
    pub events: Vec<DecodeEvent>,
}

impl DecoderState {
    pub fn new() -> Self {
        DecoderState::default()
    }

    /// Finish the stream and collapse the events into a transcript.
    pub fn into_transcript(self) -> Transcript {
        let words = collapse_blanks(&self.events);
        Transcript {
            words,
            events: self.events,
        }
    }
}

/// Decoded word sequence with the full per-window event log behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub words: Vec<ClassId>,
    pub events: Vec<DecodeEvent>,
}

/// The per-window decision rule. Strict comparison: a maximum exactly at the
/// threshold is blanked, preferring a Blank over a shaky label.
pub fn decide_window(
    p: &ProbVector,
    last_accepted: Option<ClassId>,
    threshold: f64,
) -> Decision {
    let (class, max_prob) = p.argmax();
    if max_prob <= threshold {
        Decision::Blank(BlankReason::BelowThreshold)
    } else if last_accepted == Some(class) {
        Decision::Blank(BlankReason::DuplicateSuppressed)
    } else {
        Decision::Accept {
            class,
            confidence: max_prob,
        }
    }
}

/// One streaming step: classify the next window's probabilities and fold the
/// decision into the state. Folding this over a probability sequence is
/// exactly the batch decode.
pub fn decode_incremental(
    mut state: DecoderState,
    window_start: usize,
    probs: &ProbVector,
    cfg: &Config,
) -> (DecoderState, DecodeEvent) {
    debug_assert!(
        probs.as_slice().iter().filter(|&&p| p > cfg.threshold).count() <= 1,
        "more than one class above threshold; simplex invariant violated"
    );
    let decision = decide_window(probs, state.last_accepted, cfg.threshold);
    let (argmax_class, max_prob) = probs.argmax();
    let event = DecodeEvent {
        window_start,
        decision,
        max_prob,
        argmax_class,
    };
    if let Decision::Accept { class, .. } = decision {
        state.last_accepted = Some(class);
    }
    state.events.push(event);
    (state, event)
}

/// Window start positions for a stream of `len` frames: `0, stride, ...`
/// while a full window still fits. Count is `(len - window)/stride + 1`.
pub fn window_starts(len: usize, window: usize, stride: usize) -> impl Iterator<Item = usize> {
    debug_assert!(stride >= 1);
    (0..=len.saturating_sub(window)).step_by(stride).take(
        if len >= window {
            (len - window) / stride + 1
        } else {
            0
        },
    )
}

/// Decode a pre-computed window probability sequence.
pub fn decode_probs(probs: &[(usize, ProbVector)], cfg: &Config) -> Transcript {
    let mut state = DecoderState::new();
    for (start, p) in probs {
        let (next, _) = decode_incremental(state, *start, p, cfg);
        state = next;
    }
    state.into_transcript()
}

/// Full batch decode: extract features, classify every window position, and
/// apply the decision rule in stream order. Also returns the per-window
/// probabilities for dumping and offline analysis.
pub fn decode_stream(
    stream: &ContinuousStream,
    model: &dyn WindowClassifier,
    cfg: &Config,
) -> Result<(Transcript, Vec<(usize, ProbVector)>)> {
    if stream.len() < cfg.window_size {
        return Err(Error::StreamTooShort {
            len: stream.len(),
            window: cfg.window_size,
        });
    }
    let features = sequence_features(&stream.frames, cfg.num_singular_values)?;
    let mut probs = Vec::new();
    for start in window_starts(stream.len(), cfg.window_size, cfg.stride) {
        let window = extract_window(&features, start, cfg.window_size)?;
        probs.push((start, model.predict(&window)?));
    }
    Ok((decode_probs(&probs, cfg), probs))
}

/// Drop Blanks: the accepted classes in order form the word sequence.
pub fn collapse_blanks(events: &[DecodeEvent]) -> Vec<ClassId> {
    events.iter().filter_map(DecodeEvent::accepted_class).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn probs(v: Vec<f64>) -> ProbVector {
        ProbVector::new(v).unwrap()
    }

    #[test]
    fn accepts_first_confident_window() {
        let p = probs(vec![0.54, 0.46]);
        assert_eq!(
            decide_window(&p, None, 0.51),
            Decision::Accept { class: 0, confidence: 0.54 }
        );
    }

    #[test]
    fn blanks_subthreshold_window() {
        // Published miss: true class at 0.37, argmax elsewhere at 0.39.
        let mut v = vec![0.0; 100];
        v[44] = 0.37;
        v[62] = 0.39;
        v[0] = 1.0 - 0.37 - 0.39;
        let p = probs(v);
        assert_eq!(
            decide_window(&p, None, 0.51),
            Decision::Blank(BlankReason::BelowThreshold)
        );
        assert_eq!(
            decide_window(&p, Some(3), 0.51),
            Decision::Blank(BlankReason::BelowThreshold)
        );
    }

    #[test]
    fn suppresses_repeat_of_last_accepted() {
        let p = probs(vec![0.98, 0.02]);
        assert_eq!(
            decide_window(&p, Some(0), 0.51),
            Decision::Blank(BlankReason::DuplicateSuppressed)
        );
        assert_eq!(
            decide_window(&p, Some(1), 0.51),
            Decision::Accept { class: 0, confidence: 0.98 }
        );
    }

    #[test]
    fn uniform_distribution_is_blanked() {
        for k in 2..10 {
            let p = probs(vec![1.0 / k as f64; k]);
            assert_eq!(
                decide_window(&p, None, 0.51),
                Decision::Blank(BlankReason::BelowThreshold)
            );
        }
    }

    #[test]
    fn exact_threshold_goes_to_blank() {
        let p = probs(vec![0.51, 0.49]);
        assert_eq!(
            decide_window(&p, None, 0.51),
            Decision::Blank(BlankReason::BelowThreshold)
        );
    }

    #[test]
    fn collapse_filters_to_accepts_in_order() {
        let mk = |start: usize, decision: Decision| DecodeEvent {
            window_start: start,
            decision,
            max_prob: 0.9,
            argmax_class: 0,
        };
        let events = vec![
            mk(0, Decision::Accept { class: 4, confidence: 0.9 }),
            mk(1, Decision::Blank(BlankReason::DuplicateSuppressed)),
            mk(2, Decision::Blank(BlankReason::BelowThreshold)),
            mk(3, Decision::Accept { class: 2, confidence: 0.8 }),
            mk(4, Decision::Blank(BlankReason::BelowThreshold)),
        ];
        assert_eq!(collapse_blanks(&events), vec![4, 2]);
        assert_eq!(collapse_blanks(&[]), Vec::<ClassId>::new());
    }

    #[test]
    fn window_start_count_matches_formula() {
        for len in 1..200 {
            for window in 1..60 {
                for stride in 1..7 {
                    let got = window_starts(len, window, stride).count();
                    let want = if len >= window { (len - window) / stride + 1 } else { 0 };
                    assert_eq!(got, want, "len {len} window {window} stride {stride}");
                }
            }
        }
    }

    fn random_prob_sequence(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Vec<(usize, ProbVector)> {
        (0..n)
            .map(|i| {
                // Mix confident and flat windows.
                let v: Vec<f64> = if rng.gen_bool(0.5) {
                    let hot = rng.gen_range(0..k);
                    let p: f64 = rng.gen_range(0.3..1.0);
                    (0..k)
                        .map(|j| if j == hot { p } else { (1.0 - p) / (k - 1) as f64 })
                        .collect()
                } else {
                    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0f64..1.0)).collect();
                    let sum: f64 = raw.iter().sum();
                    raw.iter().map(|x| x / sum).collect()
                };
                (i, ProbVector::new(v).unwrap())
            })
            .collect()
    }

    #[test]
    fn no_adjacent_duplicate_words_over_random_sequences() {
        let cfg = Config::default();
        let mut rng = ChaCha8Rng::seed_from_u64(500);
        for _ in 0..500 {
            let seq = random_prob_sequence(&mut rng, 6, 40);
            let t = decode_probs(&seq, &cfg);
            for pair in t.words.windows(2) {
                assert_ne!(pair[0], pair[1]);
            }
        }
    }

    #[test]
    fn batch_equals_incremental_fold() {
        let cfg = Config::default();
        let mut rng = ChaCha8Rng::seed_from_u64(501);
        for _ in 0..100 {
            let seq = random_prob_sequence(&mut rng, 5, 30);
            let batch = decode_probs(&seq, &cfg);
            let mut state = DecoderState::new();
            for (s, p) in &seq {
                let (next, _) = decode_incremental(state, *s, p, &cfg);
                state = next;
            }
            assert_eq!(state.into_transcript(), batch);
        }
    }

    #[test]
    fn empty_fold_gives_empty_transcript() {
        let t = decode_probs(&[], &Config::default());
        assert!(t.words.is_empty());
        assert!(t.events.is_empty());
    }

    #[test]
    fn all_subthreshold_gives_empty_transcript() {
        let cfg = Config::default();
        let seq: Vec<(usize, ProbVector)> = (0..30)
            .map(|i| (i, probs(vec![0.5, 0.3, 0.2])))
            .collect();
        let t = decode_probs(&seq, &cfg);
        assert!(t.words.is_empty());
        assert_eq!(t.events.len(), 30);
    }

    #[test]
    fn raising_threshold_never_adds_accepts_per_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(502);
        for _ in 0..500 {
            let seq = random_prob_sequence(&mut rng, 4, 1);
            let p = &seq[0].1;
            let last = if rng.gen_bool(0.5) { Some(rng.gen_range(0..4)) } else { None };
            let lo: f64 = rng.gen_range(0.5001..0.99);
            let hi: f64 = rng.gen_range(lo..0.999);
            let accept_hi = matches!(decide_window(p, last, hi), Decision::Accept { .. });
            let accept_lo = matches!(decide_window(p, last, lo), Decision::Accept { .. });
            assert!(!accept_hi || accept_lo, "accept at {hi} but not at {lo}");
        }
    }
}
