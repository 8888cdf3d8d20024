use crate::error::{Error, Result};

/// Dense class identifier in `[0, K)`. Reports display these 1-based to match
/// the conventional table numbering; every file format stays 0-based.
pub type ClassId = usize;

/// One hand as a keypoint matrix: one row per landmark, columns are x/y/z.
#[derive(Debug, Clone, PartialEq)]
pub struct HandMatrix {
    rows: Vec<[f64; 3]>,
}

impl HandMatrix {
    pub fn new(rows: Vec<[f64; 3]>) -> Self {
        HandMatrix { rows }
    }

    pub fn rows(&self) -> &[[f64; 3]] {
        &self.rows
    }

    pub fn num_keypoints(&self) -> usize {
        self.rows.len()
    }
}

/// Per-frame hand landmarks: 1 or 2 hands, each `keypoints_per_hand` x 3.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointFrame {
    pub hands: Vec<HandMatrix>,
    pub timestamp_index: usize,
}

impl KeypointFrame {
    pub fn new(hands: Vec<HandMatrix>, timestamp_index: usize) -> Self {
        KeypointFrame {
            hands,
            timestamp_index,
        }
    }

    pub fn hand_count(&self) -> usize {
        self.hands.len()
    }
}

/// Validate a frame against the expected keypoint count: every hand matrix
/// must be exactly `keypoints_per_hand` x 3 with finite coordinates.
pub fn validate_frame(frame: KeypointFrame, keypoints_per_hand: usize) -> Result<KeypointFrame> {
    for (h, hand) in frame.hands.iter().enumerate() {
        if hand.num_keypoints() != keypoints_per_hand {
            return Err(Error::Dimension {
                hand: h,
                rows: hand.num_keypoints(),
                expected: keypoints_per_hand,
            });
        }
        for (r, row) in hand.rows().iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        hand: h,
                        row: r,
                        col: c,
                    });
                }
            }
        }
    }
    Ok(frame)
}

/// A labeled isolated-sign clip.
#[derive(Debug, Clone, PartialEq)]
pub struct SignClip {
    pub frames: Vec<KeypointFrame>,
    pub label: ClassId,
    pub source_id: String,
}

impl SignClip {
    pub fn new(frames: Vec<KeypointFrame>, label: ClassId, source_id: impl Into<String>) -> Self {
        SignClip {
            frames,
            label,
            source_id: source_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn hand_count(&self) -> usize {
        self.frames.first().map_or(0, |f| f.hand_count())
    }
}

/// A labeled span of a continuous stream; `end_frame` is inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub label: ClassId,
    pub start_frame: usize,
    pub end_frame: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An unlabeled frame sequence with hidden word boundaries. Ground truth, when
/// present, exists for evaluation only and never feeds the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousStream {
    pub frames: Vec<KeypointFrame>,
    pub ground_truth: Option<Vec<Segment>>,
}

impl ContinuousStream {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Tolerance for the simplex sum check. Absorbs softmax rounding while staying
/// far below any decision margin around the 0.51 threshold.
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

/// A probability distribution over the sign classes: entries in [0, 1]
/// summing to 1 within `SIMPLEX_TOLERANCE`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    probs: Vec<f64>,
}

impl ProbVector {
    /// Validate a raw vector into a `ProbVector`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Simplex("empty vector".into()));
        }
        let mut sum = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Simplex(format!("non-finite entry at {i}")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Simplex(format!("entry {p} at {i} outside [0, 1]")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::Simplex(format!("entries sum to {sum}, not 1")));
        }
        Ok(ProbVector { probs })
    }

    /// Softmax of raw logits; the exact normalization makes the result a valid
    /// simplex element by construction.
    pub fn softmax(logits: &[f64]) -> Self {
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        ProbVector {
            probs: exps.iter().map(|e| e / sum).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// Highest-probability class and its probability. Ties break to the lowest
    /// class index so decoding stays deterministic.
    pub fn argmax(&self) -> (ClassId, f64) {
        let mut best = 0;
        let mut best_p = self.probs[0];
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > best_p {
                best = i;
                best_p = p;
            }
        }
        (best, best_p)
    }
}

/// Why a window was blanked instead of emitting a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlankReason {
    /// No class probability exceeded the threshold.
    BelowThreshold,
    /// The argmax repeats the most recently accepted class.
    DuplicateSuppressed,
}

/// Per-window decoding decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Accept { class: ClassId, confidence: f64 },
    Blank(BlankReason),
}

/// One decoding step: the window position, the decision, and the window's
/// softmax argmax regardless of whether it was accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeEvent {
    pub window_start: usize,
    pub decision: Decision,
    pub max_prob: f64,
    pub argmax_class: ClassId,
}

impl DecodeEvent {
    pub fn accepted_class(&self) -> Option<ClassId> {
        match self.decision {
            Decision::Accept { class, .. } => Some(class),
            Decision::Blank(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_hand(n: usize) -> HandMatrix {
        HandMatrix::new(vec![[0.1, 0.2, 0.3]; n])
    }

    #[test]
    fn validate_frame_accepts_well_formed_two_hand_frame() {
        let frame = KeypointFrame::new(vec![finite_hand(21), finite_hand(21)], 0);
        let out = validate_frame(frame.clone(), 21).unwrap();
        assert_eq!(out, frame);
    }

    #[test]
    fn validate_frame_rejects_wrong_shape() {
        let frame = KeypointFrame::new(vec![finite_hand(20)], 0);
        match validate_frame(frame, 21) {
            Err(Error::Dimension { rows: 20, .. }) => {}
            other => panic!("expected DimensionError, got {other:?}"),
        }
    }

    #[test]
    fn validate_frame_rejects_nan() {
        let mut rows = vec![[0.0, 0.0, 0.0]; 21];
        rows[0][0] = f64::NAN;
        let frame = KeypointFrame::new(vec![HandMatrix::new(rows)], 0);
        match validate_frame(frame, 21) {
            Err(Error::NonFinite { row: 0, col: 0, .. }) => {}
            other => panic!("expected NonFiniteError, got {other:?}"),
        }
    }

    #[test]
    fn prob_vector_accepts_table_values() {
        // 0.54 is the first published window maximum.
        ProbVector::new(vec![0.54, 0.46]).unwrap();
        ProbVector::new(vec![1.0, 0.0, 0.0]).unwrap();
    }

    #[test]
    fn prob_vector_rejects_bad_sum() {
        assert!(ProbVector::new(vec![0.6, 0.6]).is_err());
        assert!(ProbVector::new(vec![0.5, 0.4]).is_err());
        assert!(ProbVector::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn argmax_breaks_ties_to_lower_index() {
        let p = ProbVector::new(vec![0.25, 0.25, 0.25, 0.25]).unwrap();
        assert_eq!(p.argmax(), (0, 0.25));
    }
}
