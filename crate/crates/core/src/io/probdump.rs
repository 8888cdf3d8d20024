//! Probability-dump CSV: the contract between the batch decoder and offline
//! analysis. Columns: window_start, decision, argmax, max_prob, then the K
//! class probabilities with 6 fractional digits. A replay through the
//! incremental decoder reproduces the original transcript.

use std::fmt::Write as _;

use crate::config::Config;
use crate::decoder::{decode_incremental, DecoderState, Transcript};
use crate::error::{Error, Result};
use crate::types::{BlankReason, DecodeEvent, Decision, ProbVector};

pub const PROB_DUMP_HEADER: &str = "# signseg prob dump v1";

fn decision_tag(d: &Decision) -> &'static str {
    match d {
        Decision::Accept { .. } => "accept",
        Decision::Blank(BlankReason::BelowThreshold) => "blank_below_threshold",
        Decision::Blank(BlankReason::DuplicateSuppressed) => "blank_duplicate",
    }
}

pub fn format_prob_dump(events: &[DecodeEvent], probs: &[(usize, ProbVector)]) -> String {
    let k = probs.first().map_or(0, |(_, p)| p.len());
    let mut out = String::new();
    out.push_str(PROB_DUMP_HEADER);
    out.push('\n');
    out.push_str("window_start,decision,argmax,max_prob");
    for i in 0..k {
        let _ = write!(out, ",p{i}");
    }
    out.push('\n');
    for (event, (start, p)) in events.iter().zip(probs) {
        debug_assert_eq!(event.window_start, *start);
        let _ = write!(
            out,
            "{},{},{},{:.6}",
            event.window_start,
            decision_tag(&event.decision),
            event.argmax_class,
            event.max_prob
        );
        for v in p.as_slice() {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

/// Parse a dump back into window probabilities. The 6-digit column rounding
/// can leave the row sum off by a few 1e-6, so rows are renormalized before
/// simplex validation; anything farther off than 1e-3 is rejected as corrupt
/// rather than silently rescaled.
pub fn parse_prob_dump(text: &str, path: &str) -> Result<Vec<(usize, ProbVector)>> {
    let mut out = Vec::new();
    let mut k: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let err = |msg: String| Error::Parse {
            path: path.to_string(),
            line: lineno,
            msg,
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("window_start") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 5 {
            return Err(err("expected at least 5 columns".into()));
        }
        let start: usize = fields[0]
            .parse()
            .map_err(|_| err("window_start is not an integer".into()))?;
        let probs: std::result::Result<Vec<f64>, _> =
            fields[4..].iter().map(|f| f.parse::<f64>()).collect();
        let probs = probs.map_err(|_| err("probability is not a number".into()))?;
        match k {
            None => k = Some(probs.len()),
            Some(expected) if expected != probs.len() => {
                return Err(err(format!(
                    "row has {} probabilities, expected {expected}",
                    probs.len()
                )));
            }
            _ => {}
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-3 {
            return Err(err(format!("probabilities sum to {sum}")));
        }
        let normalized: Vec<f64> = probs.iter().map(|p| (p / sum).clamp(0.0, 1.0)).collect();
        let p = ProbVector::new(normalized).map_err(|e| err(e.to_string()))?;
        out.push((start, p));
    }
    Ok(out)
}

/// Replay a parsed dump through the incremental decoder.
pub fn replay(probs: &[(usize, ProbVector)], cfg: &Config) -> Transcript {
    let mut state = DecoderState::new();
    for (start, p) in probs {
        let (next, _) = decode_incremental(state, *start, p, cfg);
        state = next;
    }
    state.into_transcript()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::decode_probs;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_probs(seed: u64, k: usize, n: usize) -> Vec<(usize, ProbVector)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let hot = rng.gen_range(0..k);
                let p: f64 = rng.gen_range(0.2..0.95);
                let v: Vec<f64> = (0..k)
                    .map(|j| if j == hot { p } else { (1.0 - p) / (k - 1) as f64 })
                    .collect();
                (i, ProbVector::new(v).unwrap())
            })
            .collect()
    }

    #[test]
    fn dump_replay_reproduces_transcript() {
        // The 6-digit columns perturb confidences at the 1e-6 level, so the
        // replay contract is about decisions and words, not float identity.
        let kind = |d: &crate::types::Decision| match d {
            crate::types::Decision::Accept { class, .. } => ("accept", *class),
            crate::types::Decision::Blank(crate::types::BlankReason::BelowThreshold) => {
                ("blank_t", 0)
            }
            crate::types::Decision::Blank(crate::types::BlankReason::DuplicateSuppressed) => {
                ("blank_d", 0)
            }
        };
        let cfg = Config::default();
        for seed in 0..20 {
            let probs = random_probs(seed, 8, 60);
            let original = decode_probs(&probs, &cfg);
            let text = format_prob_dump(&original.events, &probs);
            let parsed = parse_prob_dump(&text, "mem").unwrap();
            let replayed = replay(&parsed, &cfg);
            assert_eq!(replayed.words, original.words, "seed {seed}");
            let decisions: Vec<_> = replayed.events.iter().map(|e| kind(&e.decision)).collect();
            let original_decisions: Vec<_> =
                original.events.iter().map(|e| kind(&e.decision)).collect();
            assert_eq!(decisions, original_decisions, "seed {seed}");
        }
    }

    #[test]
    fn parse_rejects_wildly_unnormalized_rows() {
        let text = format!("{PROB_DUMP_HEADER}\n0,accept,0,0.900000,0.9,0.9\n");
        assert!(matches!(
            parse_prob_dump(&text, "mem"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn parse_skips_header_and_comment_lines() {
        let text = format!("{PROB_DUMP_HEADER}\nwindow_start,decision,argmax,max_prob,p0,p1\n5,accept,0,0.700000,0.700000,0.300000\n");
        let parsed = parse_prob_dump(&text, "mem").unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].0, 5);
        assert!((parsed[0].1.as_slice()[0] - 0.7).abs() < 1e-9);
    }
}
