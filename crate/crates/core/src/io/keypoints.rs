//! Line-delimited keypoint files: one record per frame — the frame index,
//! then each hand as a flat 63-value coordinate array in (keypoint, xyz)
//! row-major order. Coordinates carry exactly 9 fractional digits, which
//! makes parse-format-parse a fixed point.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::types::{HandMatrix, KeypointFrame};

pub const COORD_DECIMALS: usize = 9;

pub fn format_frames(frames: &[KeypointFrame]) -> String {
    let mut out = String::new();
    for frame in frames {
        let _ = write!(out, "{}", frame.timestamp_index);
        for hand in &frame.hands {
            for row in hand.rows() {
                for v in row {
                    let _ = write!(out, " {v:.9}");
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn parse_frames(text: &str, path: &str, keypoints_per_hand: usize) -> Result<Vec<KeypointFrame>> {
    let per_hand = keypoints_per_hand * 3;
    let mut frames = Vec::new();
    let mut hand_count: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_ascii_whitespace();
        let err = |msg: String| Error::Parse {
            path: path.to_string(),
            line: lineno,
            msg,
        };
        let index: usize = parts
            .next()
            .ok_or_else(|| err("empty record".into()))?
            .parse()
            .map_err(|_| err("frame index is not an integer".into()))?;
        let values: std::result::Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
        let values = values.map_err(|_| err("coordinate is not a number".into()))?;
        if values.is_empty() || values.len() % per_hand != 0 {
            return Err(err(format!(
                "{} coordinates is not a multiple of {per_hand} (one hand)",
                values.len()
            )));
        }
        let hands_here = values.len() / per_hand;
        if hands_here > 2 {
            return Err(err(format!("{hands_here} hands; at most 2 supported")));
        }
        match hand_count {
            None => hand_count = Some(hands_here),
            Some(expected) if expected != hands_here => {
                return Err(err(format!(
                    "hand count changed from {expected} to {hands_here}"
                )));
            }
            _ => {}
        }
        let mut hands = Vec::with_capacity(hands_here);
        for h in 0..hands_here {
            let rows = values[h * per_hand..(h + 1) * per_hand]
                .chunks_exact(3)
                .map(|c| {
                    if c.iter().any(|v| !v.is_finite()) {
                        Err(err("non-finite coordinate".into()))
                    } else {
                        Ok([c[0], c[1], c[2]])
                    }
                })
                .collect::<Result<Vec<[f64; 3]>>>()?;
            hands.push(HandMatrix::new(rows));
        }
        frames.push(KeypointFrame::new(hands, index));
    }
    if frames.is_empty() {
        return Err(Error::Parse {
            path: path.to_string(),
            line: 0,
            msg: "file contains no frames".into(),
        });
    }
    Ok(frames)
}
