//! Per-frame SVD feature extraction.
//!
//! Each hand contributes six values: the three singular values of the
//! centroid-centered keypoint matrix (pose) and the three singular values of
//! the raw frame-to-frame displacement matrix (motion). Two hands give the
//! full 12-value descriptor; one-handed data is zero-padded to the configured
//! width so one model shape serves both.

use crate::error::{Error, Result};
use crate::types::KeypointFrame;

/// Singular values per hand block: 3 pose + 3 displacement.
pub const VALUES_PER_HAND: usize = 6;

/// Fixed-length per-frame descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub frame_index: usize,
}

/// A borrowed window of consecutive frame descriptors.
#[derive(Debug, Clone, Copy)]
pub struct FeatureWindow<'a> {
    pub features: &'a [FeatureVector],
    pub start_frame: usize,
}

impl<'a> FeatureWindow<'a> {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, |f| f.values.len())
    }
}

/// Singular values of an n x 3 matrix via one-sided Jacobi rotations:
/// repeatedly rotate column pairs until mutually orthogonal, then read the
/// singular values off as column norms. Returned descending, all >= 0.
pub fn singular_values(rows: &[[f64; 3]]) -> Result<[f64; 3]> {
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    hand: 0,
                    row: r,
                    col: c,
                });
            }
        }
    }

    // Work on the three columns.
    let n = rows.len();
    let mut cols = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (i, row) in rows.iter().enumerate() {
        for c in 0..3 {
            cols[c][i] = row[c];
        }
    }

    const MAX_SWEEPS: usize = 60;
    const TOL: f64 = 1e-15;
    for _ in 0..MAX_SWEEPS {
        let mut converged = true;
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let mut alpha = 0.0;
            let mut beta = 0.0;
            let mut gamma = 0.0;
            for i in 0..n {
                alpha += cols[p][i] * cols[p][i];
                beta += cols[q][i] * cols[q][i];
                gamma += cols[p][i] * cols[q][i];
            }
            if gamma.abs() <= TOL * (alpha * beta).sqrt() || gamma == 0.0 {
                continue;
            }
            converged = false;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            for i in 0..n {
                let vp = cols[p][i];
                let vq = cols[q][i];
                cols[p][i] = c * vp - s * vq;
                cols[q][i] = s * vp + c * vq;
            }
        }
        if converged {
            break;
        }
    }

    let mut sv = [0.0; 3];
    for c in 0..3 {
        sv[c] = cols[c].iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}

fn centered(rows: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let n = rows.len() as f64;
    let mut centroid = [0.0; 3];
    for row in rows {
        for c in 0..3 {
            centroid[c] += row[c];
        }
    }
    for c in &mut centroid {
        *c /= n;
    }
    rows.iter()
        .map(|row| {
            [
                row[0] - centroid[0],
                row[1] - centroid[1],
                row[2] - centroid[2],
            ]
        })
        .collect()
}

/// Descriptor for one frame: per hand, singular values of the centered
/// keypoint matrix followed by singular values of the raw displacement from
/// the previous frame (zeros at a clip's first frame). Zero-padded to `dim`.
pub fn frame_features(
    cur: &KeypointFrame,
    prev: Option<&KeypointFrame>,
    dim: usize,
) -> Result<FeatureVector> {
    if let Some(p) = prev {
        if p.hand_count() != cur.hand_count() {
            return Err(Error::HandCountMismatch {
                expected: cur.hand_count(),
                got: p.hand_count(),
            });
        }
    }
    if cur.hand_count() * VALUES_PER_HAND > dim {
        return Err(Error::DimensionMismatch(format!(
            "{} hands need {} feature slots but dim is {dim}",
            cur.hand_count(),
            cur.hand_count() * VALUES_PER_HAND,
        )));
    }

    let mut values = Vec::with_capacity(dim);
    for (h, hand) in cur.hands.iter().enumerate() {
        let pose = singular_values(&centered(hand.rows()))?;
        values.extend_from_slice(&pose);

        let disp = match prev {
            Some(p) => {
                let prev_hand = &p.hands[h];
                if prev_hand.num_keypoints() != hand.num_keypoints() {
                    return Err(Error::DimensionMismatch(format!(
                        "hand {h} keypoint count changed between frames"
                    )));
                }
                let diff: Vec<[f64; 3]> = hand
                    .rows()
                    .iter()
                    .zip(prev_hand.rows())
                    .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
                    .collect();
                singular_values(&diff)?
            }
            None => [0.0; 3],
        };
        values.extend_from_slice(&disp);
    }
    values.resize(dim, 0.0);
    Ok(FeatureVector {
        values,
        frame_index: cur.timestamp_index,
    })
}

/// Feature sequence for a whole frame sequence, threading each frame's
/// predecessor into the displacement block.
pub fn sequence_features(frames: &[KeypointFrame], dim: usize) -> Result<Vec<FeatureVector>> {
    let mut out = Vec::with_capacity(frames.len());
    let mut prev: Option<&KeypointFrame> = None;
    for frame in frames {
        out.push(frame_features(frame, prev, dim)?);
        prev = Some(frame);
    }
    Ok(out)
}

/// Borrow the feature rows `[start, start + window_size)`.
pub fn extract_window(
    stream_features: &[FeatureVector],
    start: usize,
    window_size: usize,
) -> Result<FeatureWindow<'_>> {
    if start + window_size > stream_features.len() {
        return Err(Error::OutOfRange {
            start,
            window: window_size,
            len: stream_features.len(),
        });
    }
    Ok(FeatureWindow {
        features: &stream_features[start..start + window_size],
        start_frame: start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::HandMatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: eigenvalues of the 3x3 Gram matrix m^T m by the
    /// trigonometric closed form for the characteristic cubic, then sqrt.
    fn gram_eigen_oracle(rows: &[[f64; 3]]) -> [f64; 3] {
        let mut g = [[0.0f64; 3]; 3];
        for row in rows {
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] += row[i] * row[j];
                }
            }
        }
        let q = (g[0][0] + g[1][1] + g[2][2]) / 3.0;
        let off = g[0][1] * g[0][1] + g[0][2] * g[0][2] + g[1][2] * g[1][2];
        let p2 = ((g[0][0] - q).powi(2) + (g[1][1] - q).powi(2) + (g[2][2] - q).powi(2)
            + 2.0 * off)
            / 6.0;
        let p = p2.sqrt();
        if p < 1e-300 {
            let v = q.max(0.0).sqrt();
            return [v, v, v];
        }
        let b = |i: usize, j: usize| (g[i][j] - if i == j { q } else { 0.0 }) / p;
        let det_b = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
            - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
            + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
        let r = (det_b / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let l1 = q + 2.0 * p * phi.cos();
        let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let l2 = 3.0 * q - l1 - l3;
        let mut out = [l1.max(0.0).sqrt(), l2.max(0.0).sqrt(), l3.max(0.0).sqrt()];
        out.sort_by(|a, b| b.partial_cmp(a).unwrap());
        out
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 3]> {
        (0..n)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            })
            .collect()
    }

    fn rotation_matrix(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
        // Compose rotations about the three axes with random angles.
        let (a, b, c) = (
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::TAU),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let rx = [
            [1.0, 0.0, 0.0],
            [0.0, a.cos(), -a.sin()],
            [0.0, a.sin(), a.cos()],
        ];
        let ry = [
            [b.cos(), 0.0, b.sin()],
            [0.0, 1.0, 0.0],
            [-b.sin(), 0.0, b.cos()],
        ];
        let rz = [
            [c.cos(), -c.sin(), 0.0],
            [c.sin(), c.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ];
        let mul = |x: [[f64; 3]; 3], y: [[f64; 3]; 3]| {
            let mut out = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for (k, yk) in y.iter().enumerate() {
                        out[i][j] += x[i][k] * yk[j];
                    }
                }
            }
            out
        };
        mul(mul(rx, ry), rz)
    }

    fn apply_rotation(rows: &[[f64; 3]], r: &[[f64; 3]; 3]) -> Vec<[f64; 3]> {
        rows.iter()
            .map(|row| {
                let mut out = [0.0; 3];
                for (j, o) in out.iter_mut().enumerate() {
                    for k in 0..3 {
                        *o += row[k] * r[k][j];
                    }
                }
                out
            })
            .collect()
    }

    #[test]
    fn zero_matrix_has_zero_singular_values() {
        let sv = singular_values(&[[0.0; 3]; 21]).unwrap();
        assert_eq!(sv, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn orthogonal_columns_give_exact_singular_values() {
        // Columns 2*e1, 1*e2, 0 embedded in 21 rows.
        let mut rows = vec![[0.0; 3]; 21];
        rows[0][0] = 2.0;
        rows[1][1] = 1.0;
        let sv = singular_values(&rows).unwrap();
        assert_eq!(sv, [2.0, 1.0, 0.0]);
    }

    #[test]
    fn singular_values_match_gram_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let m = random_matrix(&mut rng, 21);
            let got = singular_values(&m).unwrap();
            let want = gram_eigen_oracle(&m);
            for (g, w) in got.iter().zip(want.iter()) {
                let rel = (g - w).abs() / w.max(1e-12);
                worst = worst.max(rel);
            }
        }
        assert!(worst <= 1e-9, "max relative error {worst}");
    }

    #[test]
    fn singular_values_reject_nan() {
        let mut rows = vec![[0.0; 3]; 21];
        rows[3][1] = f64::INFINITY;
        assert!(singular_values(&rows).is_err());
    }

    #[test]
    fn pose_block_is_translation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let rows = random_matrix(&mut rng, 21);
            let offset = [
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            ];
            let shifted: Vec<[f64; 3]> = rows
                .iter()
                .map(|r| [r[0] + offset[0], r[1] + offset[1], r[2] + offset[2]])
                .collect();
            let a = singular_values(&centered(&rows)).unwrap();
            let b = singular_values(&centered(&shifted)).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() <= 1e-9 * x.max(1.0), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn pose_block_is_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let rows = centered(&random_matrix(&mut rng, 21));
            let r = rotation_matrix(&mut rng);
            let rotated = apply_rotation(&rows, &r);
            let a = singular_values(&rows).unwrap();
            let b = singular_values(&rotated).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() <= 1e-9 * x.max(1.0), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn pose_block_scales_linearly() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let rows = random_matrix(&mut rng, 21);
            let c: f64 = rng.gen_range(0.0..3.0);
            let scaled: Vec<[f64; 3]> = rows
                .iter()
                .map(|r| [c * r[0], c * r[1], c * r[2]])
                .collect();
            let a = singular_values(&centered(&rows)).unwrap();
            let b = singular_values(&centered(&scaled)).unwrap();
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((y - c * x).abs() <= 1e-9 * (c * x).max(1.0), "{y} vs {}", c * x);
            }
        }
    }

    fn frame_from_rows(rows: Vec<[f64; 3]>, t: usize) -> KeypointFrame {
        KeypointFrame::new(vec![HandMatrix::new(rows)], t)
    }

    #[test]
    fn first_frame_has_zero_displacement_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let frame = frame_from_rows(random_matrix(&mut rng, 21), 0);
        let fv = frame_features(&frame, None, 12).unwrap();
        assert_eq!(&fv.values[3..6], &[0.0, 0.0, 0.0]);
        // One-handed input pads the second hand's slots with zeros.
        assert_eq!(&fv.values[6..12], &[0.0; 6]);
    }

    #[test]
    fn identical_frames_have_zero_displacement() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows = random_matrix(&mut rng, 21);
        let a = frame_from_rows(rows.clone(), 0);
        let b = frame_from_rows(rows, 1);
        let fv = frame_features(&b, Some(&a), 12).unwrap();
        assert_eq!(&fv.values[3..6], &[0.0, 0.0, 0.0]);
        let first = frame_features(&a, None, 12).unwrap();
        assert_eq!(&fv.values[..3], &first.values[..3]);
    }

    #[test]
    fn global_rotation_leaves_pose_block_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows = random_matrix(&mut rng, 21);
        let r = rotation_matrix(&mut rng);
        let rotated = apply_rotation(&rows, &r);
        let a = frame_features(&frame_from_rows(rows, 0), None, 12).unwrap();
        let b = frame_features(&frame_from_rows(rotated, 0), None, 12).unwrap();
        for (x, y) in a.values[..3].iter().zip(b.values[..3].iter()) {
            assert!((x - y).abs() <= 1e-9 * x.max(1.0));
        }
    }

    #[test]
    fn mismatched_hand_counts_rejected() {
        let one = KeypointFrame::new(vec![HandMatrix::new(vec![[0.0; 3]; 21])], 0);
        let two = KeypointFrame::new(
            vec![
                HandMatrix::new(vec![[0.0; 3]; 21]),
                HandMatrix::new(vec![[0.0; 3]; 21]),
            ],
            1,
        );
        assert!(frame_features(&two, Some(&one), 12).is_err());
    }

    #[test]
    fn extract_window_bounds() {
        let feats: Vec<FeatureVector> = (0..100)
            .map(|i| FeatureVector {
                values: vec![i as f64],
                frame_index: i,
            })
            .collect();
        let w = extract_window(&feats, 0, 50).unwrap();
        assert_eq!(w.len(), 50);
        assert_eq!(w.start_frame, 0);
        let w = extract_window(&feats, 50, 50).unwrap();
        assert_eq!(w.features[0].frame_index, 50);
        assert!(extract_window(&feats[..49], 0, 50).is_err());
    }
}
