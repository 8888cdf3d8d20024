//! Seeded synthetic keypoint dataset generator.
//!
//! Each class gets a prototype: a smooth random trajectory per keypoint
//! (low-order polynomials in normalized time) with a class-specific spatial
//! extent and motion amplitude, so classes separate in singular-value feature
//! space rather than in raw coordinates. Samples resample the prototype to a
//! random length and apply Gaussian coordinate noise, a small global
//! rotation, and a global translation — all transformations the feature
//! extractor is expected to absorb.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::features::sequence_features;
use crate::preprocess::concat_clips;
use crate::types::{ClassId, ContinuousStream, HandMatrix, KeypointFrame, SignClip};

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub samples_per_class: usize,
    /// Inclusive frame-count range for generated clips.
    pub length_range: (usize, usize),
    pub noise_sigma: f64,
    pub rotation_jitter_deg: f64,
    pub hands: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            num_classes: 20,
            samples_per_class: 30,
            length_range: (30, 80),
            noise_sigma: 0.01,
            rotation_jitter_deg: 5.0,
            hands: 2,
            seed: 7,
        }
    }
}

impl SynthSpec {
    /// Hard invariants plus advisory warnings (short clips relative to the
    /// decode window are allowed but flagged).
    pub fn validate(&self, window_size: usize) -> Result<Vec<String>> {
        if self.num_classes < 2 {
            return Err(Error::Config("num_classes must be >= 2".into()));
        }
        if self.samples_per_class < 1 {
            return Err(Error::Config("samples_per_class must be >= 1".into()));
        }
        if self.length_range.0 < 2 || self.length_range.0 > self.length_range.1 {
            return Err(Error::Config(format!(
                "invalid length range {}..{}",
                self.length_range.0, self.length_range.1
            )));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::Config("noise_sigma must be >= 0".into()));
        }
        if self.hands != 1 && self.hands != 2 {
            return Err(Error::Config("hands must be 1 or 2".into()));
        }
        let mut warnings = Vec::new();
        if self.length_range.0 * 2 < window_size {
            warnings.push(format!(
                "minimum clip length {} is below half the {window_size}-frame decode window; \
                 short signs may be hard to localize",
                self.length_range.0
            ));
        }
        Ok(warnings)
    }
}

const KEYPOINTS: usize = 21;
const FEATURE_DIM: usize = 12;
const SEPARATION_FACTOR: f64 = 5.0;
const MAX_ATTEMPTS: usize = 16;

fn mix(seed: u64, parts: &[u64]) -> u64 {
    // splitmix64 over the concatenated words.
    let mut state = seed;
    for &p in parts {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(p);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        state = z ^ (z >> 31);
    }
    state
}

/// Cubic polynomial in normalized time.
#[derive(Debug, Clone, Copy)]
struct Poly3 {
    c: [f64; 4],
}

impl Poly3 {
    fn random(rng: &mut ChaCha8Rng, amplitude: f64) -> Self {
        let mut c = [0.0; 4];
        for v in &mut c {
            *v = rng.gen_range(-amplitude..amplitude);
        }
        Poly3 { c }
    }

    fn eval(&self, t: f64) -> f64 {
        ((self.c[3] * t + self.c[2]) * t + self.c[1]) * t + self.c[0]
    }
}

/// One hand's prototype. Every sign starts and ends at a shared rest pose;
/// an envelope `4t(1-t)` morphs the hand into the class-specific cloud and
/// carries it along the class trajectory mid-clip. Class clouds are built
/// with prescribed principal radii, which directly set the pose singular
/// values, so drawing radii independently per class spreads class signatures
/// across feature space instead of along one scale axis. The shared rest
/// pose keeps clip splices continuous and makes boundary windows look like
/// between-sign filler rather than like some third sign.
#[derive(Debug, Clone)]
struct HandPrototype {
    rest: Vec<[f64; 3]>,
    /// Class cloud minus rest cloud, per keypoint.
    delta: Vec<[f64; 3]>,
    path: [Poly3; 3],
    wobble: Vec<[Poly3; 3]>,
}

impl HandPrototype {
    fn eval(&self, t: f64) -> Vec<[f64; 3]> {
        // Plateau bump: rest at the ends, flat class expression through the
        // middle, so any decode window landing in a sign's core sees a
        // quasi-stationary feature stream.
        let u = 2.0 * t - 1.0;
        let env = 1.0 - u * u * u * u;
        let cx = env * self.path[0].eval(t);
        let cy = env * self.path[1].eval(t);
        let cz = env * self.path[2].eval(t);
        (0..KEYPOINTS)
            .map(|j| {
                let r = &self.rest[j];
                let d = &self.delta[j];
                let w = &self.wobble[j];
                [
                    cx + r[0] + env * (d[0] + w[0].eval(t)),
                    cy + r[1] + env * (d[1] + w[1].eval(t)),
                    cz + r[2] + env * (d[2] + w[2].eval(t)),
                ]
            })
            .collect()
    }
}

/// Three zero-mean orthonormal 21-vectors by Gram-Schmidt over random draws.
fn orthonormal_basis(rng: &mut ChaCha8Rng) -> [Vec<f64>; 3] {
    let mut basis: [Vec<f64>; 3] = Default::default();
    for i in 0..3 {
        loop {
            let mut v: Vec<f64> = (0..KEYPOINTS).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = v.iter().sum::<f64>() / KEYPOINTS as f64;
            v.iter_mut().for_each(|x| *x -= mean);
            for prev in basis.iter().take(i) {
                let dot: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(prev).for_each(|(a, b)| *a -= dot * b);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                v.iter_mut().for_each(|x| *x /= norm);
                basis[i] = v;
                break;
            }
        }
    }
    basis
}

/// Point cloud whose centered matrix has exactly the given singular values.
fn cloud_with_radii(rng: &mut ChaCha8Rng, radii: [f64; 3]) -> Vec<[f64; 3]> {
    let basis = orthonormal_basis(rng);
    (0..KEYPOINTS)
        .map(|j| {
            [
                radii[0] * basis[0][j],
                radii[1] * basis[1][j],
                radii[2] * basis[2][j],
            ]
        })
        .collect()
}

#[derive(Debug, Clone)]
struct ClassPrototype {
    hands: Vec<HandPrototype>,
}

impl ClassPrototype {
    fn frame(&self, t: f64, index: usize) -> KeypointFrame {
        KeypointFrame::new(
            self.hands
                .iter()
                .map(|h| HandMatrix::new(h.eval(t)))
                .collect(),
            index,
        )
    }

    fn render(&self, len: usize) -> Vec<KeypointFrame> {
        (0..len)
            .map(|i| {
                let t = if len > 1 { i as f64 / (len - 1) as f64 } else { 0.0 };
                self.frame(t, i)
            })
            .collect()
    }
}

/// Rest radii sit mid-range so class deltas mix signs axis by axis; all-
/// positive deltas would cluster the rise/fall rays and put other classes'
/// poses on them.
const REST_RADII: [f64; 3] = [1.0, 0.55, 0.25];

/// Shared rest pose: the same relaxed hand every sign departs from and
/// returns to, offset left/right per hand.
fn build_rest(seed: u64, attempt: usize, hands: usize) -> Vec<Vec<[f64; 3]>> {
    (0..hands)
        .map(|h| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix(seed, &[attempt as u64, 0xE5, h as u64]));
            let offset = if h == 0 { -1.0 } else { 1.0 };
            cloud_with_radii(&mut rng, REST_RADII)
                .into_iter()
                .map(|p| [p[0] + offset, p[1], p[2]])
                .collect()
        })
        .collect()
}

fn build_prototype(rng: &mut ChaCha8Rng, rest: &[Vec<[f64; 3]>]) -> ClassPrototype {
    let hands = rest
        .iter()
        .map(|rest_cloud| {
            // Class identity: principal radii of the expressed cloud, its
            // orientation, and the mid-clip trajectory.
            let r1 = rng.gen_range(0.5..2.0);
            let r2 = r1 * rng.gen_range(0.3..0.85);
            let r3 = r2 * rng.gen_range(0.2..0.7);
            let cloud = cloud_with_radii(rng, [r1, r2, r3]);
            let delta = cloud
                .iter()
                .zip(rest_cloud)
                .map(|(c, r)| [c[0] - r[0], c[1] - r[1], c[2] - r[2]])
                .collect();
            let path = [
                Poly3::random(rng, 0.8),
                Poly3::random(rng, 0.8),
                Poly3::random(rng, 0.4),
            ];
            let wobble = (0..KEYPOINTS)
                .map(|_| {
                    [
                        Poly3::random(rng, 0.06),
                        Poly3::random(rng, 0.06),
                        Poly3::random(rng, 0.06),
                    ]
                })
                .collect();
            HandPrototype {
                rest: rest_cloud.clone(),
                delta,
                path,
                wobble,
            }
        })
        .collect();
    ClassPrototype { hands }
}

/// Pose singular values along a prototype's rise/fall: SVs of the centered
/// blend `rest + alpha * delta`, concatenated over hands.
fn transition_pose_signature(proto: &ClassPrototype, alpha: f64) -> Vec<f64> {
    let mut sig = Vec::with_capacity(proto.hands.len() * 3);
    for hand in &proto.hands {
        let blended: Vec<[f64; 3]> = hand
            .rest
            .iter()
            .zip(&hand.delta)
            .map(|(r, d)| {
                [
                    r[0] + alpha * d[0],
                    r[1] + alpha * d[1],
                    r[2] + alpha * d[2],
                ]
            })
            .collect();
        let centered: Vec<[f64; 3]> = {
            let n = blended.len() as f64;
            let mut c = [0.0; 3];
            for p in &blended {
                for (acc, v) in c.iter_mut().zip(p) {
                    *acc += v / n;
                }
            }
            blended
                .iter()
                .map(|p| [p[0] - c[0], p[1] - c[1], p[2] - c[2]])
                .collect()
        };
        sig.extend_from_slice(&crate::features::singular_values(&centered).expect("finite"));
    }
    sig
}

/// A class is admissible when its expressed pose keeps clear of every other
/// class's whole rise/fall path (and vice versa), so windows ending inside a
/// transition cannot look like some third sign's plateau.
const TRANSITION_MARGIN: f64 = 0.6;
const TRANSITION_GRID: usize = 9;

/// How far the candidate's plateau stays from rest and from every accepted
/// class's transition path (and their plateaus from the candidate's path).
fn transition_clearance(candidate: &ClassPrototype, accepted: &[ClassPrototype]) -> f64 {
    let alphas: Vec<f64> = (0..TRANSITION_GRID)
        .map(|i| i as f64 / (TRANSITION_GRID - 1) as f64)
        .collect();
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let cand_plateau = transition_pose_signature(candidate, 1.0);
    // Against rest itself (alpha 0 of any path).
    let mut clearance = dist(&cand_plateau, &transition_pose_signature(candidate, 0.0));
    for other in accepted {
        let other_plateau = transition_pose_signature(other, 1.0);
        for &alpha in &alphas {
            clearance =
                clearance.min(dist(&cand_plateau, &transition_pose_signature(other, alpha)));
            clearance =
                clearance.min(dist(&other_plateau, &transition_pose_signature(candidate, alpha)));
        }
    }
    clearance
}

fn rotation_from_angles(ax: f64, ay: f64, az: f64) -> [[f64; 3]; 3] {
    let (sx, cx) = ax.sin_cos();
    let (sy, cy) = ay.sin_cos();
    let (sz, cz) = az.sin_cos();
    // Rz * Ry * Rx, row-major.
    [
        [cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx],
        [sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx],
        [-sy, cy * sx, cy * cx],
    ]
}

fn quantize(v: f64) -> f64 {
    // Keep coordinates exactly representable in the 9-decimal file format so
    // in-memory data and a disk round trip are identical.
    (v * 1e9).round() / 1e9
}

/// Mean feature vector of a prototype rendered at the canonical 50-frame
/// length; the separation margin is measured in this space.
fn prototype_signature(proto: &ClassPrototype) -> Result<Vec<f64>> {
    let frames = proto.render(50);
    let feats = sequence_features(&frames, FEATURE_DIM)?;
    let mut mean = vec![0.0; FEATURE_DIM];
    for f in &feats {
        for (m, v) in mean.iter_mut().zip(&f.values) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= feats.len() as f64;
    }
    Ok(mean)
}

fn min_pairwise_distance(signatures: &[Vec<f64>]) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..signatures.len() {
        for j in i + 1..signatures.len() {
            let d = signatures[i]
                .iter()
                .zip(&signatures[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            min = min.min(d);
        }
    }
    min
}

const SALTS_PER_CLASS: usize = 64;

fn build_separated_prototypes(spec: &SynthSpec) -> Result<Vec<ClassPrototype>> {
    let required = SEPARATION_FACTOR * spec.noise_sigma;
    'attempt: for attempt in 0..MAX_ATTEMPTS {
        let rest = build_rest(spec.seed, attempt, spec.hands);
        let mut prototypes: Vec<ClassPrototype> = Vec::with_capacity(spec.num_classes);
        for k in 0..spec.num_classes {
            // Keep the best-clearing candidate so classes spread out instead
            // of packing just past the margin.
            let mut best: Option<(f64, ClassPrototype)> = None;
            for salt in 0..SALTS_PER_CLASS {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(
                    spec.seed,
                    &[attempt as u64, 1, k as u64, salt as u64],
                ));
                let candidate = build_prototype(&mut rng, &rest);
                let clearance = transition_clearance(&candidate, &prototypes);
                if best.as_ref().is_none_or(|(c, _)| clearance > *c) {
                    best = Some((clearance, candidate));
                }
            }
            let (clearance, winner) = best.expect("salts > 0");
            if clearance < TRANSITION_MARGIN.max(required) {
                continue 'attempt;
            }
            prototypes.push(winner);
        }

        let signatures: Result<Vec<Vec<f64>>> =
            prototypes.iter().map(prototype_signature).collect();
        if min_pairwise_distance(&signatures?) >= required {
            return Ok(prototypes);
        }
    }
    Err(Error::SeparationFailure {
        attempts: MAX_ATTEMPTS,
    })
}

/// Generate the full labeled clip set. Deterministic: the same spec always
/// yields bit-identical clips.
pub fn generate(spec: &SynthSpec) -> Result<Vec<SignClip>> {
    spec.validate(usize::MAX)?;
    let prototypes = build_separated_prototypes(spec)?;
    let jitter_rad = spec.rotation_jitter_deg.to_radians();

    let mut clips = Vec::with_capacity(spec.num_classes * spec.samples_per_class);
    for (k, proto) in prototypes.iter().enumerate() {
        for s in 0..spec.samples_per_class {
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix(spec.seed, &[2, k as u64, s as u64]));
            let len = rng.gen_range(spec.length_range.0..=spec.length_range.1);
            let rot = rotation_from_angles(
                rng.gen_range(-jitter_rad..=jitter_rad),
                rng.gen_range(-jitter_rad..=jitter_rad),
                rng.gen_range(-jitter_rad..=jitter_rad),
            );
            // Small enough that the rest-pose discontinuity at a clip splice
            // stays comparable to ordinary frame-to-frame motion.
            let shift = [
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
                rng.gen_range(-0.1..0.1),
            ];
            let noise = Normal::new(0.0, spec.noise_sigma).expect("sigma validated");

            let frames = proto
                .render(len)
                .into_iter()
                .map(|frame| {
                    let hands = frame
                        .hands
                        .iter()
                        .map(|hand| {
                            let rows = hand
                                .rows()
                                .iter()
                                .map(|p| {
                                    let noisy = [
                                        p[0] + noise.sample(&mut rng),
                                        p[1] + noise.sample(&mut rng),
                                        p[2] + noise.sample(&mut rng),
                                    ];
                                    let mut out = [0.0; 3];
                                    for (i, o) in out.iter_mut().enumerate() {
                                        *o = quantize(
                                            rot[i][0] * noisy[0]
                                                + rot[i][1] * noisy[1]
                                                + rot[i][2] * noisy[2]
                                                + shift[i],
                                        );
                                    }
                                    out
                                })
                                .collect();
                            HandMatrix::new(rows)
                        })
                        .collect();
                    KeypointFrame::new(hands, frame.timestamp_index)
                })
                .collect();
            clips.push(SignClip::new(
                frames,
                k as ClassId,
                format!("synth/c{k:03}/s{s:03}"),
            ));
        }
    }
    Ok(clips)
}

/// Build evaluation streams: each stream concatenates one held-out sample of
/// every class in a seeded shuffled order, rotating through the held-out pool
/// so streams differ when spares exist.
pub fn build_continuous_suite(
    held_out: &[SignClip],
    num_classes: usize,
    streams_n: usize,
    seed: u64,
) -> Result<Vec<ContinuousStream>> {
    let mut by_class: BTreeMap<ClassId, Vec<&SignClip>> = BTreeMap::new();
    for clip in held_out {
        by_class.entry(clip.label).or_default().push(clip);
    }
    for label in 0..num_classes {
        if !by_class.contains_key(&label) {
            return Err(Error::InsufficientHeldOut { label });
        }
    }

    let mut streams = Vec::with_capacity(streams_n);
    for i in 0..streams_n {
        let mut order: Vec<ClassId> = (0..num_classes).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, &[3, i as u64]));
        order.shuffle(&mut rng);
        let picks: Vec<SignClip> = order
            .iter()
            .map(|&label| {
                let pool = &by_class[&label];
                pool[i % pool.len()].clone()
            })
            .collect();
        streams.push(concat_clips(&picks)?);
    }
    Ok(streams)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SynthSpec {
        SynthSpec {
            num_classes: 4,
            samples_per_class: 3,
            length_range: (20, 40),
            noise_sigma: 0.01,
            rotation_jitter_deg: 5.0,
            hands: 2,
            seed: 7,
        }
    }

    #[test]
    fn generation_is_bit_identical_across_runs() {
        let spec = small_spec();
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
    }

    #[test]
    fn lengths_stay_in_range_and_labels_are_dense() {
        let spec = small_spec();
        let clips = generate(&spec).unwrap();
        for clip in &clips {
            assert!(clip.len() >= 20 && clip.len() <= 40);
            assert!(clip.label < 4);
            assert_eq!(clip.hand_count(), 2);
        }
    }

    #[test]
    fn noise_free_samples_are_resamplings_of_one_prototype() {
        // With noise and jitter off and a fixed length, every sample of a
        // class renders the prototype at the same time grid; only the global
        // translation differs.
        let spec = SynthSpec {
            noise_sigma: 0.0,
            rotation_jitter_deg: 0.0,
            length_range: (30, 30),
            ..small_spec()
        };
        let clips = generate(&spec).unwrap();
        let same: Vec<&SignClip> = clips.iter().filter(|c| c.label == 0).collect();
        let (a, b) = (same[0], same[1]);
        let offset = [
            a.frames[0].hands[0].rows()[0][0] - b.frames[0].hands[0].rows()[0][0],
            a.frames[0].hands[0].rows()[0][1] - b.frames[0].hands[0].rows()[0][1],
            a.frames[0].hands[0].rows()[0][2] - b.frames[0].hands[0].rows()[0][2],
        ];
        for (fa, fb) in a.frames.iter().zip(&b.frames) {
            for (ha, hb) in fa.hands.iter().zip(&fb.hands) {
                for (ra, rb) in ha.rows().iter().zip(hb.rows()) {
                    for c in 0..3 {
                        // 9-decimal quantization leaves a couple of quanta.
                        assert!((ra[c] - rb[c] - offset[c]).abs() < 5e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn one_handed_spec_generates_one_hand() {
        let spec = SynthSpec {
            hands: 1,
            ..small_spec()
        };
        let clips = generate(&spec).unwrap();
        assert!(clips.iter().all(|c| c.hand_count() == 1));
    }

    #[test]
    fn suite_streams_cover_every_class_once() {
        let spec = small_spec();
        let clips = generate(&spec).unwrap();
        let streams = build_continuous_suite(&clips, 4, 3, 99).unwrap();
        assert_eq!(streams.len(), 3);
        for stream in &streams {
            let gt = stream.ground_truth.as_ref().unwrap();
            assert_eq!(gt.len(), 4);
            let mut labels: Vec<ClassId> = gt.iter().map(|s| s.label).collect();
            labels.sort_unstable();
            assert_eq!(labels, vec![0, 1, 2, 3]);
            assert_eq!(
                stream.len(),
                gt.iter().map(|s| s.end_frame - s.start_frame + 1).sum::<usize>()
            );
        }
    }

    #[test]
    fn suite_requires_every_class() {
        let spec = small_spec();
        let clips: Vec<SignClip> = generate(&spec)
            .unwrap()
            .into_iter()
            .filter(|c| c.label != 2)
            .collect();
        assert!(matches!(
            build_continuous_suite(&clips, 4, 1, 0),
            Err(Error::InsufficientHeldOut { label: 2 })
        ));
    }
}
