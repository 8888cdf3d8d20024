//! Dataset manifest: a key-value text file naming the class inventory and the
//! clip files. Labels are stored 0-based.
//!
//! ```text
//! # signseg dataset manifest
//! format_version 1
//! num_classes 3
//! hands_per_frame 2
//! class 0 wave
//! class 1 point
//! class 2 fist
//! clip clips/c000_s000.ksl 0 47
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::types::SignClip;

use super::keypoints;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct ClipEntry {
    pub path: String,
    pub label: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub num_classes: usize,
    pub hands_per_frame: usize,
    pub class_names: Vec<String>,
    pub clips: Vec<ClipEntry>,
}

impl DatasetManifest {
    pub fn to_text(&self) -> String {
        let mut out = String::from("# signseg dataset manifest\n");
        let _ = writeln!(out, "format_version {}", self.format_version);
        let _ = writeln!(out, "num_classes {}", self.num_classes);
        let _ = writeln!(out, "hands_per_frame {}", self.hands_per_frame);
        for (i, name) in self.class_names.iter().enumerate() {
            let _ = writeln!(out, "class {i} {name}");
        }
        for clip in &self.clips {
            let _ = writeln!(out, "clip {} {} {}", clip.path, clip.label, clip.length);
        }
        out
    }

    pub fn parse(text: &str, path: &str) -> Result<DatasetManifest> {
        let mut format_version = None;
        let mut num_classes = None;
        let mut hands_per_frame = None;
        let mut class_names: Vec<Option<String>> = Vec::new();
        let mut clips = Vec::new();

        for (lineno, line) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let err = |msg: String| Error::Parse {
                path: path.to_string(),
                line: lineno,
                msg,
            };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_ascii_whitespace();
            let key = parts.next().unwrap();
            match key {
                "format_version" => {
                    let v: u32 = parts
                        .next()
                        .ok_or_else(|| err("missing value".into()))?
                        .parse()
                        .map_err(|_| err("format_version is not an integer".into()))?;
                    if v != MANIFEST_VERSION {
                        return Err(err(format!(
                            "unsupported manifest version {v} (expected {MANIFEST_VERSION})"
                        )));
                    }
                    format_version = Some(v);
                }
                "num_classes" => {
                    num_classes = Some(
                        parts
                            .next()
                            .ok_or_else(|| err("missing value".into()))?
                            .parse::<usize>()
                            .map_err(|_| err("num_classes is not an integer".into()))?,
                    );
                }
                "hands_per_frame" => {
                    let h: usize = parts
                        .next()
                        .ok_or_else(|| err("missing value".into()))?
                        .parse()
                        .map_err(|_| err("hands_per_frame is not an integer".into()))?;
                    if h != 1 && h != 2 {
                        return Err(err(format!("hands_per_frame must be 1 or 2, got {h}")));
                    }
                    hands_per_frame = Some(h);
                }
                "class" => {
                    let idx: usize = parts
                        .next()
                        .ok_or_else(|| err("missing class index".into()))?
                        .parse()
                        .map_err(|_| err("class index is not an integer".into()))?;
                    let name = parts
                        .next()
                        .ok_or_else(|| err("missing class name".into()))?
                        .to_string();
                    if class_names.len() <= idx {
                        class_names.resize(idx + 1, None);
                    }
                    if class_names[idx].is_some() {
                        return Err(err(format!("duplicate class index {idx}")));
                    }
                    class_names[idx] = Some(name);
                }
                "clip" => {
                    let file = parts
                        .next()
                        .ok_or_else(|| err("missing clip path".into()))?
                        .to_string();
                    let label: usize = parts
                        .next()
                        .ok_or_else(|| err("missing clip label".into()))?
                        .parse()
                        .map_err(|_| err("clip label is not an integer".into()))?;
                    let length: usize = parts
                        .next()
                        .ok_or_else(|| err("missing clip length".into()))?
                        .parse()
                        .map_err(|_| err("clip length is not an integer".into()))?;
                    clips.push(ClipEntry {
                        path: file,
                        label,
                        length,
                    });
                }
                other => {
                    return Err(err(format!("unknown key '{other}'")));
                }
            }
        }

        let format_version = format_version.ok_or_else(|| Error::Parse {
            path: path.to_string(),
            line: 0,
            msg: "missing format_version".into(),
        })?;
        let num_classes = num_classes.ok_or_else(|| Error::Parse {
            path: path.to_string(),
            line: 0,
            msg: "missing num_classes".into(),
        })?;
        let hands_per_frame = hands_per_frame.ok_or_else(|| Error::Parse {
            path: path.to_string(),
            line: 0,
            msg: "missing hands_per_frame".into(),
        })?;
        let class_names: Vec<String> = class_names
            .into_iter()
            .enumerate()
            .map(|(i, n)| {
                n.ok_or_else(|| Error::Parse {
                    path: path.to_string(),
                    line: 0,
                    msg: format!("class {i} has no name entry"),
                })
            })
            .collect::<Result<_>>()?;
        if class_names.len() != num_classes {
            return Err(Error::Parse {
                path: path.to_string(),
                line: 0,
                msg: format!(
                    "{} class entries for num_classes {num_classes}",
                    class_names.len()
                ),
            });
        }
        for clip in &clips {
            if clip.label >= num_classes {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line: 0,
                    msg: format!("clip {} label {} out of range", clip.path, clip.label),
                });
            }
        }
        Ok(DatasetManifest {
            format_version,
            num_classes,
            hands_per_frame,
            class_names,
            clips,
        })
    }
}

/// Write a clip set as a dataset directory: `manifest.txt` plus one keypoint
/// file per clip under `clips/`.
pub fn write_dataset(
    dir: &Path,
    clips: &[SignClip],
    num_classes: usize,
    class_names: &[String],
    hands_per_frame: usize,
) -> Result<DatasetManifest> {
    fs::create_dir_all(dir.join("clips"))?;
    let mut entries = Vec::with_capacity(clips.len());
    let mut per_class_counter = vec![0usize; num_classes];
    for clip in clips {
        let idx = per_class_counter[clip.label];
        per_class_counter[clip.label] += 1;
        let rel = format!("clips/c{:03}_s{:03}.ksl", clip.label, idx);
        fs::write(dir.join(&rel), keypoints::format_frames(&clip.frames))?;
        entries.push(ClipEntry {
            path: rel,
            label: clip.label,
            length: clip.len(),
        });
    }
    let manifest = DatasetManifest {
        format_version: MANIFEST_VERSION,
        num_classes,
        hands_per_frame,
        class_names: class_names.to_vec(),
        clips: entries,
    };
    fs::write(dir.join(MANIFEST_FILE), manifest.to_text())?;
    Ok(manifest)
}

/// Load a dataset directory: parse the manifest, then every listed clip.
pub fn load_dataset(dir: &Path, keypoints_per_hand: usize) -> Result<(DatasetManifest, Vec<SignClip>)> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path)?;
    let manifest = DatasetManifest::parse(&text, &manifest_path.display().to_string())?;

    let mut clips = Vec::with_capacity(manifest.clips.len());
    for entry in &manifest.clips {
        let clip_path: PathBuf = dir.join(&entry.path);
        let body = fs::read_to_string(&clip_path)?;
        let frames = keypoints::parse_frames(&body, &entry.path, keypoints_per_hand)?;
        if frames.len() != entry.length {
            return Err(Error::Parse {
                path: entry.path.clone(),
                line: 0,
                msg: format!(
                    "manifest says {} frames but file has {}",
                    entry.length,
                    frames.len()
                ),
            });
        }
        if frames[0].hand_count() != manifest.hands_per_frame {
            return Err(Error::HandCountMismatch {
                expected: manifest.hands_per_frame,
                got: frames[0].hand_count(),
            });
        }
        clips.push(SignClip::new(frames, entry.label, entry.path.clone()));
    }
    Ok((manifest, clips))
}

/// Default class-name table for synthetic data.
pub fn synthetic_class_names(num_classes: usize) -> Vec<String> {
    (0..num_classes).map(|k| format!("sign{k:03}")).collect()
}
