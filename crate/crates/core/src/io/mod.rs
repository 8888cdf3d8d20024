//! File formats: dataset manifests, line-delimited keypoint files, the
//! probability-dump CSV, and report rendering.

pub mod keypoints;
pub mod manifest;
pub mod probdump;
pub mod reports;
