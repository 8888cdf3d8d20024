//! Binary model container: magic bytes, format version, config snapshot,
//! kind tag, little-endian f64 parameter blocks, trailing CRC-32 over all
//! preceding bytes.

use std::fs;
use std::path::Path;

use crate::config::Config;
use crate::error::{Error, Result};

use super::centroid::CentroidModel;
use super::lstm::RecurrentModel;
use super::{ModelKind, PredictorModel};

const MAGIC: &[u8; 4] = b"SGSG";
pub const FORMAT_VERSION: u32 = 1;

const KIND_CENTROID: u8 = 0;
const KIND_RECURRENT: u8 = 1;
const CELL_LSTM: u8 = 1;

fn crc32(bytes: &[u8]) -> u32 {
    // CRC-32 (IEEE), reflected, poly 0xEDB88320.
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc ^= b as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xEDB8_8320 & mask);
        }
    }
    !crc
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.buf.len() {
            return Err(Error::CorruptModel("unexpected end of file".into()));
        }
        let out = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn write_config(w: &mut Writer, cfg: &Config) {
    w.u32(cfg.window_size as u32);
    w.u32(cfg.stride as u32);
    w.f64(cfg.threshold);
    w.u32(cfg.num_singular_values as u32);
    w.u32(cfg.keypoints_per_hand as u32);
    w.f64(cfg.learning_rate);
    w.u32(cfg.lr_decay_every as u32);
    w.f64(cfg.lr_decay_factor);
    w.u32(cfg.batch_size as u32);
    w.u32(cfg.max_epochs as u32);
    w.f64(cfg.weight_decay);
    w.f64(cfg.momentum_beta1);
    w.f64(cfg.train_fraction);
    w.u64(cfg.seed);
}

fn read_config(r: &mut Reader<'_>) -> Result<Config> {
    Ok(Config {
        window_size: r.u32()? as usize,
        stride: r.u32()? as usize,
        threshold: r.f64()?,
        num_singular_values: r.u32()? as usize,
        keypoints_per_hand: r.u32()? as usize,
        learning_rate: r.f64()?,
        lr_decay_every: r.u32()? as usize,
        lr_decay_factor: r.f64()?,
        batch_size: r.u32()? as usize,
        max_epochs: r.u32()? as usize,
        weight_decay: r.f64()?,
        momentum_beta1: r.f64()?,
        train_fraction: r.f64()?,
        seed: r.u64()?,
    })
}

/// Serialize a model to bytes (shared by file save and in-memory transport).
pub fn model_to_bytes(model: &PredictorModel) -> Vec<u8> {
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    write_config(&mut w, &model.config);
    match &model.kind {
        ModelKind::Centroid(m) => {
            w.u8(KIND_CENTROID);
            w.u32(m.num_classes() as u32);
            w.u32(m.dim() as u32);
            w.f64(m.temperature);
            for c in &m.centroids {
                for &v in c {
                    w.f64(v);
                }
            }
        }
        ModelKind::Recurrent(m) => {
            w.u8(KIND_RECURRENT);
            w.u32(m.num_classes as u32);
            w.u8(CELL_LSTM);
            w.u32(m.input_dim as u32);
            w.u32(m.hidden_dim as u32);
            for &v in &m.params {
                w.f64(v);
            }
        }
    }
    let checksum = crc32(&w.buf);
    w.u32(checksum);
    w.buf
}

/// Deserialize a model, verifying magic, version, checksum, and parameter
/// finiteness.
pub fn model_from_bytes(bytes: &[u8]) -> Result<PredictorModel> {
    if bytes.len() < MAGIC.len() + 8 {
        return Err(Error::CorruptModel("file too short".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::CorruptModel("bad magic bytes".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    if crc32(body) != stored {
        return Err(Error::CorruptModel("checksum mismatch".into()));
    }

    let mut r = Reader { buf: body, at: 4 };
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            got: version,
            expected: FORMAT_VERSION,
        });
    }
    let config = read_config(&mut r)?;
    let kind_tag = r.u8()?;
    let num_classes = r.u32()? as usize;
    if num_classes < 2 {
        return Err(Error::CorruptModel(format!(
            "num_classes {num_classes} below 2"
        )));
    }

    let kind = match kind_tag {
        KIND_CENTROID => {
            let dim = r.u32()? as usize;
            let temperature = r.f64()?;
            if !temperature.is_finite() || temperature <= 0.0 {
                return Err(Error::CorruptModel("bad temperature".into()));
            }
            let mut centroids = Vec::with_capacity(num_classes);
            for _ in 0..num_classes {
                let mut c = Vec::with_capacity(dim);
                for _ in 0..dim {
                    let v = r.f64()?;
                    if !v.is_finite() {
                        return Err(Error::CorruptModel("non-finite centroid value".into()));
                    }
                    c.push(v);
                }
                centroids.push(c);
            }
            ModelKind::Centroid(CentroidModel {
                centroids,
                temperature,
            })
        }
        KIND_RECURRENT => {
            let cell = r.u8()?;
            if cell != CELL_LSTM {
                return Err(Error::CorruptModel(format!("unknown cell type {cell}")));
            }
            let input_dim = r.u32()? as usize;
            let hidden_dim = r.u32()? as usize;
            let model = RecurrentModel {
                input_dim,
                hidden_dim,
                num_classes,
                params: Vec::new(),
            };
            let total = model.layout().total;
            let mut params = Vec::with_capacity(total);
            for _ in 0..total {
                let v = r.f64()?;
                if !v.is_finite() {
                    return Err(Error::CorruptModel("non-finite parameter".into()));
                }
                params.push(v);
            }
            ModelKind::Recurrent(RecurrentModel { params, ..model })
        }
        other => {
            return Err(Error::CorruptModel(format!("unknown model kind {other}")));
        }
    };
    if r.at != body.len() {
        return Err(Error::CorruptModel("trailing bytes after parameters".into()));
    }
    Ok(PredictorModel { kind, config })
}

pub fn save_model(model: &PredictorModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<PredictorModel> {
    let bytes = fs::read(path)?;
    model_from_bytes(&bytes)
}
