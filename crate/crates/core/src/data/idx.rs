//! Reader for the IDX files MNIST ships in.

use std::path::Path;

use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 2051;
const LABELS_MAGIC: u32 = 2049;

/// Side of an MNIST image.
pub const SIDE: usize = 28;

/// A 28×28 image, row-major, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn new(pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != SIDE * SIDE {
            return Err(Error::Data(format!(
                "image has {} pixels, expected {}",
                pixels.len(),
                SIDE * SIDE
            )));
        }
        Ok(Self { pixels })
    }

    pub fn filled(value: f64) -> Self {
        Self {
            pixels: vec![value; SIDE * SIDE],
        }
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * SIDE + col]
    }
}

/// Loads paired image and label files.
pub fn load_mnist_idx(images: &Path, labels: &Path) -> Result<Vec<(Image, u8)>> {
    let image_bytes = std::fs::read(images).map_err(|e| Error::io(images, e))?;
    let label_bytes = std::fs::read(labels).map_err(|e| Error::io(labels, e))?;
    let imgs =
        parse_images(&image_bytes).map_err(|msg| Error::Data(format!("{}: {msg}", images.display())))?;
    let labs =
        parse_labels(&label_bytes).map_err(|msg| Error::Data(format!("{}: {msg}", labels.display())))?;
    if imgs.len() != labs.len() {
        return Err(Error::Data(format!(
            "{} images but {} labels",
            imgs.len(),
            labs.len()
        )));
    }
    Ok(imgs.into_iter().zip(labs).collect())
}

fn read_u32(bytes: &[u8], at: usize) -> std::result::Result<u32, String> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| "truncated header".to_string())
}

pub(crate) fn parse_images(bytes: &[u8]) -> std::result::Result<Vec<Image>, String> {
    let magic = read_u32(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(format!("bad magic number {magic}, expected {IMAGES_MAGIC}"));
    }
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    if rows != SIDE || cols != SIDE {
        return Err(format!("images are {rows}x{cols}, expected {SIDE}x{SIDE}"));
    }
    let payload = &bytes[16..];
    let size = rows * cols;
    if payload.len() != count * size {
        return Err(format!(
            "header announces {count} images but payload holds {} bytes",
            payload.len()
        ));
    }
    Ok(payload
        .chunks_exact(size)
        .map(|chunk| Image {
            pixels: chunk.iter().map(|&b| b as f64 / 255.0).collect(),
        })
        .collect())
}

pub(crate) fn parse_labels(bytes: &[u8]) -> std::result::Result<Vec<u8>, String> {
    let magic = read_u32(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(format!("bad magic number {magic}, expected {LABELS_MAGIC}"));
    }
    let count = read_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() != count {
        return Err(format!(
            "header announces {count} labels but payload holds {} bytes",
            payload.len()
        ));
    }
    Ok(payload.to_vec())
}

/// Encodes images and labels as IDX byte streams; intensities are rounded
/// back to bytes.
pub fn encode_idx(samples: &[(Image, u8)]) -> (Vec<u8>, Vec<u8>) {
    let mut images = Vec::with_capacity(16 + samples.len() * SIDE * SIDE);
    images.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    images.extend_from_slice(&(samples.len() as u32).to_be_bytes());
    images.extend_from_slice(&(SIDE as u32).to_be_bytes());
    images.extend_from_slice(&(SIDE as u32).to_be_bytes());
    let mut labels = Vec::with_capacity(8 + samples.len());
    labels.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    labels.extend_from_slice(&(samples.len() as u32).to_be_bytes());
    for (img, label) in samples {
        images.extend(
            img.pixels
                .iter()
                .map(|&x| (x * 255.0).round().clamp(0.0, 255.0) as u8),
        );
        labels.push(*label);
    }
    (images, labels)
}
