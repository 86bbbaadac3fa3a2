//! Reader for the big-endian IDX container used by MNIST and Fashion-MNIST.

use std::fs;
use std::path::Path;

use crate::dataio::{LabeledDataset, Provenance};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{what}: truncated header")))
}

/// Parsed image file header plus the raw pixel payload.
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

pub fn parse_images(bytes: Vec<u8>, what: &str) -> Result<IdxImages> {
    let magic = be_u32(&bytes, 0, what)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "{what}: magic 0x{magic:08x}, expected 0x{IMAGES_MAGIC:08x}"
        )));
    }
    let count = be_u32(&bytes, 4, what)? as usize;
    let rows = be_u32(&bytes, 8, what)? as usize;
    let cols = be_u32(&bytes, 12, what)? as usize;
    let expected = 16 + count * rows * cols;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{what}: {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let mut pixels = bytes;
    pixels.drain(..16);
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_labels(bytes: &[u8], what: &str) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0, what)?;
    if magic != LABELS_MAGIC {
        return Err(Error::Format(format!(
            "{what}: magic 0x{magic:08x}, expected 0x{LABELS_MAGIC:08x}"
        )));
    }
    let count = be_u32(bytes, 4, what)? as usize;
    if bytes.len() != 8 + count {
        return Err(Error::Format(format!(
            "{what}: {} bytes, header implies {}",
            bytes.len(),
            8 + count
        )));
    }
    Ok(bytes[8..].to_vec())
}

/// Loads an image/label file pair. Pixels are divided by 255 and each image
/// is flattened row-major into one column.
pub fn read_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<LabeledDataset> {
    read_idx_filtered(images, labels, |_| true)
}

/// Like [`read_idx`] but only materializes samples whose label passes
/// `keep`; the full training set as `f64` is several hundred megabytes.
pub fn read_idx_filtered(
    images: impl AsRef<Path>,
    labels: impl AsRef<Path>,
    keep: impl Fn(&str) -> bool,
) -> Result<LabeledDataset> {
    let (images, labels) = (images.as_ref(), labels.as_ref());
    let img = parse_images(fs::read(images)?, &images.display().to_string())?;
    let lab = parse_labels(&fs::read(labels)?, &labels.display().to_string())?;
    if img.count != lab.len() {
        return Err(Error::Consistency(format!(
            "{} images but {} labels",
            img.count,
            lab.len()
        )));
    }
    let d = img.rows * img.cols;
    let mut data = Vec::new();
    let mut kept = Vec::new();
    for (i, &l) in lab.iter().enumerate() {
        let label = l.to_string();
        if !keep(&label) {
            continue;
        }
        data.extend(img.pixels[i * d..(i + 1) * d].iter().map(|&b| f64::from(b) / 255.0));
        kept.push(label);
    }
    let features = DenseMatrix::new(d, kept.len(), data)?;
    let provenance = Provenance {
        source: images.display().to_string(),
        pixel_scale: Some(255.0),
        ..Provenance::default()
    };
    LabeledDataset::new(features, kept, provenance)
}

/// Encodes images (one per column, values in bytes) as an IDX image file.
/// Used to build fixtures.
pub fn encode_images(rows: usize, cols: usize, images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    for im in images {
        out.extend_from_slice(im);
    }
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
