//! IDX (MNIST-style) binary file reading and writing. Big-endian
//! throughout: images carry magic 0x00000803 with dims [n, h, w], labels
//! carry magic 0x00000801 with dims [n], payload is unsigned bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tasks::MnistDataset;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn read_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{}: truncated header", path.display())))
}

/// Loads an image/label IDX pair into an [`MnistDataset`], scaling pixel
/// bytes to [0, 1] by dividing by 255.
pub fn load_mnist_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<MnistDataset> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();

    let img_bytes = fs::read(images_path).map_err(|e| io_err(images_path, e))?;
    let magic = read_u32(&img_bytes, 0, images_path)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::IdxMagic {
            path: images_path.display().to_string(),
            found: magic,
            expected: IMAGES_MAGIC,
        });
    }
    let n = read_u32(&img_bytes, 4, images_path)? as usize;
    let h = read_u32(&img_bytes, 8, images_path)? as usize;
    let w = read_u32(&img_bytes, 12, images_path)? as usize;
    let payload = &img_bytes[16..];
    if payload.len() != n * h * w {
        return Err(Error::Format(format!(
            "{}: expected {} pixel bytes, found {}",
            images_path.display(),
            n * h * w,
            payload.len()
        )));
    }

    let lbl_bytes = fs::read(labels_path).map_err(|e| io_err(labels_path, e))?;
    let magic = read_u32(&lbl_bytes, 0, labels_path)?;
    if magic != LABELS_MAGIC {
        return Err(Error::IdxMagic {
            path: labels_path.display().to_string(),
            found: magic,
            expected: LABELS_MAGIC,
        });
    }
    let n_labels = read_u32(&lbl_bytes, 4, labels_path)? as usize;
    let label_payload = &lbl_bytes[8..];
    if label_payload.len() != n_labels {
        return Err(Error::Format(format!(
            "{}: expected {} label bytes, found {}",
            labels_path.display(),
            n_labels,
            label_payload.len()
        )));
    }
    if n != n_labels {
        return Err(Error::CountMismatch {
            images: n,
            labels: n_labels,
        });
    }

    let images: Vec<f64> = payload.iter().map(|&b| b as f64 / 255.0).collect();
    let labels: Vec<usize> = label_payload.iter().map(|&b| b as usize).collect();
    Ok(MnistDataset::from_parts(images, labels, h, w))
}

/// Writes raw image bytes as an IDX images file.
pub fn write_idx_images(
    path: impl AsRef<Path>,
    pixels: &[u8],
    n: usize,
    h: usize,
    w: usize,
) -> Result<()> {
    let path = path.as_ref();
    if pixels.len() != n * h * w {
        return Err(Error::InvalidParameter(format!(
            "write_idx_images: {} bytes for {n}x{h}x{w}",
            pixels.len()
        )));
    }
    let mut bytes = Vec::with_capacity(16 + pixels.len());
    bytes.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    bytes.extend_from_slice(&(n as u32).to_be_bytes());
    bytes.extend_from_slice(&(h as u32).to_be_bytes());
    bytes.extend_from_slice(&(w as u32).to_be_bytes());
    bytes.extend_from_slice(pixels);
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Writes label bytes as an IDX labels file.
pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(8 + labels.len());
    bytes.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    bytes.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    bytes.extend_from_slice(labels);
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}
