use std::fs;
use std::path::Path;

use super::DataError;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Unsigned byte images, stored row-major and flattened per image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// `count * rows * cols` bytes.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let w = self.pixels_per_image();
        &self.pixels[i * w..(i + 1) * w]
    }
}

fn be_u32(bytes: &[u8], offset: usize, what: &'static str) -> Result<u32, DataError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(DataError::Truncated {
            what,
            expected: offset + 4,
            found: bytes.len(),
        })
}

/// Parses an IDX3 unsigned-byte image file.
pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages, DataError> {
    const WHAT: &str = "image file";
    let magic = be_u32(bytes, 0, WHAT)?;
    if magic != IMAGES_MAGIC {
        return Err(DataError::BadMagic {
            what: WHAT,
            found: magic,
            expected: IMAGES_MAGIC,
        });
    }
    let count = be_u32(bytes, 4, WHAT)? as usize;
    let rows = be_u32(bytes, 8, WHAT)? as usize;
    let cols = be_u32(bytes, 12, WHAT)? as usize;
    let need = 16 + count * rows * cols;
    if bytes.len() < need {
        return Err(DataError::Truncated {
            what: WHAT,
            expected: need,
            found: bytes.len(),
        });
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: bytes[16..need].to_vec(),
    })
}

/// Parses an IDX1 unsigned-byte label file.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    const WHAT: &str = "label file";
    let magic = be_u32(bytes, 0, WHAT)?;
    if magic != LABELS_MAGIC {
        return Err(DataError::BadMagic {
            what: WHAT,
            found: magic,
            expected: LABELS_MAGIC,
        });
    }
    let count = be_u32(bytes, 4, WHAT)? as usize;
    let need = 8 + count;
    if bytes.len() < need {
        return Err(DataError::Truncated {
            what: WHAT,
            expected: need,
            found: bytes.len(),
        });
    }
    Ok(bytes[8..need].to_vec())
}

/// Reads a matching pair of IDX image and label files.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<(IdxImages, Vec<u8>), DataError> {
    let read = |p: &Path| {
        fs::read(p).map_err(|source| DataError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    let images = parse_idx_images(&read(images_path)?)?;
    let labels = parse_idx_labels(&read(labels_path)?)?;
    if images.count != labels.len() {
        return Err(DataError::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    Ok((images, labels))
}
