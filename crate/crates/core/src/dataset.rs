//! MNIST in IDX format.
//!
//! IDX headers are big-endian: a magic number (`0x00000803` for images,
//! `0x00000801` for labels), the item count, and for images the row and
//! column counts, followed by raw unsigned bytes.

use std::path::{Path, PathBuf};

use crate::bnn::{binarize_bytes, PackedBits};
use crate::error::{Error, IdxError, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn file_names(self) -> (&'static str, &'static str) {
        match self {
            Split::Train => ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
            Split::Test => ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledImageSet {
    images: Vec<u8>,
    labels: Vec<u8>,
    pub split: Option<Split>,
}

fn be_u32(data: &[u8], at: usize) -> std::result::Result<u32, IdxError> {
    data.get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
        .ok_or(IdxError::Truncated {
            needed: at + 4,
            have: data.len(),
        })
}

fn check_magic(data: &[u8], expected: u32) -> std::result::Result<(), IdxError> {
    let found = be_u32(data, 0)?;
    if found != expected {
        return Err(IdxError::BadMagic { expected, found });
    }
    Ok(())
}

/// Parses an IDX3 image file; returns (count, pixel bytes).
pub fn parse_images(data: &[u8]) -> std::result::Result<(usize, Vec<u8>), IdxError> {
    check_magic(data, IMAGE_MAGIC)?;
    let n = be_u32(data, 4)? as usize;
    let (rows, cols) = (be_u32(data, 8)? as usize, be_u32(data, 12)? as usize);
    if (rows, cols) != (SIDE, SIDE) {
        return Err(IdxError::Shape { rows, cols });
    }
    let needed = 16 + n * PIXELS;
    if data.len() < needed {
        return Err(IdxError::Truncated {
            needed,
            have: data.len(),
        });
    }
    Ok((n, data[16..needed].to_vec()))
}

pub fn parse_labels(data: &[u8]) -> std::result::Result<Vec<u8>, IdxError> {
    check_magic(data, LABEL_MAGIC)?;
    let n = be_u32(data, 4)? as usize;
    let needed = 8 + n;
    if data.len() < needed {
        return Err(IdxError::Truncated {
            needed,
            have: data.len(),
        });
    }
    let labels = data[8..needed].to_vec();
    if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l > 9) {
        return Err(IdxError::BadLabel { index, label });
    }
    Ok(labels)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(Error::Io)
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabeledImageSet> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let idx_err = |path: &Path| {
        let path = PathBuf::from(path);
        move |source| Error::Idx { path, source }
    };
    let (n, images) = parse_images(&read(ip)?).map_err(idx_err(ip))?;
    let labels = parse_labels(&read(lp)?).map_err(idx_err(lp))?;
    if n != labels.len() {
        return Err(Error::Idx {
            path: lp.to_path_buf(),
            source: IdxError::CountMismatch {
                images: n,
                labels: labels.len(),
            },
        });
    }
    Ok(LabeledImageSet {
        images,
        labels,
        split: None,
    })
}

/// Loads the standard file pair for `split` from `dir`.
pub fn load_split(dir: impl AsRef<Path>, split: Split) -> Result<LabeledImageSet> {
    let (images, labels) = split.file_names();
    let mut set = load_idx(dir.as_ref().join(images), dir.as_ref().join(labels))?;
    set.split = Some(split);
    Ok(set)
}

impl LabeledImageSet {
    pub fn from_parts(images: Vec<u8>, labels: Vec<u8>) -> Result<Self> {
        if images.len() != labels.len() * PIXELS {
            return Err(Error::Dimension {
                expected: format!("{} pixels", labels.len() * PIXELS),
                got: format!("{}", images.len()),
            });
        }
        Ok(Self {
            images,
            labels,
            split: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        &self.images[i * PIXELS..(i + 1) * PIXELS]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Pixels scaled to `[0, 1]`.
    pub fn normalized(&self, i: usize) -> Vec<f32> {
        self.image(i).iter().map(|&p| p as f32 / 255.0).collect()
    }

    /// Canonical binarization of every image (`byte >= 128` is +1).
    pub fn binarized(&self) -> Vec<PackedBits> {
        (0..self.len()).map(|i| binarize_bytes(self.image(i))).collect()
    }

    /// First `n` items.
    pub fn head(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            images: self.images[..n * PIXELS].to_vec(),
            labels: self.labels[..n].to_vec(),
            split: self.split,
        }
    }
}
