//! MNIST IDX files: big-endian u32 magic and dimensions followed by raw bytes.

use std::path::Path;

use crate::data::{Dataset, DatasetKind, Split};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

struct Reader<'a> {
    what: &'static str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format {
                what: self.what,
                offset: self.pos as u64,
                detail: format!("truncated: need {n} bytes, {} remain", self.bytes.len() - self.pos),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn expect_magic(&mut self, want: u32) -> Result<()> {
        let got = self.u32()?;
        if got != want {
            return Err(Error::Format {
                what: self.what,
                offset: 0,
                detail: format!("bad magic 0x{got:08x}, expected 0x{want:08x}"),
            });
        }
        Ok(())
    }
}

/// Maps a byte in `[0, 255]` linearly onto `[−1, 1]`.
pub fn scale_pixel(p: u8) -> f64 {
    2.0 * p as f64 / 255.0 - 1.0
}

/// Parses in-memory IDX image and label files into an `N×1×H×W` dataset.
pub fn parse_mnist_idx(images: &[u8], labels: &[u8]) -> Result<Dataset> {
    let mut ir = Reader { what: "IDX images", bytes: images, pos: 0 };
    ir.expect_magic(IMAGES_MAGIC)?;
    let n = ir.u32()? as usize;
    let rows = ir.u32()? as usize;
    let cols = ir.u32()? as usize;
    if n == 0 || rows == 0 || cols == 0 {
        return Err(Error::Format {
            what: "IDX images",
            offset: 4,
            detail: format!("empty dimensions {n}x{rows}x{cols}"),
        });
    }
    let pixels = ir.take(n * rows * cols)?;
    if ir.pos != images.len() {
        return Err(Error::Format {
            what: "IDX images",
            offset: ir.pos as u64,
            detail: format!("{} trailing bytes", images.len() - ir.pos),
        });
    }

    let mut lr = Reader { what: "IDX labels", bytes: labels, pos: 0 };
    lr.expect_magic(LABELS_MAGIC)?;
    let m = lr.u32()? as usize;
    if m != n {
        return Err(Error::Format {
            what: "IDX labels",
            offset: 4,
            detail: format!("label count {m} does not match image count {n}"),
        });
    }
    let label_bytes = lr.take(m)?.to_vec();

    let data = pixels.iter().map(|&p| scale_pixel(p)).collect();
    Ok(Dataset {
        samples: Tensor::new(vec![n, 1, rows, cols], data)?,
        labels: Some(label_bytes),
        kind: DatasetKind::Mnist,
        split: Split::Train,
    })
}

pub fn load_mnist_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<Dataset> {
    let read = |p: &Path| std::fs::read(p).map_err(|e| Error::io(p, e));
    parse_mnist_idx(&read(images.as_ref())?, &read(labels.as_ref())?)
}

/// Loads `train-images-idx3-ubyte` / `train-labels-idx1-ubyte` from a directory.
pub fn load_mnist_dir(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    load_mnist_idx(dir.join("train-images-idx3-ubyte"), dir.join("train-labels-idx1-ubyte"))
}
