//! Binary PGM (P5) image grids.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Pixels between adjacent tiles.
pub const SEPARATOR: usize = 2;
/// Gray level of separators and empty cells.
pub const BACKGROUND: u8 = 128;

fn to_byte(v: f64) -> u8 {
    ((v.clamp(-1.0, 1.0) + 1.0) * 127.5).round() as u8
}

/// Tiles `samples` (`N×1×H×W` or `N×H×W`, values in `[−1, 1]`) row-major into
/// a `rows × cols` grid and encodes it as 8-bit P5. Multi-channel samples are
/// averaged to grayscale.
pub fn encode_image_grid(samples: &Tensor, rows: usize, cols: usize) -> Result<Vec<u8>> {
    let shape = samples.shape();
    let (channels, h, w) = match *shape {
        [_, c, h, w] => (c, h, w),
        [_, h, w] => (1, h, w),
        _ => return Err(Error::shape("image grid", format!("expected N×C×H×W or N×H×W, got {shape:?}"))),
    };
    let n = shape[0];
    if rows == 0 || cols == 0 || rows * cols < n {
        return Err(Error::InvalidArgument(format!("{rows}x{cols} grid cannot hold {n} samples")));
    }
    let width = cols * w + (cols - 1) * SEPARATOR;
    let height = rows * h + (rows - 1) * SEPARATOR;
    let mut pixels = vec![BACKGROUND; width * height];
    for s in 0..n {
        let img = samples.sample(s);
        let (r, c) = (s / cols, s % cols);
        let (y0, x0) = (r * (h + SEPARATOR), c * (w + SEPARATOR));
        for y in 0..h {
            for x in 0..w {
                let v = (0..channels).map(|ch| img[(ch * h + y) * w + x]).sum::<f64>() / channels as f64;
                pixels[(y0 + y) * width + x0 + x] = to_byte(v);
            }
        }
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}

pub fn write_image_grid(samples: &Tensor, rows: usize, cols: usize, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_image_grid(samples, rows, cols)?;
    std::fs::write(path.as_ref(), bytes).map_err(|e| Error::io(path.as_ref(), e))
}
