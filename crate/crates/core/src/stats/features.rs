//! Builtin frame descriptor and the `.sfea` feature file format.
//!
//! The descriptor is a 3×16-bin Lab histogram, an 8×8 grid of mean luma and
//! an 8×8 grid of mean luma gradient magnitude, 176 values per frame. It
//! stands in for network features, so only orderings between datasets mean
//! anything.
//!
//! `.sfea` layout, little-endian: `"SFEA"`, `u32 n`, `u32 d`, `n·d` `f32`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::diversity::{FeatureMatrix, FeatureSource};
use crate::stats::lab::rgb_to_lab;
use crate::stats::spectrum::luma;

pub const HISTOGRAM_BINS: usize = 16;
pub const GRID: usize = 8;
pub const DESCRIPTOR_DIM: usize = 3 * HISTOGRAM_BINS + 2 * GRID * GRID;
const GRID_OFFSET: usize = 3 * HISTOGRAM_BINS;
const GRADIENT_OFFSET: usize = GRID_OFFSET + GRID * GRID;
/// The histogram visits every `HISTOGRAM_STRIDE`-th pixel along each axis.
pub const HISTOGRAM_STRIDE: usize = 2;

pub const SFEA_MAGIC: [u8; 4] = *b"SFEA";
const SFEA_HEADER: usize = 12;

fn bin(value: f64, lo: f64, hi: f64) -> usize {
    let b = ((value - lo) / (hi - lo) * HISTOGRAM_BINS as f64).floor();
    b.clamp(0.0, (HISTOGRAM_BINS - 1) as f64) as usize
}

/// Descriptor of one packed RGB frame.
pub fn builtin_descriptor(width: usize, height: usize, rgb: &[u8]) -> Vec<f64> {
    assert_eq!(rgb.len(), width * height * 3, "frame size");
    let mut out = vec![0.0; DESCRIPTOR_DIM];
    let mut visited = 0usize;
    for y in (0..height).step_by(HISTOGRAM_STRIDE) {
        for x in (0..width).step_by(HISTOGRAM_STRIDE) {
            let i = (y * width + x) * 3;
            let [l, a, b] = rgb_to_lab([rgb[i], rgb[i + 1], rgb[i + 2]]);
            out[bin(l, 0.0, 100.0)] += 1.0;
            out[HISTOGRAM_BINS + bin(a, -128.0, 128.0)] += 1.0;
            out[2 * HISTOGRAM_BINS + bin(b, -128.0, 128.0)] += 1.0;
            visited += 1;
        }
    }
    out[..3 * HISTOGRAM_BINS].iter_mut().for_each(|v| *v /= visited as f64);

    let lum: Vec<f64> = rgb.chunks_exact(3).map(|p| luma(p[0], p[1], p[2]) / 255.0).collect();
    let mut counts = [0usize; GRID * GRID];
    for y in 0..height {
        let gy = y * GRID / height;
        for x in 0..width {
            let cell = gy * GRID + x * GRID / width;
            let v = lum[y * width + x];
            // forward differences; the last row and column have no neighbour
            let dx = if x + 1 < width { (lum[y * width + x + 1] - v).abs() } else { 0.0 };
            let dy = if y + 1 < height { (lum[(y + 1) * width + x] - v).abs() } else { 0.0 };
            out[GRID_OFFSET + cell] += v;
            out[GRADIENT_OFFSET + cell] += dx + dy;
            counts[cell] += 1;
        }
    }
    for (cell, c) in counts.into_iter().enumerate() {
        if c > 0 {
            out[GRID_OFFSET + cell] /= c as f64;
            out[GRADIENT_OFFSET + cell] /= c as f64;
        }
    }
    out
}

pub fn encode_features(features: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(SFEA_HEADER + features.as_slice().len() * 4);
    out.extend_from_slice(&SFEA_MAGIC);
    out.extend_from_slice(&(features.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(features.dim() as u32).to_le_bytes());
    for v in features.as_slice() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn decode_features(bytes: &[u8], source: FeatureSource) -> Result<FeatureMatrix> {
    if bytes.len() < SFEA_HEADER {
        return Err(Error::TruncatedPayload { expected: SFEA_HEADER, found: bytes.len() });
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if magic != SFEA_MAGIC {
        return Err(Error::BadMagic { expected: SFEA_MAGIC, found: magic });
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let d = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let expected = SFEA_HEADER + n * d * 4;
    if bytes.len() != expected {
        return Err(Error::TruncatedPayload { expected, found: bytes.len() });
    }
    let data = bytes[SFEA_HEADER..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    FeatureMatrix::new(n, d, data, source)
}

pub fn write_features(features: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_features(features))?;
    Ok(())
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::PathUnreadable { path: path.to_path_buf(), source })?;
    decode_features(&bytes, FeatureSource::External(path.to_path_buf()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_of_flat_frames() {
        let black = builtin_descriptor(16, 16, &[0; 16 * 16 * 3]);
        assert_eq!(black.len(), DESCRIPTOR_DIM);
        assert_eq!(black[0], 1.0);
        // a = b = 0 falls in the middle bin
        assert_eq!(black[HISTOGRAM_BINS + 8], 1.0);
        assert_eq!(black[2 * HISTOGRAM_BINS + 8], 1.0);
        assert!(black[GRID_OFFSET..].iter().all(|&v| v == 0.0));

        let white = builtin_descriptor(16, 16, &[255; 16 * 16 * 3]);
        assert_eq!(white[HISTOGRAM_BINS - 1], 1.0);
        assert!(white[GRID_OFFSET..GRADIENT_OFFSET].iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(white[GRADIENT_OFFSET..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_follows_layout() {
        // left half white, right half black
        let (w, h) = (16, 8);
        let rgb: Vec<u8> = (0..w * h).flat_map(|i| if i % w < w / 2 { [255; 3] } else { [0; 3] }).collect();
        let d = builtin_descriptor(w, h, &rgb);
        let grid = &d[GRID_OFFSET..GRADIENT_OFFSET];
        for row in grid.chunks(GRID) {
            assert!(row[..4].iter().all(|&v| (v - 1.0).abs() < 1e-12));
            assert!(row[4..].iter().all(|&v| v == 0.0));
        }
        // only column 7 of the image has a step, and it sits in grid column 3
        // (cells are 2×1 pixels, so half of each column-3 cell sees it)
        let gradient = &d[GRADIENT_OFFSET..];
        for row in gradient.chunks(GRID) {
            for (gx, &v) in row.iter().enumerate() {
                let expected = if gx == 3 { 0.5 } else { 0.0 };
                assert!((v - expected).abs() < 1e-12, "cell {gx}: {v}");
            }
        }
    }

    #[test]
    fn gradient_of_a_checkerboard() {
        // unit checkerboard: every pixel differs from both forward neighbours
        let (w, h) = (16, 16);
        let rgb: Vec<u8> = (0..w * h).flat_map(|i| if (i % w + i / w) % 2 == 0 { [255; 3] } else { [0; 3] }).collect();
        let d = builtin_descriptor(w, h, &rgb);
        // cells are 2×2; cells in the last grid row/column lose one neighbour on the edge pixels
        assert!((d[GRADIENT_OFFSET] - 2.0).abs() < 1e-12);
        assert!((d[GRADIENT_OFFSET + GRID * GRID - 1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sfea_round_trip() {
        let f = FeatureMatrix::new(3, 2, vec![0.5, -1.25, 3.0, 4.0, 1e-3, 7.0], FeatureSource::Builtin).unwrap();
        let bytes = encode_features(&f);
        assert_eq!(&bytes[..12], &[b'S', b'F', b'E', b'A', 3, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(bytes.len(), 12 + 24);
        let back = decode_features(&bytes, FeatureSource::Builtin).unwrap();
        for (a, b) in back.as_slice().iter().zip(f.as_slice()) {
            assert_eq!(*a, *b as f32 as f64);
        }
        assert!(matches!(decode_features(&bytes[..bytes.len() - 1], FeatureSource::Builtin), Err(Error::TruncatedPayload { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_features(&bad, FeatureSource::Builtin), Err(Error::BadMagic { .. })));
    }
}
