use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A block of `frames` RGB frames, `frames × height × width × 3` bytes, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoTensor {
    pub width: u32,
    pub height: u32,
    pub frames: u32,
    pub fps: u16,
    /// Seed the content was generated from.
    pub seed: u64,
    pub data: Vec<u8>,
}

impl VideoTensor {
    pub fn new(width: u32, height: u32, frames: u32, fps: u16, seed: u64, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || frames == 0 {
            return Err(Error::InvalidShape(format!("{frames}×{height}×{width} has a zero dimension")));
        }
        let expected = frame_len(width, height) * frames as usize;
        if data.len() != expected {
            return Err(Error::InvalidShape(format!(
                "{frames}×{height}×{width}×3 needs {expected} bytes, got {}",
                data.len()
            )));
        }
        Ok(Self { width, height, frames, fps, seed, data })
    }

    pub fn zeros(width: u32, height: u32, frames: u32, fps: u16, seed: u64) -> Self {
        let data = vec![0; frame_len(width, height) * frames as usize];
        Self { width, height, frames, fps, seed, data }
    }

    pub fn frame_len(&self) -> usize {
        frame_len(self.width, self.height)
    }

    pub fn frame(&self, t: u32) -> &[u8] {
        let n = self.frame_len();
        &self.data[t as usize * n..(t as usize + 1) * n]
    }

    pub fn frame_mut(&mut self, t: u32) -> &mut [u8] {
        let n = self.frame_len();
        &mut self.data[t as usize * n..(t as usize + 1) * n]
    }

    pub fn frames_iter(&self) -> impl Iterator<Item = &[u8]> {
        self.data.chunks_exact(self.frame_len())
    }

    pub fn pixel(&self, t: u32, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        let f = self.frame(t);
        [f[i], f[i + 1], f[i + 2]]
    }

    /// SHA-256 of the frame bytes, hex.
    pub fn content_checksum(&self) -> String {
        hex::encode(Sha256::digest(&self.data))
    }

    pub fn frame_checksums(&self) -> Vec<String> {
        self.frames_iter().map(|f| hex::encode(Sha256::digest(f))).collect()
    }
}

pub fn frame_len(width: u32, height: u32) -> usize {
    width as usize * height as usize * 3
}
