//! The `.svid` raw video container.
//!
//! ```text
//! offset size field
//!      0    4 magic "SVID"
//!      4    2 version (u16, = 1)
//!      6    4 height (u32)
//!     10    4 width (u32)
//!     14    4 frames (u32)
//!     18    2 fps (u16)
//!     20    1 dtype (u8, 0 = uint8)
//!     21    8 seed (u64)
//!     29    … payload, frames·height·width·3 bytes, RGB row-major
//! ```
//! All integers little-endian.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::video::{frame_len, VideoTensor};

pub const MAGIC: [u8; 4] = *b"SVID";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 29;
pub const DTYPE_U8: u8 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VideoHeader {
    pub version: u16,
    pub height: u32,
    pub width: u32,
    pub frames: u32,
    pub fps: u16,
    pub dtype: u8,
    pub seed: u64,
}

impl VideoHeader {
    pub fn of(video: &VideoTensor) -> Self {
        Self {
            version: VERSION,
            height: video.height,
            width: video.width,
            frames: video.frames,
            fps: video.fps,
            dtype: DTYPE_U8,
            seed: video.seed,
        }
    }

    pub fn payload_len(&self) -> usize {
        frame_len(self.width, self.height) * self.frames as usize
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&self.version.to_le_bytes());
        b[6..10].copy_from_slice(&self.height.to_le_bytes());
        b[10..14].copy_from_slice(&self.width.to_le_bytes());
        b[14..18].copy_from_slice(&self.frames.to_le_bytes());
        b[18..20].copy_from_slice(&self.fps.to_le_bytes());
        b[20] = self.dtype;
        b[21..29].copy_from_slice(&self.seed.to_le_bytes());
        b
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedPayload { expected: HEADER_LEN, found: bytes.len() });
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic { expected: MAGIC, found: magic });
        }
        let u16_at = |i: usize| u16::from_le_bytes(bytes[i..i + 2].try_into().unwrap());
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let header = Self {
            version: u16_at(4),
            height: u32_at(6),
            width: u32_at(10),
            frames: u32_at(14),
            fps: u16_at(18),
            dtype: bytes[20],
            seed: u64::from_le_bytes(bytes[21..29].try_into().unwrap()),
        };
        if header.version != VERSION {
            return Err(Error::UnsupportedVersion(header.version));
        }
        if header.dtype != DTYPE_U8 {
            return Err(Error::UnsupportedDtype(header.dtype));
        }
        Ok(header)
    }
}

/// Header followed by payload.
pub fn encode_video(video: &VideoTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + video.data.len());
    out.extend_from_slice(&VideoHeader::of(video).encode());
    out.extend_from_slice(&video.data);
    out
}

pub fn decode_video(bytes: &[u8]) -> Result<VideoTensor> {
    let header = VideoHeader::decode(bytes)?;
    let payload = &bytes[HEADER_LEN..];
    let expected = header.payload_len();
    if payload.len() < expected {
        return Err(Error::TruncatedPayload { expected, found: payload.len() });
    }
    if payload.len() > expected {
        return Err(Error::InvalidShape(format!("{} trailing bytes after payload", payload.len() - expected)));
    }
    VideoTensor::new(header.width, header.height, header.frames, header.fps, header.seed, payload.to_vec())
}

pub fn write_video(video: &VideoTensor, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&VideoHeader::of(video).encode())?;
    w.write_all(&video.data)?;
    w.flush()?;
    Ok(())
}

pub fn read_video(path: impl AsRef<Path>) -> Result<VideoTensor> {
    decode_video(&std::fs::read(path)?)
}

pub fn read_header(path: impl AsRef<Path>) -> Result<VideoHeader> {
    let mut buf = Vec::with_capacity(HEADER_LEN);
    File::open(path)?.take(HEADER_LEN as u64).read_to_end(&mut buf)?;
    VideoHeader::decode(&buf)
}
