use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub index: u64,
    pub filename: String,
    pub seed: u64,
    pub frames: u32,
    /// SHA-256 of the whole `.svid` file, hex.
    pub sha256: String,
}

/// Index of a generated dataset directory. Written after every video is on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_hash: String,
    pub global_seed: u64,
    pub video_count: u64,
    /// SHA-256 over the concatenated per-video digests, hex.
    pub dataset_sha256: String,
    pub videos: Vec<VideoRecord>,
}

impl Manifest {
    pub fn new(config_hash: String, global_seed: u64, videos: Vec<VideoRecord>) -> Self {
        let dataset_sha256 = dataset_digest(&videos);
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            config_hash,
            global_seed,
            video_count: videos.len() as u64,
            dataset_sha256,
            videos,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.videos.len() as u64 != self.video_count {
            return Err(Error::Manifest(format!(
                "{} records for {} videos",
                self.videos.len(),
                self.video_count
            )));
        }
        if dataset_digest(&self.videos) != self.dataset_sha256 {
            return Err(Error::Manifest("dataset digest does not match records".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.check()?;
        Ok(m)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

fn dataset_digest(videos: &[VideoRecord]) -> String {
    let mut h = Sha256::new();
    for v in videos {
        h.update(v.sha256.as_bytes());
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tampering_is_detected() {
        let rec = |i| VideoRecord { index: i, filename: format!("{i}"), seed: i, frames: 3, sha256: format!("{i:064}") };
        let mut m = Manifest::new("abc".into(), 1, vec![rec(0), rec(1)]);
        m.check().unwrap();
        m.videos[1].sha256 = "0".repeat(64);
        assert!(m.check().is_err());
        m.videos.pop();
        assert!(m.check().is_err());
    }
}
