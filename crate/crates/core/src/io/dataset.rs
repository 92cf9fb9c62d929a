//! Fixed-size dataset generation into a directory.
//!
//! Layout: `config.json` (the resolved config, written first),
//! `video_000000.svid` … and `manifest.json` (written last). A run over an
//! existing directory keeps every complete video file and generates only the
//! missing ones; the directory's config must hash identically.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::GeneratorConfig;
use crate::error::{Error, Result};
use crate::generate::Generator;
use crate::io::container::{self, encode_video, VideoHeader, HEADER_LEN};
use crate::io::manifest::{Manifest, VideoRecord, CONFIG_FILE, MANIFEST_FILE};
use crate::par;
use crate::video::VideoTensor;

#[derive(Debug, Clone)]
pub struct GenerationSummary {
    pub manifest: Manifest,
    /// Videos written by this run.
    pub generated: u64,
    /// Existing valid files that were kept.
    pub reused: u64,
}

pub fn video_filename(index: u64) -> String {
    format!("video_{index:06}.svid")
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Bytes of an existing, structurally complete video file.
fn existing_video(path: &Path) -> Option<Vec<u8>> {
    let bytes = fs::read(path).ok()?;
    let header = VideoHeader::decode(&bytes).ok()?;
    (bytes.len() == HEADER_LEN + header.payload_len()).then_some(bytes)
}

fn check_directory_config(dir: &Path, cfg: &GeneratorConfig) -> Result<()> {
    let expected = cfg.hash_hex();
    let config_path = dir.join(CONFIG_FILE);
    if config_path.exists() {
        let found = GeneratorConfig::load(&config_path)?.hash_hex();
        if found != expected {
            return Err(Error::ConfigMismatch { expected: found, found: expected });
        }
    } else {
        write_atomic(&config_path, cfg.to_json_pretty().as_bytes())?;
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        let m = Manifest::load(&manifest_path)?;
        if m.config_hash != expected {
            return Err(Error::ConfigMismatch { expected: m.config_hash, found: expected });
        }
        fs::remove_file(&manifest_path)?;
    }
    Ok(())
}

/// Generates videos `0..count` into `out_dir` and writes the manifest.
pub fn generate_dataset(generator: &Generator, out_dir: impl AsRef<Path>, count: u64) -> Result<GenerationSummary> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let cfg = generator.config();
    check_directory_config(dir, cfg)?;

    let results = par::map_range(generator.execution(), 0..count, |index| -> Result<(VideoRecord, bool)> {
        let filename = video_filename(index);
        let path = dir.join(&filename);
        let (bytes, fresh) = match existing_video(&path) {
            Some(bytes) => (bytes, false),
            None => {
                let bytes = encode_video(&generator.video(index)?);
                write_atomic(&path, &bytes)?;
                (bytes, true)
            }
        };
        let header = VideoHeader::decode(&bytes)?;
        let record = VideoRecord {
            index,
            filename,
            seed: header.seed,
            frames: header.frames,
            sha256: hex::encode(Sha256::digest(&bytes)),
        };
        Ok((record, fresh))
    });

    let mut records = Vec::with_capacity(count as usize);
    let mut generated = 0;
    for r in results {
        let (record, fresh) = r?;
        generated += fresh as u64;
        records.push(record);
    }
    let manifest = Manifest::new(cfg.hash_hex(), cfg.global_seed, records);
    write_atomic(&dir.join(MANIFEST_FILE), manifest.to_json_pretty().as_bytes())?;
    Ok(GenerationSummary { manifest, generated, reused: count - generated })
}

/// Sorted `.svid` files of a dataset directory.
pub fn list_videos(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let rd = fs::read_dir(dir).map_err(|source| Error::PathUnreadable { path: dir.to_owned(), source })?;
    let mut files: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "svid"))
        .collect();
    files.sort();
    Ok(files)
}

/// Writes every frame of `video` as `frame_00000.png`, … into `dir`.
pub fn export_png_frames(video: &VideoTensor, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(video.frames as usize);
    for (t, frame) in video.frames_iter().enumerate() {
        let path = dir.join(format!("frame_{t:05}.png"));
        image::save_buffer(&path, frame, video.width, video.height, image::ExtendedColorType::Rgb8).map_err(|e| {
            Error::ImageDecode { path: path.clone(), reason: e.to_string() }
        })?;
        paths.push(path);
    }
    Ok(paths)
}

/// Reads a dataset video by manifest record and verifies its digest.
pub fn read_verified(dir: impl AsRef<Path>, record: &VideoRecord) -> Result<VideoTensor> {
    let bytes = fs::read(dir.as_ref().join(&record.filename))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    if digest != record.sha256 {
        return Err(Error::Manifest(format!("{} digest mismatch", record.filename)));
    }
    container::decode_video(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{IntInterval, Level};

    fn small() -> GeneratorConfig {
        let mut cfg = GeneratorConfig::for_level(Level::TransformingShapes).with_canvas(32, 24);
        cfg.duration_range = IntInterval::new(3, 5);
        cfg.global_seed = 21;
        cfg
    }

    #[test]
    fn second_run_reuses_everything() {
        let dir = tempfile::tempdir().unwrap();
        let g = Generator::new(small()).unwrap();
        let first = generate_dataset(&g, dir.path(), 3).unwrap();
        assert_eq!((first.generated, first.reused), (3, 0));
        let second = generate_dataset(&g, dir.path(), 3).unwrap();
        assert_eq!((second.generated, second.reused), (0, 3));
        assert_eq!(first.manifest, second.manifest);
        let m = Manifest::load(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(m, first.manifest);
        for r in &m.videos {
            assert_eq!(read_verified(dir.path(), r).unwrap(), g.video(r.index).unwrap());
        }
    }

    #[test]
    fn damaged_files_are_regenerated() {
        let dir = tempfile::tempdir().unwrap();
        let g = Generator::new(small()).unwrap();
        let first = generate_dataset(&g, dir.path(), 2).unwrap();
        let p = dir.path().join(video_filename(1));
        let bytes = fs::read(&p).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 1]).unwrap();
        let again = generate_dataset(&g, dir.path(), 2).unwrap();
        assert_eq!(again.generated, 1);
        assert_eq!(again.manifest, first.manifest);
    }

    #[test]
    fn config_drift_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        generate_dataset(&Generator::new(small()).unwrap(), dir.path(), 1).unwrap();
        let mut drifted = small();
        drifted.speed_multiplier = 0.5;
        let err = generate_dataset(&Generator::new(drifted).unwrap(), dir.path(), 1).unwrap_err();
        assert!(matches!(err, Error::ConfigMismatch { .. }));
    }

    #[test]
    fn png_export_writes_each_frame() {
        let dir = tempfile::tempdir().unwrap();
        let v = Generator::new(small()).unwrap().video(0).unwrap();
        let paths = export_png_frames(&v, dir.path().join("png")).unwrap();
        assert_eq!(paths.len(), v.frames as usize);
        let img = image::open(&paths[0]).unwrap().to_rgb8();
        assert_eq!(img.as_raw().as_slice(), v.frame(0));
    }
}
