//! Per-video source selection for mixed datasets.

use std::path::{Path, PathBuf};

use crate::config::MixtureComponent;
use crate::error::{Error, Result};
use crate::io::container;
use crate::rng::{derive_video_seed, RngStream};
use crate::texture::{self, list_frames};
use crate::video::VideoTensor;

/// Stream id (under the video seed) that drives the mixture draw.
pub const MIXTURE_STREAM: u64 = 1;

/// Index of the component chosen from the video's root stream: component `s`
/// wins when `u` falls in its cumulative-ratio bucket. `None` for an empty
/// mixture (the generator alone).
pub fn choose_component(mixture: &[MixtureComponent], video_rng: &RngStream) -> Option<usize> {
    if mixture.is_empty() {
        return None;
    }
    let u = video_rng.fork(MIXTURE_STREAM).next_f64();
    let mut cumulative = 0.0;
    for (i, c) in mixture.iter().enumerate() {
        cumulative += c.ratio;
        if u < cumulative {
            return Some(i);
        }
    }
    // Rounding left `u` above the last boundary: take the last non-empty bucket.
    mixture.iter().rposition(|c| c.ratio > 0.0)
}

/// The mixture choice for `video_index` of the dataset seeded with `global_seed`.
pub fn compose_mixture(mixture: &[MixtureComponent], global_seed: u64, video_index: u64) -> Option<usize> {
    choose_component(mixture, &RngStream::new(derive_video_seed(global_seed, video_index)))
}

#[derive(Debug, Clone, PartialEq)]
enum Recording {
    File(PathBuf),
    Frames(Vec<PathBuf>),
}

/// A directory of pre-recorded videos: `.svid` files and/or subdirectories
/// of numbered frames, in sorted name order.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedVideoPool {
    root: PathBuf,
    entries: Vec<Recording>,
}

impl RecordedVideoPool {
    pub fn load(path: impl AsRef<Path>, limit: Option<usize>) -> Result<Self> {
        let root = path.as_ref().to_owned();
        let rd = std::fs::read_dir(&root).map_err(|source| Error::PathUnreadable { path: root.clone(), source })?;
        let mut items: Vec<PathBuf> = rd.filter_map(|e| e.ok().map(|e| e.path())).collect();
        items.sort();
        let mut entries = Vec::new();
        for item in items {
            if item.is_file() && item.extension().is_some_and(|e| e == "svid") {
                entries.push(Recording::File(item));
            } else if item.is_dir() {
                match list_frames(&item) {
                    Ok(frames) if !frames.is_empty() => entries.push(Recording::Frames(frames)),
                    _ => log::warn!("skipping {}: no frames", item.display()),
                }
            }
            if limit.is_some_and(|n| entries.len() >= n) {
                break;
            }
        }
        if entries.is_empty() {
            return Err(Error::PoolEmpty(root));
        }
        Ok(Self { root, entries })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry `entry` unchanged. Frame directories get `fps` and seed 0.
    pub fn video(&self, entry: usize, fps: u16) -> Result<VideoTensor> {
        match &self.entries[entry] {
            Recording::File(p) => container::read_video(p),
            Recording::Frames(frames) => {
                let first = texture::load_image(&frames[0])?;
                let (w, h) = first.dimensions();
                let mut data = first.into_raw();
                for p in &frames[1..] {
                    let img = texture::load_image(p)?;
                    if img.dimensions() != (w, h) {
                        return Err(Error::InvalidShape(format!("{} is not {w}×{h}", p.display())));
                    }
                    data.extend_from_slice(img.as_raw());
                }
                VideoTensor::new(w, h, frames.len() as u32, fps, 0, data)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MixtureSource;

    fn mix(ratios: &[f64]) -> Vec<MixtureComponent> {
        ratios
            .iter()
            .map(|&ratio| MixtureComponent { source: MixtureSource::Generator, ratio })
            .collect()
    }

    fn fraction(m: &[MixtureComponent], which: usize, n: u64) -> f64 {
        (0..n).filter(|&i| compose_mixture(m, 7, i) == Some(which)).count() as f64 / n as f64
    }

    #[test]
    fn single_component_always_wins() {
        let m = mix(&[1.0]);
        assert!((0..1000).all(|i| compose_mixture(&m, 3, i) == Some(0)));
        assert_eq!(compose_mixture(&[], 3, 0), None);
    }

    #[test]
    fn five_percent_static_images() {
        let f = fraction(&mix(&[0.95, 0.05]), 1, 100_000);
        assert!((0.045..=0.055).contains(&f), "{f}");
    }

    #[test]
    fn even_real_synthetic_split() {
        let f = fraction(&mix(&[0.5, 0.5]), 1, 10_000);
        assert!((f - 0.5).abs() <= 0.02, "{f}");
    }

    #[test]
    fn zero_ratio_components_never_win() {
        let m = mix(&[0.0, 1.0, 0.0]);
        assert!((0..5000).all(|i| compose_mixture(&m, 1, i) == Some(1)));
    }

    #[test]
    fn choice_is_deterministic_per_index() {
        let m = mix(&[0.3, 0.3, 0.4]);
        let a: Vec<_> = (0..100).map(|i| compose_mixture(&m, 11, i)).collect();
        let b: Vec<_> = (0..100).map(|i| compose_mixture(&m, 11, i)).collect();
        assert_eq!(a, b);
    }
}
