//! Appearance sources: image pools, texture-video pools and crops from them.
//!
//! A pool is a directory. Still-image pools hold PNG/PPM files; texture-video
//! pools hold one subdirectory per video whose frames are numerically named
//! image files (`0.png`, `1.png`, … or zero-padded). Entries are sorted by
//! name, and that order is the index order every sampler uses.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use image::RgbImage;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::video::VideoTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolKind {
    StaticImages,
    TextureVideos,
}

#[derive(Debug, Clone, PartialEq)]
enum EntrySource {
    File(PathBuf),
    Frames(Vec<PathBuf>),
    Image(Arc<RgbImage>),
    ImageFrames(Vec<Arc<RgbImage>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub id: String,
    source: EntrySource,
}

/// An immutable, indexable collection of appearance sources.
#[derive(Debug, Clone, PartialEq)]
pub struct TexturePool {
    root: PathBuf,
    kind: PoolKind,
    entries: Vec<PoolEntry>,
    skipped: usize,
}

/// A crop rectangle in source-image pixels. Coordinates index the
/// mirror-tiled image, so they may exceed the source size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropWindow {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

pub fn is_image_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "ppm" | "pnm")
    )
}

/// Sort key for frame files: numeric stem when it parses, else the name.
fn frame_key(path: &Path) -> (u64, String) {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let digits: String = stem.chars().rev().take_while(char::is_ascii_digit).collect();
    let n = digits.chars().rev().collect::<String>().parse().unwrap_or(u64::MAX);
    (n, stem.to_owned())
}

fn read_dir_sorted(path: &Path) -> Result<Vec<PathBuf>> {
    let rd = fs::read_dir(path).map_err(|source| Error::PathUnreadable {
        path: path.to_owned(),
        source,
    })?;
    let mut out: Vec<PathBuf> = rd.filter_map(|e| e.ok().map(|e| e.path())).collect();
    out.sort();
    Ok(out)
}

/// Numerically ordered image frames of one texture-video directory.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut frames: Vec<PathBuf> = read_dir_sorted(dir)?
        .into_iter()
        .filter(|p| p.is_file() && is_image_path(p))
        .collect();
    frames.sort_by_key(|p| frame_key(p));
    Ok(frames)
}

pub fn load_image(path: &Path) -> Result<RgbImage> {
    image::open(path)
        .map(|img| img.to_rgb8())
        .map_err(|e| Error::ImageDecode {
            path: path.to_owned(),
            reason: e.to_string(),
        })
}

/// Loads the pool at `path`. Items that cannot be opened are skipped and
/// counted in [`TexturePool::skipped`]; `limit` keeps only the first entries.
pub fn load_pool(path: impl AsRef<Path>, kind: PoolKind, limit: Option<usize>) -> Result<TexturePool> {
    let root = path.as_ref().to_owned();
    let mut entries = Vec::new();
    let mut skipped = 0;
    for item in read_dir_sorted(&root)? {
        let id = item
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match kind {
            PoolKind::StaticImages => {
                if !item.is_file() || !is_image_path(&item) {
                    continue;
                }
                if fs::File::open(&item).is_err() {
                    skipped += 1;
                    continue;
                }
                entries.push(PoolEntry { id, source: EntrySource::File(item) });
            }
            PoolKind::TextureVideos => {
                if !item.is_dir() {
                    continue;
                }
                match list_frames(&item) {
                    Ok(frames) if !frames.is_empty() => {
                        entries.push(PoolEntry { id, source: EntrySource::Frames(frames) })
                    }
                    _ => skipped += 1,
                }
            }
        }
        if limit.is_some_and(|n| entries.len() >= n) {
            break;
        }
    }
    if skipped > 0 {
        log::warn!("pool {}: skipped {skipped} unreadable items", root.display());
    }
    if entries.is_empty() {
        return Err(Error::PoolEmpty(root));
    }
    Ok(TexturePool { root, kind, entries, skipped })
}

impl TexturePool {
    /// An in-memory still-image pool.
    pub fn from_images(name: &str, images: Vec<RgbImage>) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::PoolEmpty(name.into()));
        }
        let entries = images
            .into_iter()
            .enumerate()
            .map(|(i, img)| PoolEntry {
                id: format!("{i:08}"),
                source: EntrySource::Image(Arc::new(img)),
            })
            .collect();
        Ok(Self { root: name.into(), kind: PoolKind::StaticImages, entries, skipped: 0 })
    }

    /// An in-memory texture-video pool; each inner vector is one video.
    pub fn from_videos(name: &str, videos: Vec<Vec<RgbImage>>) -> Result<Self> {
        if videos.is_empty() {
            return Err(Error::PoolEmpty(name.into()));
        }
        let mut entries = Vec::with_capacity(videos.len());
        for (i, frames) in videos.into_iter().enumerate() {
            let id = format!("{i:08}");
            if frames.is_empty() {
                return Err(Error::MissingFrames(PathBuf::from(name).join(id)));
            }
            let frames = frames.into_iter().map(Arc::new).collect();
            entries.push(PoolEntry { id, source: EntrySource::ImageFrames(frames) });
        }
        Ok(Self { root: name.into(), kind: PoolKind::TextureVideos, entries, skipped: 0 })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn kind(&self) -> PoolKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn entry_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }

    /// Number of frames of entry `entry` (1 for still images).
    pub fn frame_count(&self, entry: usize) -> usize {
        match &self.entries[entry].source {
            EntrySource::File(_) | EntrySource::Image(_) => 1,
            EntrySource::Frames(f) => f.len(),
            EntrySource::ImageFrames(f) => f.len(),
        }
    }

    /// Frame `t` of entry `entry`; still images ignore `t`.
    pub fn frame(&self, entry: usize, t: usize) -> Result<Arc<RgbImage>> {
        let e = &self.entries[entry];
        match &e.source {
            EntrySource::File(p) => load_image(p).map(Arc::new),
            EntrySource::Image(img) => Ok(img.clone()),
            EntrySource::Frames(frames) => match frames.get(t) {
                Some(p) => load_image(p).map(Arc::new),
                None => Err(Error::MissingFrames(self.root.join(&e.id))),
            },
            EntrySource::ImageFrames(frames) => frames
                .get(t)
                .cloned()
                .ok_or_else(|| Error::MissingFrames(self.root.join(&e.id))),
        }
    }

    pub fn image(&self, entry: usize) -> Result<Arc<RgbImage>> {
        self.frame(entry, 0)
    }

    pub fn sample_entry(&self, rng: &mut RngStream) -> usize {
        rng.below(self.entries.len() as u64) as usize
    }
}

/// Reflects `i` into `[0, n)` with period `2n` (edge pixels repeated).
#[inline]
pub fn mirror_index(i: i64, n: u32) -> u32 {
    let n = n as i64;
    let m = i.rem_euclid(2 * n);
    (if m < n { m } else { 2 * n - 1 - m }) as u32
}

/// `window` cut from the mirror-tiled extension of `image`.
pub fn crop_mirrored(image: &RgbImage, window: CropWindow) -> RgbImage {
    let (iw, ih) = image.dimensions();
    RgbImage::from_fn(window.width, window.height, |x, y| {
        let sx = mirror_index(window.x as i64 + x as i64, iw);
        let sy = mirror_index(window.y as i64 + y as i64, ih);
        *image.get_pixel(sx, sy)
    })
}

/// A window of `width × height` placed uniformly over the valid positions
/// in `image`, which is first mirror-tiled up to the window size if smaller.
pub fn sample_window(rng: &mut RngStream, image_size: (u32, u32), width: u32, height: u32) -> CropWindow {
    let tiled_w = image_size.0.max(width);
    let tiled_h = image_size.1.max(height);
    let x = rng.below((tiled_w - width + 1) as u64) as u32;
    let y = rng.below((tiled_h - height + 1) as u64) as u32;
    CropWindow { x, y, width, height }
}

/// A random crop of `size` (the shape's bounding box, px) from a random entry.
pub fn sample_crop(pool: &TexturePool, rng: &mut RngStream, size: (u32, u32)) -> Result<(usize, CropWindow, RgbImage)> {
    let entry = pool.sample_entry(rng);
    let image = pool.image(entry)?;
    let window = sample_window(rng, image.dimensions(), size.0, size.1);
    Ok((entry, window, crop_mirrored(&image, window)))
}

/// The crop of texture-video `entry` at frame `t`; times past the end hold
/// the last frame.
pub fn dynamic_patch(pool: &TexturePool, entry: usize, window: CropWindow, t: u32) -> Result<RgbImage> {
    let count = pool.frame_count(entry);
    if count == 0 {
        return Err(Error::MissingFrames(pool.root.join(&pool.entries[entry].id)));
    }
    let frame = pool.frame(entry, (t as usize).min(count - 1))?;
    Ok(crop_mirrored(&frame, window))
}

/// Nearest-neighbour resize sampling source pixel `floor((x + ½)·w_in / w_out)`.
pub fn resize_nearest(image: &RgbImage, width: u32, height: u32) -> RgbImage {
    let (iw, ih) = image.dimensions();
    if (iw, ih) == (width, height) {
        return image.clone();
    }
    let xs: Vec<u32> = (0..width)
        .map(|x| ((((2 * x as u64 + 1) * iw as u64) / (2 * width as u64)) as u32).min(iw - 1))
        .collect();
    let ys: Vec<u32> = (0..height)
        .map(|y| ((((2 * y as u64 + 1) * ih as u64) / (2 * height as u64)) as u32).min(ih - 1))
        .collect();
    RgbImage::from_fn(width, height, |x, y| *image.get_pixel(xs[x as usize], ys[y as usize]))
}

/// A video repeating `image`, resized to the canvas, for `frames` frames.
pub fn static_video_from_image(image: &RgbImage, frames: u32, width: u32, height: u32, fps: u16, seed: u64) -> Result<VideoTensor> {
    if frames == 0 {
        return Err(Error::InvalidShape("static video needs at least one frame".into()));
    }
    let frame = resize_nearest(image, width, height).into_raw();
    let data = frame.repeat(frames as usize);
    VideoTensor::new(width, height, frames, fps, seed, data)
}

/// `patch + offset`, saturating per channel.
pub fn add_offset(patch: &mut RgbImage, offset: [u8; 3]) {
    for px in patch.pixels_mut() {
        for c in 0..3 {
            px.0[c] = px.0[c].saturating_add(offset[c]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    fn gradient(w: u32, h: u32, tag: u8) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| Rgb([x as u8, y as u8, tag]))
    }

    #[test]
    fn directory_pool_is_sorted_and_stable() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.png", "a.png", "c.ppm"] {
            gradient(4, 4, 0).save(dir.path().join(name)).unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let pool = load_pool(dir.path(), PoolKind::StaticImages, None).unwrap();
        assert_eq!(pool.entry_ids().collect::<Vec<_>>(), ["a.png", "b.png", "c.ppm"]);
        let again = load_pool(dir.path(), PoolKind::StaticImages, None).unwrap();
        assert_eq!(pool, again);
        let capped = load_pool(dir.path(), PoolKind::StaticImages, Some(2)).unwrap();
        assert_eq!(capped.len(), 2);
        assert_eq!(pool.image(2).unwrap().dimensions(), (4, 4));
    }

    #[test]
    fn empty_directory_is_pool_empty() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_pool(dir.path(), PoolKind::StaticImages, None),
            Err(Error::PoolEmpty(_))
        ));
        assert!(matches!(
            load_pool(dir.path().join("missing"), PoolKind::StaticImages, None),
            Err(Error::PathUnreadable { .. })
        ));
    }

    #[test]
    fn texture_video_frames_sort_numerically() {
        let dir = tempfile::tempdir().unwrap();
        let vid = dir.path().join("v0");
        fs::create_dir(&vid).unwrap();
        for t in [10u8, 2, 1] {
            gradient(3, 3, t).save(vid.join(format!("{t}.png"))).unwrap();
        }
        fs::create_dir(dir.path().join("empty")).unwrap();
        let pool = load_pool(dir.path(), PoolKind::TextureVideos, None).unwrap();
        assert_eq!(pool.len(), 1);
        assert_eq!(pool.skipped(), 1);
        assert_eq!(pool.frame_count(0), 3);
        let tags: Vec<u8> = (0..3).map(|t| pool.frame(0, t).unwrap().get_pixel(0, 0).0[2]).collect();
        assert_eq!(tags, [1, 2, 10]);
    }

    #[test]
    fn crop_of_full_size_is_whole_image() {
        let pool = TexturePool::from_images("mem", vec![gradient(50, 40, 3)]).unwrap();
        let mut rng = RngStream::new(1);
        let (entry, window, patch) = sample_crop(&pool, &mut rng, (50, 40)).unwrap();
        assert_eq!(entry, 0);
        assert_eq!((window.x, window.y), (0, 0));
        assert_eq!(patch, *pool.image(0).unwrap());
    }

    #[test]
    fn small_images_are_mirror_tiled() {
        let img = gradient(3, 2, 0);
        let patch = crop_mirrored(&img, CropWindow { x: 0, y: 0, width: 8, height: 2 });
        let xs: Vec<u8> = (0..8).map(|x| patch.get_pixel(x, 0).0[0]).collect();
        assert_eq!(xs, [0, 1, 2, 2, 1, 0, 0, 1]);
        let mut rng = RngStream::new(2);
        for _ in 0..100 {
            let w = sample_window(&mut rng, (3, 2), 8, 5);
            assert_eq!((w.x, w.y), (0, 0));
            let w = sample_window(&mut rng, (30, 20), 8, 5);
            assert!(w.x + w.width <= 30 && w.y + w.height <= 20);
        }
    }

    #[test]
    fn entries_are_sampled_uniformly() {
        let pool = TexturePool::from_images("mem", (0..10).map(|i| gradient(4, 4, i)).collect()).unwrap();
        let mut rng = RngStream::new(77);
        let mut counts = [0u32; 10];
        for _ in 0..10_000 {
            let (entry, _, _) = sample_crop(&pool, &mut rng, (2, 2)).unwrap();
            counts[entry] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 0.1).abs() <= 0.01, "{counts:?}");
        }
    }

    #[test]
    fn crops_reproduce_with_same_seed() {
        let pool = TexturePool::from_images("mem", (0..4).map(|i| gradient(64, 64, i)).collect()).unwrap();
        let a = sample_crop(&pool, &mut RngStream::new(5), (20, 13)).unwrap();
        let b = sample_crop(&pool, &mut RngStream::new(5), (20, 13)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn static_video_repeats_resized_image() {
        let img = gradient(256, 256, 9);
        let v = static_video_from_image(&img, 1, 256, 256, 25, 0).unwrap();
        assert_eq!(v.frame(0), img.as_raw().as_slice());
        let v = static_video_from_image(&gradient(10, 7, 1), 5, 32, 16, 25, 0).unwrap();
        assert_eq!(v.frames, 5);
        assert!(v.frames_iter().all(|f| f == v.frame(0)));
        assert!(static_video_from_image(&img, 0, 8, 8, 25, 0).is_err());
    }

    #[test]
    fn dynamic_patches_follow_frames_and_clamp() {
        let frames = |n: u8| (0..n).map(|t| gradient(16, 16, t * 10)).collect::<Vec<_>>();
        let pool = TexturePool::from_videos("mem", vec![frames(1), frames(2)]).unwrap();
        let window = CropWindow { x: 3, y: 4, width: 5, height: 6 };
        let single: Vec<RgbImage> = (0..4).map(|t| dynamic_patch(&pool, 0, window, t).unwrap()).collect();
        assert!(single.iter().all(|p| *p == single[0]));

        // direct crops of frames 0 and 1
        let expect = |t: usize| crop_mirrored(&pool.frame(1, t).unwrap(), window);
        assert_eq!(dynamic_patch(&pool, 1, window, 0).unwrap(), expect(0));
        assert_eq!(dynamic_patch(&pool, 1, window, 1).unwrap(), expect(1));
        assert_eq!(dynamic_patch(&pool, 1, window, 50).unwrap(), expect(1));
        assert_ne!(expect(0), expect(1));
        assert!(TexturePool::from_videos("mem", vec![vec![]]).is_err());
    }

    #[test]
    fn offsets_saturate() {
        let mut p = RgbImage::from_pixel(1, 1, Rgb([250, 10, 0]));
        add_offset(&mut p, [10, 10, 10]);
        assert_eq!(p.get_pixel(0, 0).0, [255, 20, 10]);
    }
}
