#![allow(dead_code)]

use std::path::Path;

use image::RgbImage;
use synthvid_core::config::{GeneratorConfig, IntInterval, Level, TextureSource};
use synthvid_core::RngStream;

/// Writes `n` procedural RGB textures as PNGs into `dir`. Each one is a
/// two-tone pattern (noise, stripes, checkers or waves) between a random
/// accent colour and a gradient over four random corner colours.
pub fn write_texture_pool(dir: &Path, n: usize, size: u32, seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = RngStream::new(seed);
    for i in 0..n {
        let corners = [rng.rgb(), rng.rgb(), rng.rgb(), rng.rgb()];
        let accent = rng.rgb();
        let period = 2.0 + rng.uniform(0.0, 14.0);
        let angle = rng.uniform(0.0, std::f64::consts::PI);
        let kind = i % 4;
        let mut noise = rng.fork(i as u64 + 100);
        let side = size as f64;
        let img = RgbImage::from_fn(size, size, |x, y| {
            let (xf, yf) = (x as f64, y as f64);
            let t: f64 = match kind {
                0 => noise.next_f64(),
                1 => 0.5 + 0.5 * ((xf * angle.cos() + yf * angle.sin()) / period * std::f64::consts::TAU).sin(),
                2 => (((xf / period) as u32 + (yf / period) as u32) % 2) as f64,
                _ => 0.5 + 0.25 * ((xf / period).sin() + (yf / (period * 1.7)).cos()),
            };
            let t = if t > 0.5 { 1.0 } else { 0.0 };
            let (u, v) = (xf / side, yf / side);
            let w = [(1.0 - u) * (1.0 - v), u * (1.0 - v), (1.0 - u) * v, u * v];
            let channel = |c: usize| {
                let base: f64 = corners.iter().zip(w).map(|(k, w)| k[c] as f64 * w).sum();
                (base * (1.0 - t) + accent[c] as f64 * t).round().clamp(0.0, 255.0) as u8
            };
            image::Rgb([channel(0), channel(1), channel(2)])
        });
        img.save(dir.join(format!("tex_{i:03}.png"))).unwrap();
    }
}

pub fn textured_config(pool: &Path) -> GeneratorConfig {
    let mut cfg = GeneratorConfig::for_level(Level::TexturedShapes);
    cfg.texture_source = TextureSource::StaticPool(pool.to_path_buf());
    cfg
}

/// A small, short-video variant of a level for fast checks.
pub fn small_config(level: Level, side: u32, frames: (u32, u32), seed: u64) -> GeneratorConfig {
    let mut cfg = GeneratorConfig::for_level(level).with_canvas(side, side);
    cfg.duration_range = IntInterval::new(frames.0, frames.1);
    cfg.global_seed = seed;
    cfg
}
