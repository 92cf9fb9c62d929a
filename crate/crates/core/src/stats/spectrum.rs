//! Power-law fit of the radially averaged power spectrum.
//!
//! Amplitude is modelled as `A / |f|^α`, so power falls as `|f|^(−2α)`; the
//! reported exponent is the amplitude one.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::fit::fit_line;

pub const MIN_SPECTRUM_FRAMES: usize = 16;
/// Fit band in cycles per pixel: `[LOW_BAND_BINS / min(H, W), HIGH_BAND]`.
pub const LOW_BAND_BINS: f64 = 4.0;
pub const HIGH_BAND: f64 = 0.45;

/// A single-channel frame in arbitrary intensity units.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height || width == 0 || height == 0 {
            return Err(Error::InvalidShape(format!("{width}×{height} frame with {} values", data.len())));
        }
        Ok(Self { width, height, data })
    }

    /// Rec.601 luma of a packed RGB frame.
    pub fn from_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != width * height * 3 {
            return Err(Error::InvalidShape(format!("{width}×{height} RGB frame with {} bytes", rgb.len())));
        }
        let data = rgb.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect();
        Self::new(width, height, data)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { width: self.width, height: self.height, data: self.data.iter().map(|v| v * factor).collect() }
    }
}

pub fn luma(r: u8, g: u8, b: u8) -> f64 {
    0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
}

/// Periodic Hann window of length `n`.
fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()).collect()
}

/// Signed frequency of DFT bin `k` out of `n`, cycles per sample.
fn bin_frequency(k: usize, n: usize) -> f64 {
    let k = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
    k / n as f64
}

/// Windowed 2-D power spectrum, row-major `height × width`.
pub fn power_spectrum(frame: &GrayFrame) -> Vec<f64> {
    let (w, h) = (frame.width, frame.height);
    let mean = frame.data.iter().sum::<f64>() / frame.data.len() as f64;
    let (wx, wy) = (hann(w), hann(h));
    let mut buf: Vec<Complex<f64>> = frame
        .data
        .iter()
        .enumerate()
        .map(|(i, v)| Complex::new((v - mean) * wx[i % w] * wy[i / w], 0.0))
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(w).process(&mut buf);
    let mut column = vec![Complex::new(0.0, 0.0); h];
    let col_fft = planner.plan_fft_forward(h);
    for x in 0..w {
        for y in 0..h {
            column[y] = buf[y * w + x];
        }
        col_fft.process(&mut column);
        for y in 0..h {
            buf[y * w + x] = column[y];
        }
    }
    buf.iter().map(|c| c.norm_sqr()).collect()
}

/// Pooled radial power over many frames of one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumAccumulator {
    width: usize,
    height: usize,
    frames: usize,
    power: Vec<f64>,
    freq: Vec<f64>,
    count: Vec<u64>,
}

impl SpectrumAccumulator {
    pub fn new(width: usize, height: usize) -> Self {
        let bins = width.min(height);
        Self { width, height, frames: 0, power: vec![0.0; bins], freq: vec![0.0; bins], count: vec![0; bins] }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn add_frame(&mut self, frame: &GrayFrame) -> Result<()> {
        if (frame.width, frame.height) != (self.width, self.height) {
            return Err(Error::DimensionMismatch(format!(
                "frame is {}×{}, spectrum expects {}×{}",
                frame.width, frame.height, self.width, self.height
            )));
        }
        let spectrum = power_spectrum(frame);
        let side = self.width.min(self.height) as f64;
        for y in 0..self.height {
            let fy = bin_frequency(y, self.height);
            for x in 0..self.width {
                let f = fy.hypot(bin_frequency(x, self.width));
                let bin = (f * side) as usize;
                if bin == 0 || bin >= self.power.len() {
                    continue;
                }
                self.power[bin] += spectrum[y * self.width + x];
                self.freq[bin] += f;
                self.count[bin] += 1;
            }
        }
        self.frames += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &SpectrumAccumulator) -> Result<()> {
        if (other.width, other.height) != (self.width, self.height) {
            return Err(Error::DimensionMismatch("merging spectra of different frame sizes".into()));
        }
        for i in 0..self.power.len() {
            self.power[i] += other.power[i];
            self.freq[i] += other.freq[i];
            self.count[i] += other.count[i];
        }
        self.frames += other.frames;
        Ok(())
    }

    /// `(mean |f|, mean power)` per populated radial bin.
    pub fn radial_profile(&self) -> Vec<(f64, f64)> {
        (0..self.power.len())
            .filter(|&i| self.count[i] > 0)
            .map(|i| (self.freq[i] / self.count[i] as f64, self.power[i] / self.count[i] as f64))
            .collect()
    }

    pub fn finish(&self) -> Result<SpectrumFit> {
        if self.frames < MIN_SPECTRUM_FRAMES {
            return Err(Error::SampleTooSmall { needed: MIN_SPECTRUM_FRAMES, got: self.frames });
        }
        let lo = LOW_BAND_BINS / self.width.min(self.height) as f64;
        let band: Vec<(f64, f64)> =
            self.radial_profile().into_iter().filter(|&(f, _)| f >= lo && f <= HIGH_BAND).collect();
        if band.iter().any(|&(_, p)| p <= 0.0) || band.len() < 2 {
            return Err(Error::ZeroSpectrum);
        }
        let xs: Vec<f64> = band.iter().map(|b| b.0.ln()).collect();
        let ys: Vec<f64> = band.iter().map(|b| b.1.ln()).collect();
        let line = fit_line(&xs, &ys);
        Ok(SpectrumFit { alpha: -line.slope / 2.0, power_slope: line.slope, r2: line.r2, bins: band.len(), frames: self.frames })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFit {
    /// Amplitude exponent.
    pub alpha: f64,
    pub power_slope: f64,
    pub r2: f64,
    pub bins: usize,
    pub frames: usize,
}

pub fn estimate_spectrum_alpha(frames: &[GrayFrame]) -> Result<SpectrumFit> {
    let first = frames.first().ok_or(Error::SampleTooSmall { needed: MIN_SPECTRUM_FRAMES, got: 0 })?;
    let mut acc = SpectrumAccumulator::new(first.width, first.height);
    for f in frames {
        acc.add_frame(f)?;
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn gaussian(rng: &mut RngStream) -> f64 {
        let u1 = rng.next_f64_open_closed();
        let u2 = rng.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn white_noise(rng: &mut RngStream, n: usize) -> GrayFrame {
        GrayFrame::new(n, n, (0..n * n).map(|_| gaussian(rng)).collect()).unwrap()
    }

    /// Independent synthesis: shape white noise by |f|^(−α) in the Fourier
    /// domain with a plain 2-D transform (no window).
    fn power_law_frame(rng: &mut RngStream, n: usize, alpha: f64) -> GrayFrame {
        let mut buf: Vec<Complex<f64>> = (0..n * n).map(|_| Complex::new(gaussian(rng), 0.0)).collect();
        let fft2 = |buf: &mut Vec<Complex<f64>>, inverse: bool| {
            let mut p = FftPlanner::<f64>::new();
            let plan = if inverse { p.plan_fft_inverse(n) } else { p.plan_fft_forward(n) };
            for row in buf.chunks_exact_mut(n) {
                plan.process(row);
            }
            let mut t = vec![Complex::new(0.0, 0.0); n * n];
            for y in 0..n {
                for x in 0..n {
                    t[x * n + y] = buf[y * n + x];
                }
            }
            for row in t.chunks_exact_mut(n) {
                plan.process(row);
            }
            for y in 0..n {
                for x in 0..n {
                    buf[y * n + x] = t[x * n + y];
                }
            }
        };
        fft2(&mut buf, false);
        let freq = |k: usize| if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } / n as f64;
        for y in 0..n {
            for x in 0..n {
                let f = (freq(x).powi(2) + freq(y).powi(2)).sqrt();
                buf[y * n + x] *= if f == 0.0 { 0.0 } else { f.powf(-alpha) };
            }
        }
        fft2(&mut buf, true);
        GrayFrame::new(n, n, buf.iter().map(|c| c.re).collect()).unwrap()
    }

    #[test]
    fn white_noise_is_flat() {
        let mut rng = RngStream::new(1);
        let frames: Vec<_> = (0..16).map(|_| white_noise(&mut rng, 128)).collect();
        let fit = estimate_spectrum_alpha(&frames).unwrap();
        assert!(fit.alpha.abs() < 0.05, "alpha {}", fit.alpha);
    }

    #[test]
    fn synthesized_exponents_are_recovered() {
        for (i, alpha) in [0.5, 1.0, 2.0].into_iter().enumerate() {
            let mut rng = RngStream::new(10 + i as u64);
            let frames: Vec<_> = (0..16).map(|_| power_law_frame(&mut rng, 128, alpha)).collect();
            let fit = estimate_spectrum_alpha(&frames).unwrap();
            assert!((fit.alpha - alpha).abs() <= 0.1, "alpha {alpha}: got {}", fit.alpha);
        }
    }

    #[test]
    fn brightness_scaling_leaves_alpha_unchanged() {
        let mut rng = RngStream::new(3);
        let frames: Vec<_> = (0..16).map(|_| power_law_frame(&mut rng, 64, 1.3)).collect();
        let dim: Vec<_> = frames.iter().map(|f| f.scaled(0.5)).collect();
        let a = estimate_spectrum_alpha(&frames).unwrap().alpha;
        let b = estimate_spectrum_alpha(&dim).unwrap().alpha;
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn constant_frames_have_no_spectrum() {
        let frames = vec![GrayFrame::new(32, 32, vec![7.0; 1024]).unwrap(); 16];
        assert!(matches!(estimate_spectrum_alpha(&frames), Err(Error::ZeroSpectrum)));
    }

    #[test]
    fn needs_sixteen_frames() {
        let mut rng = RngStream::new(4);
        let frames: Vec<_> = (0..15).map(|_| white_noise(&mut rng, 32)).collect();
        assert!(matches!(estimate_spectrum_alpha(&frames), Err(Error::SampleTooSmall { .. })));
    }

    #[test]
    fn luma_weights() {
        let f = GrayFrame::from_rgb(1, 1, &[255, 255, 255]).unwrap();
        assert!((f.data[0] - 255.0).abs() < 1e-9);
        assert!((luma(100, 0, 0) - 29.9).abs() < 1e-12);
    }

    #[test]
    fn merged_accumulators_match_sequential() {
        let mut rng = RngStream::new(5);
        let frames: Vec<_> = (0..20).map(|_| white_noise(&mut rng, 32)).collect();
        let mut a = SpectrumAccumulator::new(32, 32);
        let mut b = SpectrumAccumulator::new(32, 32);
        for f in &frames[..10] {
            a.add_frame(f).unwrap();
        }
        for f in &frames[10..] {
            b.add_frame(f).unwrap();
        }
        a.merge(&b).unwrap();
        let whole = estimate_spectrum_alpha(&frames).unwrap();
        assert!((a.finish().unwrap().alpha - whole.alpha).abs() < 1e-9);
    }
}
