//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from [`RngStream`], a
//! SplitMix64 generator: output `k` of a stream seeded with `s` is
//! `mix64(s + (k + 1) * GOLDEN_GAMMA)`. The algorithm is small enough to
//! reimplement bit-exactly in any language, and continuous distributions are
//! derived from the raw 64-bit words by the documented transforms below, so a
//! `(config, seed)` pair reproduces the same dataset on every platform and at
//! every thread count.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const VIDEO_SALT: u64 = 0x5356_4944_5345_4544; // "SVIDSEED"
const FORK_SALT: u64 = 0x464F_524B_5354_524D; // "FORKSTRM"

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn combine(seed: u64, salt: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ salt).wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)))
}

/// Seed of video `video_index` in the dataset generated from `global_seed`.
///
/// For a fixed global seed the map is a bijection of the index (an odd
/// multiplier, an add and `mix64` are all invertible), so per-dataset seeds
/// never collide.
pub fn derive_video_seed(global_seed: u64, video_index: u64) -> u64 {
    combine(global_seed, VIDEO_SALT, video_index)
}

/// A deterministic stream of 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of words drawn so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// An independent child stream identified by `stream_id`.
    pub fn fork(&self, stream_id: u64) -> RngStream {
        RngStream::new(combine(self.seed, FORK_SALT, stream_id))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`; safe as a logarithm argument.
    #[inline]
    pub fn next_f64_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`; returns `lo` when the interval is empty.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Exponential with the given mean, by inverse CDF: `-mean * ln(u)`, `u` in `(0, 1]`.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        -mean * self.next_f64_open_closed().ln()
    }

    /// Uniform integer in `[0, n)`, `n > 0`. Lemire's multiply-and-reject.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Uniform integer in the inclusive interval `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        match (hi - lo).checked_add(1) {
            Some(span) => lo + self.below(span),
            None => self.next_u64(),
        }
    }

    pub fn rgb(&mut self) -> [u8; 3] {
        let w = self.next_u64();
        [(w >> 56) as u8, (w >> 48) as u8, (w >> 40) as u8]
    }
}
