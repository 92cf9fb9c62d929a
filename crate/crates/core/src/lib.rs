//! Deterministic procedural video synthesis.
//!
//! Scenes of random shapes are sampled from a [`GeneratorConfig`], animated
//! and rasterized into [`VideoTensor`]s. Video `i` of a config is a pure
//! function of `(config, i)`, whether it is written to disk, iterated on the
//! fly or served over TCP.

pub mod config;
pub mod error;
pub mod generate;
pub mod geometry;
pub mod io;
pub mod mixture;
pub mod motion;
pub mod par;
pub mod raster;
pub mod rng;
pub mod scene;
pub mod stats;
pub mod stream;
pub mod texture;
pub mod video;

pub use config::{GeneratorConfig, Level};
pub use error::{ConfigIssue, Error, Result};
pub use generate::Generator;
pub use par::Execution;
pub use rng::{derive_video_seed, RngStream};
pub use video::VideoTensor;
