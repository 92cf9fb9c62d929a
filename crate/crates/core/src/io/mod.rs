//! Persistence: the `.svid` container, dataset directories and manifests.

pub mod container;
pub mod dataset;
pub mod manifest;

pub use container::{read_video, write_video, VideoHeader};
pub use dataset::{export_png_frames, generate_dataset, GenerationSummary};
pub use manifest::{Manifest, VideoRecord};
