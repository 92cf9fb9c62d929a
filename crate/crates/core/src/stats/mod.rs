//! Dataset statistics: spectrum exponent, Lab colour Gaussians and their
//! symmetric KL divergence, feature diversity, Fréchet distance and Pearson
//! correlation, plus the sampling pipeline that computes them for a dataset.

pub mod analyze;
pub mod diversity;
pub mod features;
pub mod fit;
pub mod frechet;
pub mod gaussian;
pub mod ks;
pub mod lab;
pub mod pearson;
pub mod spectrum;

pub use analyze::{analyze_dataset, AnalysisOptions, DatasetReport, Reference, StatsReport, VideoSource};
pub use diversity::{diversity_logdet, FeatureMatrix, FeatureSource, LogDet};
pub use frechet::{frechet_distance, FeatureGaussian};
pub use gaussian::{fit_color_gaussian, symmetric_kl, Gaussian3};
pub use lab::rgb_to_lab;
pub use pearson::pearson_r;
pub use spectrum::{estimate_spectrum_alpha, GrayFrame, SpectrumFit};
