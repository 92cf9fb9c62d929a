//! Seeded sub-sampling of a dataset and the per-dataset statistics report.
//!
//! `videos` distinct videos are drawn, `frames_per_video` distinct frames
//! from each. Every sampled frame feeds the diversity descriptor; the first
//! `frame_samples` of them (in draw order) also feed the spectrum and colour
//! statistics. Each video is decoded once and dropped after use.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::Generator;
use crate::io::container::read_video;
use crate::io::dataset::list_videos;
use crate::io::manifest::{Manifest, MANIFEST_FILE};
use crate::par::{self, Execution};
use crate::rng::{derive_video_seed, RngStream};
use crate::stats::diversity::{diversity_logdet, FeatureMatrix, FeatureSource, LogDet};
use crate::stats::features::{builtin_descriptor, DESCRIPTOR_DIM};
use crate::stats::frechet::FeatureGaussian;
use crate::stats::gaussian::{finish_color, symmetric_kl, Gaussian3, MomentAccumulator};
use crate::stats::lab::rgb_to_lab;
use crate::stats::pearson::pearson_r;
use crate::stats::spectrum::{GrayFrame, SpectrumAccumulator, SpectrumFit};
use crate::video::VideoTensor;

/// Anything that can hand out videos by index.
pub trait VideoSource: Sync {
    fn len(&self) -> u64;
    fn video(&self, index: u64) -> Result<VideoTensor>;
    fn label(&self) -> String;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A generated dataset directory.
#[derive(Debug, Clone)]
pub struct DiskDataset {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl DiskDataset {
    /// Uses the manifest when present, otherwise every `.svid` file in order.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let manifest = dir.join(MANIFEST_FILE);
        let files = if manifest.exists() {
            Manifest::load(&manifest)?.videos.iter().map(|r| dir.join(&r.filename)).collect()
        } else {
            list_videos(&dir)?
        };
        Ok(Self { dir, files })
    }
}

impl VideoSource for DiskDataset {
    fn len(&self) -> u64 {
        self.files.len() as u64
    }

    fn video(&self, index: u64) -> Result<VideoTensor> {
        read_video(&self.files[index as usize])
    }

    fn label(&self) -> String {
        self.dir.file_name().map_or_else(|| self.dir.display().to_string(), |n| n.to_string_lossy().into_owned())
    }
}

/// The first `count` videos of a generator, rendered on demand.
#[derive(Debug, Clone)]
pub struct GeneratedSource<'a> {
    pub generator: &'a Generator,
    pub count: u64,
    pub label: String,
}

impl VideoSource for GeneratedSource<'_> {
    fn len(&self) -> u64 {
        self.count
    }

    fn video(&self, index: u64) -> Result<VideoTensor> {
        // one video at a time is already parallel over videos
        self.generator.clone().with_execution(Execution::Sequential).video(index)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// What a dataset is compared against for KL and Fréchet distances.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub label: String,
    pub color: Option<Gaussian3>,
    pub features: Option<FeatureGaussian>,
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub seed: u64,
    pub frame_samples: usize,
    pub videos: usize,
    pub frames_per_video: usize,
    /// Pixels drawn (with replacement) per frame for the colour Gaussian.
    pub pixels_per_frame: usize,
    /// Use whatever the dataset offers instead of failing with `SampleTooSmall`.
    pub allow_small: bool,
    /// External features replacing the builtin descriptor.
    pub features: Option<FeatureMatrix>,
    pub reference: Option<Reference>,
    pub exec: Execution,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            frame_samples: 10_000,
            videos: 1000,
            frames_per_video: 16,
            pixels_per_frame: 1024,
            allow_small: false,
            features: None,
            reference: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub label: String,
    pub videos_sampled: usize,
    pub frames_sampled: usize,
    pub feature_rows: usize,
    pub feature_source: FeatureSource,
    pub spectrum: SpectrumFit,
    pub color: Gaussian3,
    pub diversity: LogDet,
    pub reference: Option<String>,
    pub metrics: Vec<Metric>,
    #[serde(skip)]
    pub feature_gaussian: Option<FeatureGaussian>,
}

impl DatasetReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value)
    }

    /// This dataset as a comparison target for others.
    pub fn as_reference(&self) -> Reference {
        Reference { label: self.label.clone(), color: Some(self.color), features: self.feature_gaussian.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub metric: String,
    pub r: f64,
    pub n: usize,
}

/// Reports for one or more datasets plus optional accuracy correlations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub datasets: Vec<DatasetReport>,
    pub correlations: Vec<Correlation>,
}

impl StatsReport {
    pub fn new(datasets: Vec<DatasetReport>) -> Self {
        Self { datasets, correlations: Vec::new() }
    }

    /// Pearson r between each metric and the accuracies in a
    /// `dataset,accuracy` CSV, over the datasets present in both.
    pub fn correlate(&mut self, accuracies: &[(String, f64)]) -> Result<()> {
        let matched: Vec<(&DatasetReport, f64)> = self
            .datasets
            .iter()
            .filter_map(|d| accuracies.iter().find(|(l, _)| *l == d.label).map(|(_, a)| (d, *a)))
            .collect();
        if matched.len() < 3 {
            return Err(Error::SampleTooSmall { needed: 3, got: matched.len() });
        }
        let names: Vec<String> = matched[0].0.metrics.iter().map(|m| m.name.clone()).collect();
        self.correlations.clear();
        for name in names {
            let Some(xs) = matched.iter().map(|(d, _)| d.metric(&name)).collect::<Option<Vec<f64>>>() else {
                continue;
            };
            let ys: Vec<f64> = matched.iter().map(|(_, a)| *a).collect();
            match pearson_r(&xs, &ys) {
                Ok(r) => self.correlations.push(Correlation { metric: name, r, n: xs.len() }),
                Err(e) => log::warn!("no correlation for {name}: {e}"),
            }
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per metric: `dataset,metric,value`. Correlations use the
    /// dataset column `pearson_r`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["dataset", "metric", "value"])?;
        for d in &self.datasets {
            for m in &d.metrics {
                w.write_record([d.label.as_str(), m.name.as_str(), &m.value.to_string()])?;
            }
        }
        for c in &self.correlations {
            w.write_record(["pearson_r", c.metric.as_str(), &c.r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, json_path: impl AsRef<Path>) -> Result<PathBuf> {
        let json_path = json_path.as_ref();
        fs::write(json_path, self.to_json_pretty())?;
        let csv_path = json_path.with_extension("csv");
        self.write_csv(fs::File::create(&csv_path)?)?;
        Ok(csv_path)
    }
}

/// `dataset,accuracy` rows.
pub fn read_accuracy_csv(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        dataset: String,
        accuracy: f64,
    }
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize::<Row>().map(|r| Ok(r.map(|r| (r.dataset, r.accuracy))?)).collect()
}

/// `k` distinct indices below `n`, in draw order.
fn sample_distinct(rng: &mut RngStream, n: u64, k: usize) -> Vec<u64> {
    let k = (k as u64).min(n);
    if k * 2 >= n {
        let mut all: Vec<u64> = (0..n).collect();
        for i in 0..k as usize {
            let j = i + rng.below(n - i as u64) as usize;
            all.swap(i, j);
        }
        all.truncate(k as usize);
        return all;
    }
    let mut seen = HashSet::with_capacity(k as usize);
    let mut out = Vec::with_capacity(k as usize);
    while out.len() < k as usize {
        let i = rng.below(n);
        if seen.insert(i) {
            out.push(i);
        }
    }
    out
}

struct Partial {
    spectrum: Option<SpectrumAccumulator>,
    color: MomentAccumulator,
    frame_level: usize,
    descriptors: Vec<f64>,
    frames: usize,
}

fn analyze_video(
    source: &dyn VideoSource,
    options: &AnalysisOptions,
    position: usize,
    index: u64,
    builtin: bool,
) -> Result<Partial> {
    let video = source.video(index)?;
    let (w, h) = (video.width as usize, video.height as usize);
    let mut rng = RngStream::new(derive_video_seed(options.seed, index));
    let mut chosen = sample_distinct(&mut rng, video.frames as u64, options.frames_per_video);
    chosen.sort_unstable();
    let mut part = Partial {
        spectrum: None,
        color: MomentAccumulator::default(),
        frame_level: 0,
        descriptors: Vec::new(),
        frames: chosen.len(),
    };
    for (j, &t) in chosen.iter().enumerate() {
        let frame = video.frame(t as u32);
        if builtin {
            part.descriptors.extend(builtin_descriptor(w, h, frame));
        }
        if position * options.frames_per_video + j >= options.frame_samples {
            continue;
        }
        part.frame_level += 1;
        part.spectrum.get_or_insert_with(|| SpectrumAccumulator::new(w, h)).add_frame(&GrayFrame::from_rgb(w, h, frame)?)?;
        for _ in 0..options.pixels_per_frame {
            let i = rng.below((w * h) as u64) as usize * 3;
            part.color.push(rgb_to_lab([frame[i], frame[i + 1], frame[i + 2]]));
        }
    }
    Ok(part)
}

fn ln_det3(g: &Gaussian3) -> f64 {
    Matrix3::from_fn(|r, c| g.cov[r][c]).determinant().ln()
}

pub fn analyze_dataset(source: &dyn VideoSource, options: &AnalysisOptions) -> Result<DatasetReport> {
    let available = source.len();
    if (available as usize) < options.videos && !options.allow_small {
        return Err(Error::SampleTooSmall { needed: options.videos, got: available as usize });
    }
    let mut rng = RngStream::new(options.seed);
    let picks: Vec<(usize, u64)> = sample_distinct(&mut rng, available, options.videos).into_iter().enumerate().collect();
    let builtin = options.features.is_none();
    let partials = par::map_slice(options.exec, &picks, |&(pos, index)| analyze_video(source, options, pos, index, builtin));

    let mut spectrum: Option<SpectrumAccumulator> = None;
    let mut color = MomentAccumulator::default();
    let (mut frame_level, mut frames) = (0, 0);
    let mut rows = Vec::new();
    for p in partials {
        let p = p?;
        if let Some(s) = &p.spectrum {
            match &mut spectrum {
                Some(acc) => acc.merge(s)?,
                None => spectrum = Some(s.clone()),
            }
        }
        color.merge(&p.color);
        frame_level += p.frame_level;
        frames += p.frames;
        rows.extend(p.descriptors);
    }
    if frame_level < options.frame_samples && !options.allow_small {
        return Err(Error::SampleTooSmall { needed: options.frame_samples, got: frame_level });
    }
    let spectrum = spectrum.ok_or(Error::SampleTooSmall { needed: 1, got: 0 })?.finish()?;
    let color = finish_color(&color)?;
    let features = match &options.features {
        Some(f) => f.clone(),
        None => FeatureMatrix::new(frames, DESCRIPTOR_DIM, rows, FeatureSource::Builtin)?,
    };
    let diversity = diversity_logdet(&features)?;
    let feature_gaussian = FeatureGaussian::fit(&features)?;

    let mut metrics = vec![
        Metric { name: "spectrum_alpha".into(), value: spectrum.alpha },
        Metric { name: "spectrum_r2".into(), value: spectrum.r2 },
        Metric { name: "color_mean_l".into(), value: color.mean[0] },
        Metric { name: "color_mean_a".into(), value: color.mean[1] },
        Metric { name: "color_mean_b".into(), value: color.mean[2] },
        Metric { name: "color_logdet".into(), value: ln_det3(&color) },
        Metric { name: "diversity_logdet".into(), value: diversity.value },
        Metric { name: "diversity_rank".into(), value: diversity.rank as f64 },
    ];
    if let Some(reference) = &options.reference {
        if let Some(rc) = &reference.color {
            metrics.push(Metric { name: "color_symmetric_kl".into(), value: symmetric_kl(&color, rc)? });
        }
        if let Some(rf) = &reference.features {
            metrics.push(Metric { name: "frechet_distance".into(), value: feature_gaussian.distance(rf)? });
        }
    }
    Ok(DatasetReport {
        label: source.label(),
        videos_sampled: picks.len(),
        frames_sampled: frame_level,
        feature_rows: features.rows(),
        feature_source: features.source.clone(),
        spectrum,
        color,
        diversity,
        reference: options.reference.as_ref().map(|r| r.label.clone()),
        metrics,
        feature_gaussian: Some(feature_gaussian),
    })
}
