//! Dataset recipes.
//!
//! A [`GeneratorConfig`] is a flat JSON document; every key has a default so a
//! file only needs to name what it changes. Defaults are the standard
//! generation settings (256×256 at 25 fps, 100–200 frames, speed 1.2–3.0
//! px/frame, acceleration ±0.06, rotation ±π/100, scale and shear ±0.005).

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ConfigIssue, Error, Result};

/// Tolerance on the sum of mixture ratios.
pub const MIXTURE_SUM_TOLERANCE: f64 = 1e-9;

/// Number of training videos for the textured and image-crop datasets.
pub const DEFAULT_TEXTURED_DATASET_SIZE: u64 = 9537;

/// Closed real interval, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn symmetric(half_width: f64) -> Self {
        Self::new(-half_width, half_width)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn is_ordered(&self) -> bool {
        self.lo <= self.hi
    }
}

impl From<[f64; 2]> for Interval {
    fn from([lo, hi]: [f64; 2]) -> Self {
        Self { lo, hi }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Closed integer interval, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct IntInterval {
    pub lo: u32,
    pub hi: u32,
}

impl IntInterval {
    pub const fn new(lo: u32, hi: u32) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: u32) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl From<[u32; 2]> for IntInterval {
    fn from([lo, hi]: [u32; 2]) -> Self {
        Self { lo, hi }
    }
}

impl From<IntInterval> for [u32; 2] {
    fn from(i: IntInterval) -> Self {
        [i.lo, i.hi]
    }
}

/// Generator level. Each level keeps every property of the previous one and
/// adds one more.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    /// Overlapping solid circles copied into every frame.
    StaticCircles,
    /// Circles translating with constant speed.
    MovingCircles,
    /// Circles, triangles and quadrilaterals.
    MovingShapes,
    /// Adds per-frame scale, rotation and shear.
    TransformingShapes,
    /// Adds scalar acceleration along the heading.
    AcceleratingShapes,
    /// Replaces solid colors with the configured texture source.
    TexturedShapes,
}

impl Level {
    pub const ALL: [Level; 6] = [
        Level::StaticCircles,
        Level::MovingCircles,
        Level::MovingShapes,
        Level::TransformingShapes,
        Level::AcceleratingShapes,
        Level::TexturedShapes,
    ];

    pub fn has_motion(self) -> bool {
        self >= Level::MovingCircles
    }

    pub fn has_shape_variety(self) -> bool {
        self >= Level::MovingShapes
    }

    pub fn has_transforms(self) -> bool {
        self >= Level::TransformingShapes
    }

    pub fn has_acceleration(self) -> bool {
        self >= Level::AcceleratingShapes
    }

    pub fn is_textured(self) -> bool {
        self == Level::TexturedShapes
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("level serializes");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    Black,
    RandomColor,
    /// A random image from this pool, resized to the canvas.
    PoolImage(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextureSource {
    SolidColor,
    /// Directory of still images; each shape gets a crop.
    StaticPool(PathBuf),
    /// Directory of texture videos (one subdirectory of frames per entry).
    DynamicPool(PathBuf),
    /// The inner source with one random RGB offset added per shape.
    Saturated(Box<TextureSource>),
}

impl TextureSource {
    /// Pool directory behind the source, if any.
    pub fn pool_path(&self) -> Option<&Path> {
        match self {
            TextureSource::SolidColor => None,
            TextureSource::StaticPool(p) | TextureSource::DynamicPool(p) => Some(p),
            TextureSource::Saturated(inner) => inner.pool_path(),
        }
    }

    pub fn is_saturated(&self) -> bool {
        matches!(self, TextureSource::Saturated(_))
    }

    pub fn is_dynamic(&self) -> bool {
        match self {
            TextureSource::DynamicPool(_) => true,
            TextureSource::Saturated(inner) => inner.is_dynamic(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureSource {
    /// The procedural generator described by the rest of the config.
    Generator,
    /// A still image from the pool repeated over every frame. `frames`
    /// fixes the length; otherwise it is drawn from `duration_range`.
    StaticImages {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frames: Option<u32>,
    },
    /// Pre-recorded videos (`.svid` files or frame directories), passed through.
    RealVideos { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub source: MixtureSource,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSize {
    Fixed(u64),
    OnTheFly(OnTheFlyTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnTheFlyTag {
    OnTheFly,
}

impl DatasetSize {
    pub const ON_THE_FLY: DatasetSize = DatasetSize::OnTheFly(OnTheFlyTag::OnTheFly);

    pub fn fixed(self) -> Option<u64> {
        match self {
            DatasetSize::Fixed(n) => Some(n),
            DatasetSize::OnTheFly(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub level: Level,
    pub width: u32,
    pub height: u32,
    pub fps: u16,
    /// Frame count, inclusive.
    pub duration_range: IntInterval,
    pub object_count_range: IntInterval,
    /// Mean of the exponential radius law, px.
    pub mean_radius: f64,
    /// Radii are clamped into this interval after sampling, px.
    pub radius_clamp: Interval,
    /// Initial speed, px/frame.
    pub speed_range: Interval,
    pub speed_multiplier: f64,
    /// px/frame².
    pub accel_range: Interval,
    /// rad/frame.
    pub rotation_range: Interval,
    /// Per-frame scale rate, both axes.
    pub scale_rate_range: Interval,
    /// Per-frame shear rate, both axes.
    pub shear_rate_range: Interval,
    pub background: Background,
    pub texture_source: TextureSource,
    /// Use only the first `n` entries (sorted order) of every pool.
    pub pool_limit: Option<usize>,
    pub mixture: Vec<MixtureComponent>,
    pub dataset_size: DatasetSize,
    pub global_seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self::for_level(Level::AcceleratingShapes)
    }
}

impl GeneratorConfig {
    /// Standard settings for `level` on a 256×256 canvas.
    pub fn for_level(level: Level) -> Self {
        let dataset_size = if level.is_textured() {
            DatasetSize::Fixed(DEFAULT_TEXTURED_DATASET_SIZE)
        } else {
            DatasetSize::ON_THE_FLY
        };
        Self {
            level,
            width: 256,
            height: 256,
            fps: 25,
            duration_range: IntInterval::new(100, 200),
            object_count_range: IntInterval::new(5, 30),
            mean_radius: 25.6,
            radius_clamp: Interval::new(4.0, 192.0),
            speed_range: Interval::new(1.2, 3.0),
            speed_multiplier: 1.0,
            accel_range: Interval::symmetric(0.06),
            rotation_range: Interval::symmetric(PI / 100.0),
            scale_rate_range: Interval::symmetric(0.005),
            shear_rate_range: Interval::symmetric(0.005),
            background: Background::Black,
            texture_source: TextureSource::SolidColor,
            pool_limit: None,
            mixture: Vec::new(),
            dataset_size,
            global_seed: 0,
        }
    }

    /// Resizes the canvas and rescales the radius defaults with it
    /// (mean 0.1·min side, clamp `[4, 0.75·min side]`).
    pub fn with_canvas(mut self, width: u32, height: u32) -> Self {
        let side = width.min(height) as f64;
        self.width = width;
        self.height = height;
        self.mean_radius = 0.1 * side;
        self.radius_clamp = Interval::new(4.0_f64.min(0.75 * side), 0.75 * side);
        self
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::PathUnreadable {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Canonical (compact) serialized form; the config hash covers these bytes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form.
    pub fn hash(&self) -> [u8; 32] {
        Sha256::digest(self.canonical_bytes()).into()
    }

    pub fn hash_hex(&self) -> String {
        hex::encode(self.hash())
    }

    /// Applies one `key=value` override. The value is parsed as JSON and
    /// falls back to a plain string, so `level=moving_circles` and
    /// `speed_range=[1,2]` both work.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::ConfigParse(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        let value: serde_json::Value = serde_json::from_str(raw.trim())
            .unwrap_or_else(|_| serde_json::Value::String(raw.trim().to_owned()));
        let mut doc = serde_json::to_value(&*self)?;
        let fields = doc.as_object_mut().expect("config is an object");
        if !fields.contains_key(key) {
            return Err(Error::ConfigParse(format!("unknown config key `{key}`")));
        }
        fields.insert(key.to_owned(), value);
        *self = serde_json::from_value(doc)?;
        Ok(())
    }

    /// Checks every invariant and returns the config unchanged if all hold.
    pub fn validate(self) -> Result<Self> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidConfig(issues))
        }
    }

    /// All violated invariants, in field order.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let mut positive = |field: &'static str, ok: bool, what: &str| {
            if !ok {
                issues.push(ConfigIssue::InvalidValue {
                    field,
                    reason: what.to_owned(),
                });
            }
        };
        positive("width", self.width > 0, "must be > 0");
        positive("height", self.height > 0, "must be > 0");
        positive("fps", self.fps > 0, "must be > 0");
        positive("duration_range", self.duration_range.lo >= 1, "videos need at least one frame");
        positive("mean_radius", self.mean_radius > 0.0, "must be > 0");
        positive("radius_clamp", self.radius_clamp.lo > 0.0, "lower clamp must be > 0");
        positive("speed_range", self.speed_range.lo >= 0.0, "speeds must be >= 0");
        positive(
            "speed_multiplier",
            self.speed_multiplier >= 0.0 && self.speed_multiplier.is_finite(),
            "must be finite and >= 0",
        );
        positive("pool_limit", self.pool_limit != Some(0), "must be > 0 when set");
        positive(
            "dataset_size",
            self.dataset_size != DatasetSize::Fixed(0),
            "must be > 0 when fixed",
        );

        let int_ranges = [
            ("duration_range", self.duration_range),
            ("object_count_range", self.object_count_range),
        ];
        for (field, r) in int_ranges {
            if r.lo > r.hi {
                issues.push(ConfigIssue::InvalidRange {
                    field,
                    lo: r.lo as f64,
                    hi: r.hi as f64,
                });
            }
        }
        let ranges = [
            ("radius_clamp", self.radius_clamp),
            ("speed_range", self.speed_range),
            ("accel_range", self.accel_range),
            ("rotation_range", self.rotation_range),
            ("scale_rate_range", self.scale_rate_range),
            ("shear_rate_range", self.shear_rate_range),
        ];
        for (field, r) in ranges {
            if !r.is_ordered() || !r.lo.is_finite() || !r.hi.is_finite() {
                issues.push(ConfigIssue::InvalidRange { field, lo: r.lo, hi: r.hi });
            }
        }
        for (field, r) in [("scale_rate_range", self.scale_rate_range), ("shear_rate_range", self.shear_rate_range)] {
            if r.lo <= -1.0 {
                issues.push(ConfigIssue::InvalidValue {
                    field,
                    reason: "rates must stay above -1 to keep transforms invertible".into(),
                });
            }
        }

        match (&self.texture_source, self.level.is_textured()) {
            (TextureSource::SolidColor, true) => issues.push(ConfigIssue::InvalidValue {
                field: "texture_source",
                reason: "textured_shapes needs a texture pool".into(),
            }),
            (src, false) if *src != TextureSource::SolidColor => issues.push(ConfigIssue::InvalidValue {
                field: "texture_source",
                reason: format!("level {} renders solid colors only", self.level),
            }),
            _ => {}
        }
        if let TextureSource::Saturated(inner) = &self.texture_source {
            if !matches!(**inner, TextureSource::StaticPool(_) | TextureSource::DynamicPool(_)) {
                issues.push(ConfigIssue::InvalidValue {
                    field: "texture_source",
                    reason: "saturated must wrap a static or dynamic pool".into(),
                });
            }
        }

        if !self.mixture.is_empty() {
            if let Some(bad) = self.mixture.iter().find(|c| !(c.ratio >= 0.0) || !c.ratio.is_finite()) {
                issues.push(ConfigIssue::InvalidMixture {
                    reason: format!("ratio {} is negative or not finite", bad.ratio),
                });
            }
            let sum: f64 = self.mixture.iter().map(|c| c.ratio).sum();
            if (sum - 1.0).abs() > MIXTURE_SUM_TOLERANCE {
                issues.push(ConfigIssue::InvalidMixture {
                    reason: format!("ratios sum to {sum}, expected 1"),
                });
            }
        }

        for path in self.pool_paths() {
            if let Err(err) = std::fs::read_dir(path) {
                issues.push(ConfigIssue::MissingPool {
                    path: path.to_owned(),
                    reason: err.to_string(),
                });
            }
        }
        issues
    }

    /// Every directory the config reads from.
    pub fn pool_paths(&self) -> Vec<&Path> {
        let mut paths = Vec::new();
        if let Some(p) = self.texture_source.pool_path() {
            paths.push(p);
        }
        if let Background::PoolImage(p) = &self.background {
            paths.push(p.as_path());
        }
        for c in &self.mixture {
            match &c.source {
                MixtureSource::Generator => {}
                MixtureSource::StaticImages { path, .. } | MixtureSource::RealVideos { path } => {
                    paths.push(path.as_path())
                }
            }
        }
        paths
    }
}
