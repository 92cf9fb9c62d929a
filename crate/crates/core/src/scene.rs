//! Initial scene sampling: shapes, appearance, depth and kinematics.
//!
//! Draw order from a video's scene stream is fixed: background, duration,
//! object count, then per object (in placement order) kind, geometry,
//! position, appearance and kinematics. Levels below a feature's introduction
//! skip that feature's draws.

use std::f64::consts::PI;
use std::sync::Arc;

use image::RgbImage;

use crate::config::{Background, GeneratorConfig, Interval, Level, TextureSource};
use crate::error::{Error, Result};
use crate::geometry::{Affine2, Vec2};
use crate::rng::RngStream;
use crate::texture::{self, CropWindow, TexturePool};

/// Minimum polygon area, px².
pub const MIN_POLYGON_AREA: f64 = 1.0;
/// Degenerate polygons are redrawn this many times before falling back to a regular polygon.
pub const MAX_POLYGON_RETRIES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Circle,
    Triangle,
    Quadrilateral,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Circle, ShapeKind::Triangle, ShapeKind::Quadrilateral];
}

/// Shape in object-local coordinates; the local origin is the area centroid.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeGeometry {
    Circle { radius: f64 },
    Triangle([Vec2; 3]),
    /// Vertices in counter-clockwise angular order.
    Quadrilateral([Vec2; 4]),
}

impl ShapeGeometry {
    pub fn kind(&self) -> ShapeKind {
        match self {
            ShapeGeometry::Circle { .. } => ShapeKind::Circle,
            ShapeGeometry::Triangle(_) => ShapeKind::Triangle,
            ShapeGeometry::Quadrilateral(_) => ShapeKind::Quadrilateral,
        }
    }

    pub fn vertices(&self) -> &[Vec2] {
        match self {
            ShapeGeometry::Circle { .. } => &[],
            ShapeGeometry::Triangle(v) => v,
            ShapeGeometry::Quadrilateral(v) => v,
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            ShapeGeometry::Circle { radius } => PI * radius * radius,
            _ => polygon_signed_area(self.vertices()).abs(),
        }
    }

    pub fn centroid(&self) -> Vec2 {
        match self {
            ShapeGeometry::Circle { .. } => Vec2::ZERO,
            _ => polygon_centroid(self.vertices()),
        }
    }

    /// Axis-aligned local bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        match self {
            ShapeGeometry::Circle { radius } => (Vec2::new(-radius, -radius), Vec2::new(*radius, *radius)),
            _ => {
                let vs = self.vertices();
                let mut lo = vs[0];
                let mut hi = vs[0];
                for v in &vs[1..] {
                    lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
                    hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
                }
                (lo, hi)
            }
        }
    }

    /// Texture patch size covering the bounding box, px.
    pub fn patch_size(&self) -> (u32, u32) {
        let (lo, hi) = self.bounding_box();
        let w = (hi.x - lo.x).ceil().max(1.0) as u32;
        let h = (hi.y - lo.y).ceil().max(1.0) as u32;
        (w, h)
    }
}

pub fn polygon_signed_area(vs: &[Vec2]) -> f64 {
    let n = vs.len();
    (0..n).map(|i| vs[i].cross(vs[(i + 1) % n])).sum::<f64>() * 0.5
}

pub fn polygon_centroid(vs: &[Vec2]) -> Vec2 {
    let n = vs.len();
    let a = polygon_signed_area(vs);
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let (p, q) = (vs[i], vs[(i + 1) % n]);
        let w = p.cross(q);
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Vec2::new(cx / (6.0 * a), cy / (6.0 * a))
}

/// Where the pixels of a shape come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PatchSource {
    /// A crop taken once at sampling time (offset already applied).
    Static(Arc<RgbImage>),
    /// A fixed window into a texture video, re-read every frame.
    Dynamic { pool: Arc<TexturePool>, entry: usize, window: CropWindow },
}

/// A texture attached to a shape. Local point `q` reads patch pixel
/// `floor(q - anchor)`, mirror-tiled.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureRef {
    pub entry: usize,
    pub window: CropWindow,
    pub anchor: Vec2,
    pub offset: Option<[u8; 3]>,
    pub source: PatchSource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Appearance {
    Solid([u8; 3]),
    Texture(TextureRef),
}

/// Per-object motion parameters. Rates are per frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Kinematics {
    pub direction: f64,
    pub speed: f64,
    pub accel: f64,
    pub rotation_rate: f64,
    pub scale_rate: [f64; 2],
    pub shear_rate: [f64; 2],
}

impl Kinematics {
    pub fn is_still(&self) -> bool {
        self.speed == 0.0
            && self.accel <= 0.0
            && self.rotation_rate == 0.0
            && self.scale_rate == [0.0; 2]
            && self.shear_rate == [0.0; 2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectState {
    pub geometry: ShapeGeometry,
    pub appearance: Appearance,
    /// Z-index; higher values are drawn on top.
    pub depth: u32,
    /// World position of the local origin (the shape centroid), px.
    pub position: Vec2,
    pub motion: Kinematics,
    /// Cumulative shape transform about the centroid (no translation part).
    pub transform: Affine2,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedBackground {
    Color([u8; 3]),
    /// Already resized to the canvas.
    Image(Arc<RgbImage>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub fps: u16,
    pub duration: u32,
    pub seed: u64,
    pub background: ResolvedBackground,
    /// In placement order; `objects[i].depth == i`.
    pub objects: Vec<ObjectState>,
}

impl SceneSpec {
    /// True when every frame renders identically.
    pub fn is_static(&self) -> bool {
        self.objects.iter().all(|o| {
            o.motion.is_still() && !matches!(&o.appearance, Appearance::Texture(t) if matches!(t.source, PatchSource::Dynamic { .. }))
        })
    }
}

/// Pools a scene may draw from.
#[derive(Debug, Clone, Default)]
pub struct ScenePools {
    pub texture: Option<Arc<TexturePool>>,
    pub background: Option<Arc<TexturePool>>,
}

/// Exponential radius before clamping: `-mean·ln(u)`, `u` in `(0, 1]`.
pub fn sample_radius_unclamped(rng: &mut RngStream, mean_radius: f64) -> f64 {
    rng.exponential(mean_radius)
}

pub fn sample_radius(rng: &mut RngStream, mean_radius: f64, clamp: Interval) -> f64 {
    sample_radius_unclamped(rng, mean_radius).clamp(clamp.lo, clamp.hi)
}

pub fn sample_kind(rng: &mut RngStream, level: Level) -> ShapeKind {
    if level.has_shape_variety() {
        ShapeKind::ALL[rng.below(3) as usize]
    } else {
        ShapeKind::Circle
    }
}

fn regular_polygon(n: usize, radius: f64) -> Vec<Vec2> {
    (0..n)
        .map(|i| Vec2::from_polar(radius, 2.0 * PI * i as f64 / n as f64))
        .collect()
}

fn recentered(mut vs: Vec<Vec2>) -> Vec<Vec2> {
    let c = polygon_centroid(&vs);
    for v in &mut vs {
        *v = *v - c;
    }
    vs
}

/// A shape of `kind`. Polygons draw a bounding radius from the radius law and
/// place their vertices on that circle at uniform angles, sorted
/// counter-clockwise, which makes them convex.
pub fn sample_geometry(rng: &mut RngStream, cfg: &GeneratorConfig, kind: ShapeKind) -> ShapeGeometry {
    let radius = sample_radius(rng, cfg.mean_radius, cfg.radius_clamp);
    let n = match kind {
        ShapeKind::Circle => return ShapeGeometry::Circle { radius },
        ShapeKind::Triangle => 3,
        ShapeKind::Quadrilateral => 4,
    };
    let mut vertices = None;
    for _ in 0..=MAX_POLYGON_RETRIES {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.uniform(-PI, PI)).collect();
        angles.sort_by(f64::total_cmp);
        let vs: Vec<Vec2> = angles.iter().map(|&a| Vec2::from_polar(radius, a)).collect();
        if polygon_signed_area(&vs) >= MIN_POLYGON_AREA {
            vertices = Some(vs);
            break;
        }
    }
    let vs = recentered(vertices.unwrap_or_else(|| regular_polygon(n, radius)));
    match kind {
        ShapeKind::Triangle => ShapeGeometry::Triangle([vs[0], vs[1], vs[2]]),
        _ => ShapeGeometry::Quadrilateral([vs[0], vs[1], vs[2], vs[3]]),
    }
}

fn uniform_in(rng: &mut RngStream, r: Interval) -> f64 {
    rng.uniform(r.lo, r.hi)
}

/// Motion parameters gated by level: speed and heading from `MovingCircles`,
/// shape rates from `TransformingShapes`, acceleration from `AcceleratingShapes`.
pub fn sample_kinematics(rng: &mut RngStream, cfg: &GeneratorConfig) -> Kinematics {
    let level = cfg.level;
    let mut k = Kinematics::default();
    if !level.has_motion() {
        return k;
    }
    k.direction = rng.uniform(-PI, PI);
    k.speed = uniform_in(rng, cfg.speed_range) * cfg.speed_multiplier;
    if level.has_transforms() {
        k.rotation_rate = uniform_in(rng, cfg.rotation_range);
        k.scale_rate = [uniform_in(rng, cfg.scale_rate_range), uniform_in(rng, cfg.scale_rate_range)];
        k.shear_rate = [uniform_in(rng, cfg.shear_rate_range), uniform_in(rng, cfg.shear_rate_range)];
    }
    if level.has_acceleration() {
        k.accel = uniform_in(rng, cfg.accel_range);
    }
    k
}

fn pool_for<'a>(pool: &'a Option<Arc<TexturePool>>, what: &str) -> Result<&'a Arc<TexturePool>> {
    match pool {
        Some(p) if !p.is_empty() => Ok(p),
        Some(p) => Err(Error::PoolEmpty(p.root().to_owned())),
        None => Err(Error::PoolEmpty(format!("<{what} pool not loaded>").into())),
    }
}

fn sample_appearance(
    rng: &mut RngStream,
    source: &TextureSource,
    pools: &ScenePools,
    geometry: &ShapeGeometry,
) -> Result<Appearance> {
    let (inner, saturated) = match source {
        TextureSource::SolidColor => return Ok(Appearance::Solid(rng.rgb())),
        TextureSource::Saturated(inner) => (inner.as_ref(), true),
        other => (other, false),
    };
    let pool = pool_for(&pools.texture, "texture")?;
    let size = geometry.patch_size();
    let anchor = geometry.bounding_box().0;
    let texture = match inner {
        TextureSource::DynamicPool(_) => {
            let entry = pool.sample_entry(rng);
            let first = pool.frame(entry, 0)?;
            let window = texture::sample_window(rng, first.dimensions(), size.0, size.1);
            let offset = saturated.then(|| rng.rgb());
            TextureRef {
                entry,
                window,
                anchor,
                offset,
                source: PatchSource::Dynamic { pool: pool.clone(), entry, window },
            }
        }
        _ => {
            let (entry, window, mut patch) = texture::sample_crop(pool, rng, size)?;
            let offset = saturated.then(|| rng.rgb());
            if let Some(c) = offset {
                texture::add_offset(&mut patch, c);
            }
            TextureRef { entry, window, anchor, offset, source: PatchSource::Static(Arc::new(patch)) }
        }
    };
    Ok(Appearance::Texture(texture))
}

fn sample_background(rng: &mut RngStream, cfg: &GeneratorConfig, pools: &ScenePools) -> Result<ResolvedBackground> {
    Ok(match &cfg.background {
        Background::Black => ResolvedBackground::Color([0; 3]),
        Background::RandomColor => ResolvedBackground::Color(rng.rgb()),
        Background::PoolImage(_) => {
            let pool = pool_for(&pools.background, "background")?;
            let entry = pool.sample_entry(rng);
            let img = pool.image(entry)?;
            ResolvedBackground::Image(Arc::new(texture::resize_nearest(&img, cfg.width, cfg.height)))
        }
    })
}

/// Samples the complete initial scene of one video from `rng`.
pub fn sample_scene(cfg: &GeneratorConfig, pools: &ScenePools, rng: &mut RngStream) -> Result<SceneSpec> {
    let background = sample_background(rng, cfg, pools)?;
    let duration = rng.range_inclusive(cfg.duration_range.lo as u64, cfg.duration_range.hi as u64) as u32;
    let count = rng.range_inclusive(cfg.object_count_range.lo as u64, cfg.object_count_range.hi as u64) as u32;
    let mut objects = Vec::with_capacity(count as usize);
    for depth in 0..count {
        let kind = sample_kind(rng, cfg.level);
        let geometry = sample_geometry(rng, cfg, kind);
        let position = Vec2::new(rng.uniform(0.0, cfg.width as f64), rng.uniform(0.0, cfg.height as f64));
        let appearance = sample_appearance(rng, &cfg.texture_source, pools, &geometry)?;
        let motion = sample_kinematics(rng, cfg);
        objects.push(ObjectState {
            geometry,
            appearance,
            depth,
            position,
            motion,
            transform: Affine2::IDENTITY,
        });
    }
    Ok(SceneSpec {
        width: cfg.width,
        height: cfg.height,
        fps: cfg.fps,
        duration,
        seed: rng.seed(),
        background,
        objects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::IntInterval;
    use crate::stats::ks::ks_statistic;
    use std::collections::HashSet;

    #[test]
    fn unit_draw_gives_lower_clamp() {
        // -mean·ln(1) = 0, clamped up to 4 px.
        assert_eq!((-(25.6f64) * 1.0f64.ln()).clamp(4.0, 192.0), 4.0);
        let mut rng = RngStream::new(3);
        for _ in 0..1000 {
            let r = sample_radius(&mut rng, 25.6, Interval::new(4.0, 192.0));
            assert!((4.0..=192.0).contains(&r));
        }
    }

    #[test]
    fn radius_mean_and_distribution() {
        let mean = 25.6;
        let mut rng = RngStream::new(11);
        let xs: Vec<f64> = (0..100_000).map(|_| sample_radius_unclamped(&mut rng, mean)).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((m / mean - 1.0).abs() < 0.02, "mean {m}");
        let d = ks_statistic(&xs[..10_000], |x| 1.0 - (-x / mean).exp());
        assert!(d < 0.02, "KS {d}");
    }

    #[test]
    fn static_circles_only_produce_circles() {
        let cfg = GeneratorConfig::for_level(Level::StaticCircles);
        let mut rng = RngStream::new(1);
        for _ in 0..1000 {
            let kind = sample_kind(&mut rng, cfg.level);
            assert_eq!(sample_geometry(&mut rng, &cfg, kind).kind(), ShapeKind::Circle);
        }
    }

    #[test]
    fn polygons_are_non_degenerate_convex_and_centered() {
        let cfg = GeneratorConfig::for_level(Level::MovingShapes);
        let mut rng = RngStream::new(5);
        for i in 0..10_000 {
            let kind = if i % 2 == 0 { ShapeKind::Triangle } else { ShapeKind::Quadrilateral };
            let g = sample_geometry(&mut rng, &cfg, kind);
            assert!(g.area() >= MIN_POLYGON_AREA);
            let vs = g.vertices();
            let n = vs.len();
            for j in 0..n {
                let turn = (vs[(j + 1) % n] - vs[j]).cross(vs[(j + 2) % n] - vs[(j + 1) % n]);
                assert!(turn >= -1e-9, "non-convex turn {turn}");
            }
            assert!(g.centroid().norm() < 1e-9);
        }
    }

    #[test]
    fn kinds_are_uniform_at_moving_shapes() {
        let mut rng = RngStream::new(8);
        let mut counts = [0u32; 3];
        for _ in 0..30_000 {
            counts[sample_kind(&mut rng, Level::MovingShapes) as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn kinematics_are_gated_by_level() {
        let mut rng = RngStream::new(2);
        for level in Level::ALL {
            let cfg = GeneratorConfig::for_level(level);
            for _ in 0..200 {
                let k = sample_kinematics(&mut rng, &cfg);
                assert_eq!(k.speed != 0.0, level.has_motion());
                assert_eq!(k.rotation_rate != 0.0, level.has_transforms());
                assert_eq!(k.scale_rate != [0.0; 2], level.has_transforms());
                assert_eq!(k.shear_rate != [0.0; 2], level.has_transforms());
                assert_eq!(k.accel != 0.0, level.has_acceleration());
                if level.has_motion() {
                    assert!(cfg.speed_range.contains(k.speed));
                }
            }
        }
    }

    #[test]
    fn speed_multiplier_halves_mean_speed() {
        let mut cfg = GeneratorConfig::for_level(Level::MovingCircles);
        cfg.speed_multiplier = 0.5;
        let mut rng = RngStream::new(4);
        let mean = (0..10_000).map(|_| sample_kinematics(&mut rng, &cfg).speed).sum::<f64>() / 10_000.0;
        assert!((mean - 1.05).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn scene_depths_follow_placement() {
        let cfg = GeneratorConfig::for_level(Level::AcceleratingShapes);
        for seed in 0..50 {
            let scene = sample_scene(&cfg, &ScenePools::default(), &mut RngStream::new(seed)).unwrap();
            let depths: Vec<u32> = scene.objects.iter().map(|o| o.depth).collect();
            assert_eq!(depths, (0..scene.objects.len() as u32).collect::<Vec<_>>());
            assert!(cfg.object_count_range.contains(scene.objects.len() as u32));
        }
    }

    #[test]
    fn durations_stay_in_range() {
        let cfg = GeneratorConfig::for_level(Level::MovingCircles);
        let mut seen = HashSet::new();
        for seed in 0..1000 {
            let scene = sample_scene(&cfg, &ScenePools::default(), &mut RngStream::new(seed)).unwrap();
            assert!((100..=200).contains(&scene.duration));
            seen.insert(scene.duration);
        }
        assert!(seen.contains(&100) || seen.contains(&200) || seen.len() > 90);
    }

    #[test]
    fn scenes_are_deterministic() {
        let mut cfg = GeneratorConfig::for_level(Level::TexturedShapes);
        cfg.texture_source = TextureSource::Saturated(Box::new(TextureSource::StaticPool("mem".into())));
        cfg.object_count_range = IntInterval::new(3, 6);
        let imgs = (0..3).map(|i| RgbImage::from_fn(40, 30, |x, y| image::Rgb([x as u8, y as u8, i]))).collect();
        let pools = ScenePools {
            texture: Some(Arc::new(TexturePool::from_images("mem", imgs).unwrap())),
            background: None,
        };
        let a = sample_scene(&cfg, &pools, &mut RngStream::new(99)).unwrap();
        let b = sample_scene(&cfg, &pools, &mut RngStream::new(99)).unwrap();
        assert_eq!(a, b);
        assert!(a.objects.iter().all(|o| matches!(&o.appearance, Appearance::Texture(t) if t.offset.is_some())));
    }

    #[test]
    fn textured_scene_without_pool_fails() {
        let mut cfg = GeneratorConfig::for_level(Level::TexturedShapes);
        cfg.texture_source = TextureSource::StaticPool("x".into());
        let err = sample_scene(&cfg, &ScenePools::default(), &mut RngStream::new(0)).unwrap_err();
        assert!(matches!(err, Error::PoolEmpty(_)));
    }
}
