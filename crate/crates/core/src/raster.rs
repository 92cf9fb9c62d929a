//! Painter's-algorithm rendering of scenes into frames.
//!
//! Pixel `(x, y)` is sampled at its centre `(x + ½, y + ½)`. Objects are
//! painted in ascending depth with hard edges. Each row of a shape is filled
//! as a single span found analytically (edge intersections for polygons, a
//! quadratic for transformed circles) and then snapped to the exact
//! point-in-shape predicate at both ends, so the filled set is exactly the
//! set of pixel centres the predicate accepts.

use std::sync::Mutex;

use image::RgbImage;

use crate::error::{Error, Result};
use crate::geometry::{Affine2, Vec2};
use crate::motion;
use crate::par::{self, Execution};
use crate::scene::{Appearance, ObjectState, PatchSource, ResolvedBackground, SceneSpec, ShapeGeometry};
use crate::texture::{self, mirror_index};
use crate::video::{frame_len, VideoTensor};

/// World-space coverage of one placed shape.
#[derive(Debug, Clone)]
pub enum Coverage {
    /// `|inv·(p - center)|² ≤ r²`.
    Ellipse { center: Vec2, inv: Affine2, radius_sq: f64, forward: Affine2, radius: f64 },
    /// Convex polygon with world vertices; `sign` is its orientation.
    Convex { vertices: Vec<Vec2>, sign: f64 },
}

impl Coverage {
    /// `None` when the transform is singular.
    pub fn new(geometry: &ShapeGeometry, position: Vec2, transform: &Affine2) -> Option<Coverage> {
        match geometry {
            ShapeGeometry::Circle { radius } => Some(Coverage::Ellipse {
                center: position,
                inv: transform.inverse()?,
                radius_sq: radius * radius,
                forward: *transform,
                radius: *radius,
            }),
            _ => {
                if transform.determinant() == 0.0 {
                    return None;
                }
                let vertices: Vec<Vec2> = geometry
                    .vertices()
                    .iter()
                    .map(|&v| position + transform.apply_linear(v))
                    .collect();
                let area = crate::scene::polygon_signed_area(&vertices);
                Some(Coverage::Convex { vertices, sign: area.signum() })
            }
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            Coverage::Ellipse { center, inv, radius_sq, .. } => {
                let q = inv.apply_linear(p - *center);
                q.dot(q) <= *radius_sq
            }
            Coverage::Convex { vertices, sign } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    (b - a).cross(p - a) * sign >= 0.0
                })
            }
        }
    }

    fn y_extent(&self) -> (f64, f64) {
        match self {
            Coverage::Ellipse { center, forward, radius, .. } => {
                let h = radius * (forward.m[1][0].powi(2) + forward.m[1][1].powi(2)).sqrt();
                (center.y - h, center.y + h)
            }
            Coverage::Convex { vertices, .. } => vertices
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.y), hi.max(v.y))),
        }
    }

    /// Continuous x-interval covered on the horizontal line `y = yc`.
    fn row_interval(&self, yc: f64) -> Option<(f64, f64)> {
        match self {
            Coverage::Ellipse { center, inv, radius_sq, .. } => {
                // |dx·c0 + dy·c1|² ≤ r², with c0, c1 the columns of inv.
                let c0 = Vec2::new(inv.m[0][0], inv.m[1][0]);
                let c1 = Vec2::new(inv.m[0][1], inv.m[1][1]);
                let dy = yc - center.y;
                let a = c0.dot(c0);
                let b = 2.0 * dy * c0.dot(c1);
                let c = dy * dy * c1.dot(c1) - radius_sq;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                Some((center.x + (-b - s) / (2.0 * a), center.x + (-b + s) / (2.0 * a)))
            }
            Coverage::Convex { vertices, .. } => {
                let n = vertices.len();
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    if (a.y <= yc && yc <= b.y) || (b.y <= yc && yc <= a.y) {
                        let x = if a.y == b.y { a.x.min(b.x) } else { a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y) };
                        let x2 = if a.y == b.y { a.x.max(b.x) } else { x };
                        lo = lo.min(x);
                        hi = hi.max(x2);
                    }
                }
                (lo <= hi).then_some((lo, hi))
            }
        }
    }

    /// Calls `f(y, x0, x1)` for every non-empty row span inside a
    /// `width × height` canvas (inclusive pixel bounds).
    pub fn for_each_span(&self, width: u32, height: u32, mut f: impl FnMut(u32, u32, u32)) {
        let (ymin, ymax) = self.y_extent();
        if !(ymin.is_finite() && ymax.is_finite()) {
            return;
        }
        let y0 = ((ymin - 0.5).floor() as i64 - 1).max(0);
        let y1 = ((ymax - 0.5).ceil() as i64 + 1).min(height as i64 - 1);
        let w = width as i64;
        for y in y0..=y1 {
            let yc = y as f64 + 0.5;
            let Some((xa, xb)) = self.row_interval(yc) else { continue };
            let lo = ((xa - 0.5).ceil() as i64 - 1).max(0);
            let hi = ((xb - 0.5).floor() as i64 + 1).min(w - 1);
            if lo > hi {
                continue;
            }
            let inside = |x: i64| self.contains(Vec2::new(x as f64 + 0.5, yc));
            let mut l = lo;
            while l <= hi && !inside(l) {
                l += 1;
            }
            if l > hi {
                continue;
            }
            while l > 0 && inside(l - 1) {
                l -= 1;
            }
            let mut r = hi;
            while r > l && !inside(r) {
                r -= 1;
            }
            while r < w - 1 && inside(r + 1) {
                r += 1;
            }
            f(y as u32, l as u32, r as u32);
        }
    }
}

/// Colour of canvas pixel `pixel` for a texture attached to a shape at
/// `position` with cumulative `transform`: the pixel centre is mapped back to
/// local coordinates `q` and `patch[floor(q - anchor)]` is read, mirror-tiled.
pub fn map_texture(position: Vec2, transform: &Affine2, anchor: Vec2, patch: &RgbImage, pixel: (u32, u32)) -> [u8; 3] {
    let inv = transform.inverse().unwrap_or(Affine2::IDENTITY);
    TextureSampler { position, inv, anchor, patch }.sample(pixel.0, pixel.1)
}

struct TextureSampler<'a> {
    position: Vec2,
    inv: Affine2,
    anchor: Vec2,
    patch: &'a RgbImage,
}

impl TextureSampler<'_> {
    #[inline]
    fn sample(&self, x: u32, y: u32) -> [u8; 3] {
        let p = Vec2::new(x as f64 + 0.5, y as f64 + 0.5);
        let q = self.inv.apply_linear(p - self.position) - self.anchor;
        let (w, h) = self.patch.dimensions();
        let u = mirror_index(q.x.floor() as i64, w);
        let v = mirror_index(q.y.floor() as i64, h);
        self.patch.get_pixel(u, v).0
    }
}

fn paint_background(bg: &ResolvedBackground, frame: &mut [u8]) {
    match bg {
        ResolvedBackground::Color([0, 0, 0]) => frame.fill(0),
        ResolvedBackground::Color(c) => frame.chunks_exact_mut(3).for_each(|px| px.copy_from_slice(c)),
        ResolvedBackground::Image(img) => frame.copy_from_slice(img.as_raw()),
    }
}

fn resolve_patch(texture: &crate::scene::TextureRef, t: u32) -> Result<Option<RgbImage>> {
    match &texture.source {
        PatchSource::Static(_) => Ok(None),
        PatchSource::Dynamic { pool, entry, window } => {
            let mut patch = texture::dynamic_patch(pool, *entry, *window, t)?;
            if let Some(c) = texture.offset {
                texture::add_offset(&mut patch, c);
            }
            Ok(Some(patch))
        }
    }
}

/// Paints frame `t` into `frame` given each object's pose `(position, transform)`.
pub fn render_poses_into(scene: &SceneSpec, poses: &[(Vec2, Affine2)], t: u32, frame: &mut [u8]) -> Result<()> {
    let (w, h) = (scene.width, scene.height);
    debug_assert_eq!(frame.len(), frame_len(w, h));
    paint_background(&scene.background, frame);
    let mut order: Vec<usize> = (0..scene.objects.len()).collect();
    order.sort_by_key(|&i| scene.objects[i].depth);
    for i in order {
        let obj = &scene.objects[i];
        let (position, transform) = poses[i];
        let Some(cov) = Coverage::new(&obj.geometry, position, &transform) else { continue };
        match &obj.appearance {
            Appearance::Solid(c) => cov.for_each_span(w, h, |y, x0, x1| {
                let row = y as usize * w as usize;
                for px in frame[(row + x0 as usize) * 3..(row + x1 as usize + 1) * 3].chunks_exact_mut(3) {
                    px.copy_from_slice(c);
                }
            }),
            Appearance::Texture(tex) => {
                let dynamic = resolve_patch(tex, t)?;
                let patch = match (&dynamic, &tex.source) {
                    (Some(p), _) => p,
                    (None, PatchSource::Static(p)) => p.as_ref(),
                    (None, PatchSource::Dynamic { .. }) => unreachable!(),
                };
                let Some(inv) = transform.inverse() else { continue };
                let sampler = TextureSampler { position, inv, anchor: tex.anchor, patch };
                cov.for_each_span(w, h, |y, x0, x1| {
                    let row = y as usize * w as usize;
                    for x in x0..=x1 {
                        let o = (row + x as usize) * 3;
                        frame[o..o + 3].copy_from_slice(&sampler.sample(x, y));
                    }
                });
            }
        }
    }
    Ok(())
}

/// Frame `t` of `scene` with objects in the given `states`.
pub fn render_frame(scene: &SceneSpec, states: &[ObjectState], t: u32) -> Result<Vec<u8>> {
    let poses: Vec<(Vec2, Affine2)> = states.iter().map(|s| (s.position, s.transform)).collect();
    let mut frame = vec![0; frame_len(scene.width, scene.height)];
    render_poses_into(scene, &poses, t, &mut frame)?;
    Ok(frame)
}

/// All `scene.duration` frames. Object poses are stepped sequentially and
/// frames are painted independently (in parallel under [`Execution::Parallel`]).
pub fn render_video(scene: &SceneSpec, exec: Execution) -> Result<VideoTensor> {
    let mut video = VideoTensor::zeros(scene.width, scene.height, scene.duration, scene.fps, scene.seed);
    let n = video.frame_len();
    if scene.is_static() {
        let poses: Vec<(Vec2, Affine2)> = scene.objects.iter().map(|s| (s.position, s.transform)).collect();
        let (first, rest) = video.data.split_at_mut(n);
        render_poses_into(scene, &poses, 0, first)?;
        rest.chunks_exact_mut(n).for_each(|f| f.copy_from_slice(first));
        return Ok(video);
    }
    let trajectory = motion::trajectory(&scene.objects, scene.duration);
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    par::for_each_chunk_mut(exec, &mut video.data, n, |t, frame| {
        if let Err(e) = render_poses_into(scene, &trajectory[t], t as u32, frame) {
            failure.lock().unwrap().get_or_insert(e);
        }
    });
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(video),
    }
}
