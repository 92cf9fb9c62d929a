//! Index-addressed video generation.

use std::sync::Arc;

use crate::config::{Background, GeneratorConfig, MixtureSource, TextureSource};
use crate::error::{Error, Result};
use crate::mixture::{self, RecordedVideoPool};
use crate::par::Execution;
use crate::raster;
use crate::rng::{derive_video_seed, RngStream};
use crate::scene::{self, SceneSpec, ScenePools};
use crate::texture::{self, load_pool, PoolKind, TexturePool};
use crate::video::VideoTensor;

/// Stream id (under the video seed) that drives scene sampling.
pub const SCENE_STREAM: u64 = 2;

/// Loaded pool behind one mixture component.
#[derive(Debug, Clone)]
pub enum MixturePool {
    Generator,
    Images(Arc<TexturePool>),
    Videos(Arc<RecordedVideoPool>),
}

/// A validated config with its pools loaded. Video `i` is a pure function of
/// `(config, i)`.
#[derive(Debug, Clone)]
pub struct Generator {
    cfg: GeneratorConfig,
    pools: ScenePools,
    mixture_pools: Vec<MixturePool>,
    exec: Execution,
}

impl Generator {
    /// Validates `cfg` and loads every pool it names from disk.
    pub fn new(cfg: GeneratorConfig) -> Result<Self> {
        let cfg = cfg.validate()?;
        let limit = cfg.pool_limit;
        let texture = match &cfg.texture_source {
            TextureSource::SolidColor => None,
            src => {
                let kind = if src.is_dynamic() { PoolKind::TextureVideos } else { PoolKind::StaticImages };
                let path = src.pool_path().expect("textured sources name a pool");
                Some(Arc::new(load_pool(path, kind, limit)?))
            }
        };
        let background = match &cfg.background {
            Background::PoolImage(p) => Some(Arc::new(load_pool(p, PoolKind::StaticImages, limit)?)),
            _ => None,
        };
        let mixture_pools = cfg
            .mixture
            .iter()
            .map(|c| {
                Ok(match &c.source {
                    MixtureSource::Generator => MixturePool::Generator,
                    MixtureSource::StaticImages { path, .. } => {
                        MixturePool::Images(Arc::new(load_pool(path, PoolKind::StaticImages, limit)?))
                    }
                    MixtureSource::RealVideos { path } => {
                        MixturePool::Videos(Arc::new(RecordedVideoPool::load(path, limit)?))
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { cfg, pools: ScenePools { texture, background }, mixture_pools, exec: Execution::default() })
    }

    /// A generator over already-loaded pools; pool paths in `cfg` are not
    /// touched, but every other invariant is checked.
    pub fn with_pools(cfg: GeneratorConfig, pools: ScenePools, mixture_pools: Vec<MixturePool>) -> Result<Self> {
        let issues: Vec<_> = cfg
            .issues()
            .into_iter()
            .filter(|i| !matches!(i, crate::error::ConfigIssue::MissingPool { .. }))
            .collect();
        if !issues.is_empty() {
            return Err(Error::InvalidConfig(issues));
        }
        if mixture_pools.len() != cfg.mixture.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} mixture components but {} pools",
                cfg.mixture.len(),
                mixture_pools.len()
            )));
        }
        Ok(Self { cfg, pools, mixture_pools, exec: Execution::default() })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.cfg
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn video_seed(&self, index: u64) -> u64 {
        derive_video_seed(self.cfg.global_seed, index)
    }

    /// The mixture component video `index` is drawn from.
    pub fn component(&self, index: u64) -> Option<usize> {
        mixture::choose_component(&self.cfg.mixture, &RngStream::new(self.video_seed(index)))
    }

    /// The initial scene of video `index`, ignoring the mixture.
    pub fn scene(&self, index: u64) -> Result<SceneSpec> {
        let seed = self.video_seed(index);
        let mut rng = RngStream::new(seed).fork(SCENE_STREAM);
        let mut scene = scene::sample_scene(&self.cfg, &self.pools, &mut rng)?;
        scene.seed = seed;
        Ok(scene)
    }

    pub fn video(&self, index: u64) -> Result<VideoTensor> {
        let seed = self.video_seed(index);
        let choice = self.component(index).map(|i| (&self.cfg.mixture[i].source, &self.mixture_pools[i]));
        match choice {
            None | Some((MixtureSource::Generator, _)) => raster::render_video(&self.scene(index)?, self.exec),
            Some((MixtureSource::StaticImages { frames, .. }, MixturePool::Images(pool))) => {
                let mut rng = RngStream::new(seed).fork(SCENE_STREAM);
                let entry = pool.sample_entry(&mut rng);
                let t = match frames {
                    Some(t) => *t,
                    None => rng.range_inclusive(self.cfg.duration_range.lo as u64, self.cfg.duration_range.hi as u64) as u32,
                };
                let image = pool.image(entry)?;
                texture::static_video_from_image(&image, t, self.cfg.width, self.cfg.height, self.cfg.fps, seed)
            }
            Some((MixtureSource::RealVideos { .. }, MixturePool::Videos(pool))) => {
                let mut rng = RngStream::new(seed).fork(SCENE_STREAM);
                let entry = rng.below(pool.len() as u64) as usize;
                pool.video(entry, self.cfg.fps)
            }
            Some((source, _)) => Err(Error::DimensionMismatch(format!("no pool loaded for mixture source {source:?}"))),
        }
    }

    /// Videos `start, start + 1, …` without end.
    pub fn iter_from(&self, start: u64) -> OnTheFly<'_> {
        OnTheFly { generator: self, next: Some(start) }
    }
}

/// Unbounded on-the-fly stream of videos; yields each index once.
#[derive(Debug)]
pub struct OnTheFly<'a> {
    generator: &'a Generator,
    next: Option<u64>,
}

impl OnTheFly<'_> {
    /// Index of the next video to be produced.
    pub fn next_index(&self) -> Option<u64> {
        self.next
    }
}

impl Iterator for OnTheFly<'_> {
    type Item = (u64, Result<VideoTensor>);

    fn next(&mut self) -> Option<Self::Item> {
        let index = self.next?;
        self.next = index.checked_add(1);
        Some((index, self.generator.video(index)))
    }
}
