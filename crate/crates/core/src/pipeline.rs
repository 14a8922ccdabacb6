//! End-to-end job: discover inputs, derive saliency, size the canvas, run
//! the GA and write every artifact.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{CollageError, Result};
use crate::fitness::FitnessBreakdown;
use crate::ga::{self, GaConfig, GaOutcome};
use crate::imaging::{to_gray, RgbImage};
use crate::output::{format_trace, LayoutFile};
use crate::raster::{canvas_for, rasterize, Canvas, ImageDims};
use crate::render::{render_collage, render_usage, DEFAULT_BACKGROUND};
use crate::saliency::{
    contrast_saliency, depth_to_saliency, SaliencyMap, DEFAULT_CONTRAST_BLOCK,
    DEFAULT_MEDIAN_RADIUS,
};
use crate::stereo::{compute_disparity, DisparityMap, StereoPair, StereoParams};

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp", "ppm", "pgm", "pnm"];

/// Stereo matching settings; an unset `d_max` scales with each pair's width.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StereoSettings {
    pub d_max: Option<u32>,
    pub window: u32,
    pub smoothness: f64,
}

impl Default for StereoSettings {
    fn default() -> Self {
        Self {
            d_max: None,
            window: StereoParams::DEFAULT_WINDOW,
            smoothness: StereoParams::DEFAULT_SMOOTHNESS,
        }
    }
}

impl StereoSettings {
    pub fn params_for_width(&self, width: usize) -> StereoParams {
        let base = StereoParams::for_width(width);
        StereoParams {
            d_max: self.d_max.unwrap_or(base.d_max),
            window: self.window,
            smoothness: self.smoothness,
        }
    }
}

/// Everything a job needs. Deserializable from TOML; every key is optional.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub area_ratio: f64,
    pub stereo: StereoSettings,
    pub median_radius: usize,
    pub contrast_block: usize,
    pub ga: GaConfig,
    pub background: [u8; 3],
    pub theta_max_degrees: f64,
}

impl Default for JobConfig {
    fn default() -> Self {
        let ga = GaConfig::default();
        Self {
            input_dir: PathBuf::new(),
            output_dir: PathBuf::new(),
            area_ratio: 0.5,
            stereo: StereoSettings::default(),
            median_radius: DEFAULT_MEDIAN_RADIUS,
            contrast_block: DEFAULT_CONTRAST_BLOCK,
            theta_max_degrees: ga.theta_max.to_degrees(),
            ga,
            background: DEFAULT_BACKGROUND,
        }
    }
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CollageError::Format(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CollageError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// GA settings with the job-level rotation limit applied.
    pub fn ga_config(&self) -> GaConfig {
        GaConfig {
            theta_max: self.theta_max_degrees.to_radians(),
            ..self.ga.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dir.as_os_str().is_empty() {
            return Err(CollageError::invalid("input directory not set"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(CollageError::invalid("output directory not set"));
        }
        if !(self.area_ratio > 0.0 && self.area_ratio.is_finite()) {
            return Err(CollageError::invalid(format!(
                "area ratio must be > 0, got {}",
                self.area_ratio
            )));
        }
        if !(self.theta_max_degrees >= 0.0 && self.theta_max_degrees.is_finite()) {
            return Err(CollageError::invalid(format!(
                "theta max must be >= 0 degrees, got {}",
                self.theta_max_degrees
            )));
        }
        self.stereo.params_for_width(8).validate()?;
        if self.contrast_block < 2 {
            return Err(CollageError::invalid(format!(
                "contrast block must be >= 2, got {}",
                self.contrast_block
            )));
        }
        self.ga_config().validate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputKind {
    Stereo { left: PathBuf, right: PathBuf },
    Mono { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputItem {
    pub name: String,
    pub kind: InputKind,
}

impl InputItem {
    /// The file whose colors appear in the collage.
    pub fn display_path(&self) -> &Path {
        match &self.kind {
            InputKind::Stereo { left, .. } => left,
            InputKind::Mono { path } => path,
        }
    }

    pub fn file_name(&self) -> String {
        self.display_path()
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Discovery {
    pub items: Vec<InputItem>,
    pub warnings: Vec<String>,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

/// Pairs `<name>_left.<ext>` with `<name>_right.<ext>`; everything else is a
/// mono input. Items come back sorted by name.
pub fn discover_inputs(dir: &Path) -> Result<Discovery> {
    let io_err = |source| CollageError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_file() && is_image(&path) {
            files.push(path);
        }
    }
    files.sort();

    let mut lefts = BTreeMap::new();
    let mut rights = BTreeMap::new();
    let mut monos = Vec::new();
    for path in files {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if let Some(name) = stem.strip_suffix("_left").filter(|n| !n.is_empty()) {
            lefts.insert(name.to_string(), path);
        } else if let Some(name) = stem.strip_suffix("_right").filter(|n| !n.is_empty()) {
            rights.insert(name.to_string(), path);
        } else {
            monos.push((stem, path));
        }
    }

    let mut discovery = Discovery::default();
    let note = |d: &mut Discovery, msg: String| {
        warn!("{msg}");
        d.warnings.push(msg);
    };
    for (name, left) in lefts {
        match rights.remove(&name) {
            Some(right) => match (
                image::image_dimensions(&left),
                image::image_dimensions(&right),
            ) {
                (Ok(a), Ok(b)) if a == b => {
                    discovery.items.push(InputItem {
                        name,
                        kind: InputKind::Stereo { left, right },
                    });
                }
                (Ok(a), Ok(b)) => note(
                    &mut discovery,
                    format!(
                        "{}: rejected, left is {}x{} but right is {}x{}",
                        left.display(),
                        a.0,
                        a.1,
                        b.0,
                        b.1
                    ),
                ),
                (Err(e), _) | (_, Err(e)) => note(
                    &mut discovery,
                    format!("{}: rejected, cannot read pair: {e}", left.display()),
                ),
            },
            None => {
                note(
                    &mut discovery,
                    format!(
                        "{}: no matching _right file, using it as a mono image",
                        left.display()
                    ),
                );
                let stem = left.file_stem().unwrap().to_string_lossy().into_owned();
                monos.push((stem, left));
            }
        }
    }
    for (_, right) in rights {
        note(
            &mut discovery,
            format!(
                "{}: no matching _left file, using it as a mono image",
                right.display()
            ),
        );
        let stem = right.file_stem().unwrap().to_string_lossy().into_owned();
        monos.push((stem, right));
    }
    for (name, path) in monos {
        discovery.items.push(InputItem {
            name,
            kind: InputKind::Mono { path },
        });
    }
    discovery.items.sort_by(|a, b| {
        a.name
            .cmp(&b.name)
            .then_with(|| a.display_path().cmp(b.display_path()))
    });

    // output names must be unique
    let mut seen = std::collections::HashSet::new();
    let mut kept = Vec::with_capacity(discovery.items.len());
    for item in std::mem::take(&mut discovery.items) {
        if seen.insert(item.name.clone()) {
            kept.push(item);
        } else {
            note(
                &mut discovery,
                format!(
                    "{}: rejected, name '{}' already used",
                    item.display_path().display(),
                    item.name
                ),
            );
        }
    }
    discovery.items = kept;
    Ok(discovery)
}

/// One input ready for layout.
#[derive(Clone, Debug)]
pub struct PreparedImage {
    pub name: String,
    pub file: String,
    pub color: RgbImage,
    pub saliency: SaliencyMap,
    pub disparity: Option<DisparityMap>,
}

impl PreparedImage {
    pub fn dims(&self) -> ImageDims {
        ImageDims::new(self.color.width(), self.color.height())
    }
}

/// Loads one input and computes its saliency map.
pub fn prepare_input(item: &InputItem, config: &JobConfig) -> Result<PreparedImage> {
    let file = item.file_name();
    match &item.kind {
        InputKind::Stereo { left, right } => {
            let color = RgbImage::load(left)?;
            let right = RgbImage::load(right)?;
            let pair = StereoPair::new(to_gray(&color)?, to_gray(&right)?)?;
            let params = config.stereo.params_for_width(pair.width());
            let disparity = compute_disparity(&pair, &params)?;
            let saliency = depth_to_saliency(&disparity, config.median_radius);
            Ok(PreparedImage {
                name: item.name.clone(),
                file,
                color,
                saliency,
                disparity: Some(disparity),
            })
        }
        InputKind::Mono { path } => {
            let color = RgbImage::load(path)?;
            let saliency = contrast_saliency(&to_gray(&color)?, config.contrast_block)?;
            Ok(PreparedImage {
                name: item.name.clone(),
                file,
                color,
                saliency,
                disparity: None,
            })
        }
    }
}

pub fn prepare_inputs(items: &[InputItem], config: &JobConfig) -> Result<Vec<PreparedImage>> {
    items
        .par_iter()
        .map(|item| prepare_input(item, config))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Discover,
    Saliency,
    Canvas,
    Optimize,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Discover => "discover",
            Stage::Saliency => "saliency",
            Stage::Canvas => "canvas",
            Stage::Optimize => "optimize",
            Stage::Write => "write",
        })
    }
}

/// A pipeline failure tagged with the stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {source}")]
pub struct JobError {
    pub stage: Stage,
    #[source]
    pub source: CollageError,
}

trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, JobError>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: Stage) -> Result<T, JobError> {
        self.map_err(|source| JobError { stage, source })
    }
}

#[derive(Clone, Debug)]
pub struct JobReport {
    pub canvas: Canvas,
    pub outcome: GaOutcome,
    pub layout: LayoutFile,
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

impl JobReport {
    pub fn best(&self) -> FitnessBreakdown {
        self.outcome.breakdown
    }
}

/// Files written so far; removed again unless the job completes.
struct OutputGuard {
    written: Vec<PathBuf>,
    created_dir: Option<PathBuf>,
    committed: bool,
}

impl OutputGuard {
    fn open(dir: &Path) -> Result<Self> {
        let created_dir = if dir.exists() {
            None
        } else {
            fs::create_dir_all(dir).map_err(|source| CollageError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            Some(dir.to_path_buf())
        };
        Ok(Self {
            written: Vec::new(),
            created_dir,
            committed: false,
        })
    }

    fn write(&mut self, path: PathBuf, contents: &[u8]) -> Result<()> {
        self.written.push(path.clone());
        fs::write(&path, contents).map_err(|source| CollageError::Io { path, source })
    }

    fn save(&mut self, path: PathBuf, save: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        self.written.push(path.clone());
        save(&path)
    }

    fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
        if let Some(dir) = &self.created_dir {
            let _ = fs::remove_dir(dir);
        }
    }
}

fn discover_nonempty(dir: &Path) -> Result<Discovery, JobError> {
    let discovery = discover_inputs(dir).stage(Stage::Discover)?;
    if discovery.items.is_empty() {
        return Err(CollageError::invalid(format!(
            "no inputs in {}",
            dir.display()
        )))
        .stage(Stage::Discover);
    }
    Ok(discovery)
}

pub fn run_job(config: &JobConfig) -> Result<JobReport, JobError> {
    config.validate().stage(Stage::Config)?;
    let discovery = discover_nonempty(&config.input_dir)?;
    info!("{} inputs", discovery.items.len());

    let images = prepare_inputs(&discovery.items, config).stage(Stage::Saliency)?;
    let dims: Vec<ImageDims> = images.iter().map(PreparedImage::dims).collect();
    let saliency: Vec<SaliencyMap> = images.iter().map(|im| im.saliency.clone()).collect();

    let canvas = canvas_for(&dims, config.area_ratio).stage(Stage::Canvas)?;
    info!("canvas {0}x{0}", canvas.side());

    let ga_config = config.ga_config();
    let outcome = ga::run(&dims, &saliency, canvas, &ga_config).stage(Stage::Optimize)?;
    info!("best total {:.6}", outcome.breakdown.total);

    let layout = ga::decode(&outcome.best, canvas, ga_config.theta_max);
    let files: Vec<String> = images.iter().map(|im| im.file.clone()).collect();
    let layout_file = LayoutFile::new(canvas, &layout, &files, Some(outcome.breakdown));

    let write = || -> Result<Vec<PathBuf>> {
        let out = &config.output_dir;
        let mut guard = OutputGuard::open(out)?;
        let colors: Vec<RgbImage> = images.iter().map(|im| im.color.clone()).collect();
        let collage = render_collage(&layout, canvas, &colors, config.background);
        guard.save(out.join("collage.png"), |p| collage.save_png(p))?;
        let usage = render_usage(&rasterize(&layout, canvas, &dims), &saliency);
        guard.save(out.join("usage.png"), |p| usage.save_png(p))?;
        guard.write(
            out.join("trace.csv"),
            format_trace(&outcome.trace).as_bytes(),
        )?;
        guard.write(out.join("layout.json"), layout_file.to_json().as_bytes())?;
        for im in &images {
            guard.save(out.join(format!("saliency_{}.png", im.name)), |p| {
                im.saliency.to_gray().save_png(p)
            })?;
        }
        Ok(guard.commit())
    };
    let written = write().stage(Stage::Write)?;

    Ok(JobReport {
        canvas,
        outcome,
        layout: layout_file,
        written,
        warnings: discovery.warnings,
    })
}

/// Diagnostic mode: only the per-image maps (`depth_<name>.png` for stereo
/// inputs, `saliency_<name>.png` for every input).
pub fn run_saliency_job(config: &JobConfig) -> Result<Vec<PathBuf>, JobError> {
    config.validate().stage(Stage::Config)?;
    let discovery = discover_nonempty(&config.input_dir)?;
    let images = prepare_inputs(&discovery.items, config).stage(Stage::Saliency)?;
    let write = || -> Result<Vec<PathBuf>> {
        let out = &config.output_dir;
        let mut guard = OutputGuard::open(out)?;
        for im in &images {
            if let Some(d) = &im.disparity {
                guard.save(out.join(format!("depth_{}.png", im.name)), |p| {
                    d.to_gray().save_png(p)
                })?;
            }
            guard.save(out.join(format!("saliency_{}.png", im.name)), |p| {
                im.saliency.to_gray().save_png(p)
            })?;
        }
        Ok(guard.commit())
    };
    write().stage(Stage::Write)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch_png(dir: &Path, name: &str, w: u32, h: u32) {
        image::RgbImage::from_pixel(w, h, image::Rgb([10, 20, 30]))
            .save(dir.join(name))
            .unwrap();
    }

    #[test]
    fn pairs_and_monos() {
        let dir = tempfile::tempdir().unwrap();
        touch_png(dir.path(), "a_left.png", 8, 6);
        touch_png(dir.path(), "a_right.png", 8, 6);
        touch_png(dir.path(), "b.png", 5, 5);
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let d = discover_inputs(dir.path()).unwrap();
        assert_eq!(d.items.len(), 2);
        assert_eq!(d.items[0].name, "a");
        assert!(matches!(d.items[0].kind, InputKind::Stereo { .. }));
        assert_eq!(d.items[1].name, "b");
        assert!(matches!(d.items[1].kind, InputKind::Mono { .. }));
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn lone_left_becomes_mono_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        touch_png(dir.path(), "x_left.png", 4, 4);
        let d = discover_inputs(dir.path()).unwrap();
        assert_eq!(d.items.len(), 1);
        assert_eq!(d.items[0].name, "x_left");
        assert!(matches!(d.items[0].kind, InputKind::Mono { .. }));
        assert_eq!(d.warnings.len(), 1);
    }

    #[test]
    fn mismatched_pair_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        touch_png(dir.path(), "m_left.png", 4, 4);
        touch_png(dir.path(), "m_right.png", 5, 4);
        touch_png(dir.path(), "ok.png", 4, 4);
        let d = discover_inputs(dir.path()).unwrap();
        assert_eq!(d.items.len(), 1);
        assert_eq!(d.items[0].name, "ok");
        assert!(d.warnings[0].contains("m_left.png"));
    }

    #[test]
    fn empty_dir_discovers_nothing_and_job_aborts() {
        let dir = tempfile::tempdir().unwrap();
        assert!(discover_inputs(dir.path()).unwrap().items.is_empty());
        let out = dir.path().join("out");
        let cfg = JobConfig {
            input_dir: dir.path().into(),
            output_dir: out.clone(),
            ..JobConfig::default()
        };
        let err = run_job(&cfg).unwrap_err();
        assert_eq!(err.stage, Stage::Discover);
        assert!(err.to_string().contains("no inputs"));
        assert!(!out.exists());
    }

    #[test]
    fn missing_dir_is_io_error() {
        let err = discover_inputs(Path::new("/definitely/not/here")).unwrap_err();
        assert!(matches!(err, CollageError::Io { .. }));
    }

    #[test]
    fn config_from_toml_with_partial_keys() {
        let cfg = JobConfig::from_toml(
            "input_dir = \"in\"\narea_ratio = 0.7\n[ga]\ngenerations = 10\nseed = 9\n[stereo]\nwindow = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.input_dir, PathBuf::from("in"));
        assert_eq!(cfg.area_ratio, 0.7);
        assert_eq!(cfg.ga.generations, 10);
        assert_eq!(cfg.ga.population, 40);
        assert_eq!(cfg.stereo.window, 3);
        assert!(JobConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn defaults_follow_reported_setup() {
        let cfg = JobConfig::default();
        assert_eq!(cfg.area_ratio, 0.5);
        assert_eq!(cfg.ga.population, 40);
        assert_eq!(cfg.ga.generations, 150);
        assert!((cfg.ga_config().theta_max - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn write_failure_removes_partial_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        {
            let mut guard = OutputGuard::open(&out).unwrap();
            guard.write(out.join("trace.csv"), b"x").unwrap();
            assert!(out.join("trace.csv").exists());
        }
        assert!(!out.exists());
    }

    #[test]
    fn full_config_example_parses() {
        let cfg = JobConfig::from_toml(FULL_CONFIG).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.stereo.d_max, None);
        assert_eq!(cfg.ga.elite_count, 2);
    }

    const FULL_CONFIG: &str = r#"
input_dir = "photos"
output_dir = "out"
area_ratio = 0.5
median_radius = 1
contrast_block = 16
background = [128, 128, 128]
theta_max_degrees = 45.0

[stereo]
# d_max defaults to width / 8
window = 5
smoothness = 20.0

[ga]
population = 40
generations = 150
tournament_size = 2
crossover_rate = 0.9
mutation_rate = 0.1
mutation_sigma = 0.1
blx_alpha = 0.5
elite_count = 2
seed = 42
weights = { lambda_a = 0.3333333333, lambda_b = 0.3, lambda_v = 0.3666666667 }
"#;
}
