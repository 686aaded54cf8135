use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distant::{NdviThresholds, DEFAULT_CUTOFF_M};
use crate::error::{Error, Result};
use crate::render::CameraParams;
use crate::transfer::DEFAULT_DENSITY;

/// Every knob of a run. Loaded from a flat TOML file, then overridden by
/// command-line flags. Relative paths in a file resolve against the file's
/// directory.
///
/// ```toml
/// near_mesh = "near.ply"
/// windows = "windows.csv"
/// width = 900
/// height = 900
/// workers = 4
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // Inputs
    pub mesh: Option<PathBuf>,
    pub point_cloud: Option<PathBuf>,
    pub dsm: Option<PathBuf>,
    pub ndvi: Option<PathBuf>,
    pub windows: Option<PathBuf>,
    pub near_mesh: Option<PathBuf>,
    pub far_mesh: Option<PathBuf>,

    // Outputs
    pub labels_out: Option<PathBuf>,
    pub near_out: Option<PathBuf>,
    pub far_out: Option<PathBuf>,
    /// Results CSV; standard output when unset.
    pub results: Option<PathBuf>,
    pub timing_json: Option<PathBuf>,
    pub dump_dir: Option<PathBuf>,
    pub fixtures_dir: Option<PathBuf>,

    pub greenery_min: f64,
    pub construction_min: f64,

    pub fov_deg: f64,
    pub width: u32,
    pub height: u32,
    pub near_m: f64,
    pub far_m: f64,
    pub cutoff_m: f64,

    /// Surface sampling density for label transfer, points per m².
    pub density: f64,
    pub seed: u64,
    /// 0 lets the pool pick.
    pub workers: usize,

    pub keep_going: bool,
    pub dump_images: bool,
    pub use_oracle: bool,
    /// Write ASCII instead of binary PLY.
    pub ascii: bool,

    /// Fixture name for `bench` and `fixtures`.
    pub fixture: Option<String>,
    /// Window count for `bench` and the synthetic city.
    pub count: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let camera = CameraParams::default();
        let thresholds = NdviThresholds::default();
        RunConfig {
            mesh: None,
            point_cloud: None,
            dsm: None,
            ndvi: None,
            windows: None,
            near_mesh: None,
            far_mesh: None,
            labels_out: None,
            near_out: None,
            far_out: None,
            results: None,
            timing_json: None,
            dump_dir: None,
            fixtures_dir: None,
            greenery_min: thresholds.greenery_min,
            construction_min: thresholds.construction_min,
            fov_deg: camera.fov_deg,
            width: camera.width,
            height: camera.height,
            near_m: camera.near_m,
            far_m: camera.far_m,
            cutoff_m: DEFAULT_CUTOFF_M,
            density: DEFAULT_DENSITY,
            seed: 7,
            workers: 0,
            keep_going: false,
            dump_images: false,
            use_oracle: false,
            ascii: false,
            fixture: None,
            count: 100,
        }
    }
}

impl RunConfig {
    pub fn parse_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    /// Reads a config file; relative paths inside it are made relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.is_file() {
            return Err(Error::validation(format!(
                "config file not found: {}",
                path.display()
            )));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let mut cfg = RunConfig::parse_toml(&text).map_err(|e| e.in_file(path))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in cfg.paths_mut().into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    fn paths_mut(&mut self) -> [&mut Option<PathBuf>; 14] {
        [
            &mut self.mesh,
            &mut self.point_cloud,
            &mut self.dsm,
            &mut self.ndvi,
            &mut self.windows,
            &mut self.near_mesh,
            &mut self.far_mesh,
            &mut self.labels_out,
            &mut self.near_out,
            &mut self.far_out,
            &mut self.results,
            &mut self.timing_json,
            &mut self.dump_dir,
            &mut self.fixtures_dir,
        ]
    }

    pub fn thresholds(&self) -> NdviThresholds {
        NdviThresholds {
            greenery_min: self.greenery_min,
            construction_min: self.construction_min,
        }
    }

    pub fn camera(&self) -> CameraParams {
        CameraParams {
            fov_deg: self.fov_deg,
            width: self.width,
            height: self.height,
            near_m: self.near_m,
            far_m: self.far_m,
        }
    }

    /// Numeric invariants; checked before any input is read.
    pub fn validate(&self) -> Result<()> {
        self.thresholds().validate()?;
        self.camera().validate()?;
        if !(self.cutoff_m > 0.0 && self.cutoff_m.is_finite()) {
            return Err(Error::validation(format!(
                "cutoff_m must be > 0, got {}",
                self.cutoff_m
            )));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::validation(format!(
                "density must be > 0, got {}",
                self.density
            )));
        }
        Ok(())
    }
}

/// Fails unless `path` is set and names an existing file.
pub(crate) fn require_input<'a>(key: &str, path: &'a Option<PathBuf>) -> Result<&'a Path> {
    let path = path
        .as_deref()
        .ok_or_else(|| Error::validation(format!("missing required input `{key}`")))?;
    check_input(path)?;
    Ok(path)
}

pub(crate) fn check_input(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "input file not found: {}",
            path.display()
        )))
    }
}
