//! Command-line front end. `run` parses arguments, merges them over an
//! optional config file, validates, and dispatches to one subcommand.
//!
//! Exit codes: 0 success, 1 validation or parse error, 2 runtime error.

mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
use config::{check_input, require_input};

use crate::distant::{dsm_to_labeled_mesh, register_labels, segment_ndvi};
use crate::error::{Error, Result};
use crate::ingest::{load_mesh, load_point_cloud, load_raster, load_windows, PlyFormat};
use crate::oracle::{make_fixture, FixtureParams, FIXTURE_NAMES};
use crate::render::ColoredScene;
use crate::transfer::{transfer_labels, LabeledMesh};
use crate::wvi::{assess_batch, encode_csv, rmse_compare, AssessmentReport, BatchOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "winview",
    version,
    about = "Window view index assessment for 3D city scenes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify an NDVI raster into labels, optionally resampled onto a DSM grid.
    SegmentNdvi(SegmentNdviArgs),
    /// Label the city mesh and mesh the DSM into the far-field layer.
    BuildScene(BuildSceneArgs),
    /// Render and quantify every window of a manifest.
    Assess(AssessArgs),
    /// Time view generation and quantification on a prepared scene.
    Bench(BenchArgs),
    /// Write analytic and synthetic fixtures to disk.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Flat TOML run config; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub greenery_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub construction_min: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CameraArgs {
    /// Vertical field of view in degrees.
    #[arg(long)]
    pub fov_deg: Option<f64>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long)]
    pub near_m: Option<f64>,
    #[arg(long)]
    pub far_m: Option<f64>,
    /// Near/far layer split distance in meters.
    #[arg(long)]
    pub cutoff_m: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SegmentNdviArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub ndvi: Option<PathBuf>,
    /// Resample the labels onto this DSM's grid.
    #[arg(long)]
    pub dsm: Option<PathBuf>,
    /// Label grid output (ESRI ASCII, codes 0..3).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct BuildSceneArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// City mesh PLY, labeled or not.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Labeled point cloud PLY used when the mesh is unlabeled.
    #[arg(long)]
    pub point_cloud: Option<PathBuf>,
    #[arg(long)]
    pub dsm: Option<PathBuf>,
    #[arg(long)]
    pub ndvi: Option<PathBuf>,
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub near_out: Option<PathBuf>,
    #[arg(long)]
    pub far_out: Option<PathBuf>,
    /// Write ASCII PLY.
    #[arg(long)]
    pub ascii: bool,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub near_mesh: Option<PathBuf>,
    #[arg(long)]
    pub far_mesh: Option<PathBuf>,
    /// Window manifest CSV.
    #[arg(long)]
    pub windows: Option<PathBuf>,
    /// Results CSV; standard output when omitted.
    #[arg(long)]
    pub results: Option<PathBuf>,
    #[arg(long)]
    pub timing_json: Option<PathBuf>,
    /// Save every rendered view as PPM.
    #[arg(long)]
    pub dump_images: bool,
    /// Directory for dumped views; defaults to `views` beside the results.
    #[arg(long)]
    pub dump_dir: Option<PathBuf>,
    #[arg(long)]
    pub keep_going: bool,
    /// Also render with the ray-casting reference and report per-label RMSE.
    #[arg(long)]
    pub use_oracle: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub camera: CameraArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Prepared near-field mesh; the synthetic city is used when omitted.
    #[arg(long)]
    pub near_mesh: Option<PathBuf>,
    #[arg(long)]
    pub far_mesh: Option<PathBuf>,
    #[arg(long)]
    pub windows: Option<PathBuf>,
    /// Fixture to bench when no scene files are given.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Number of windows to render.
    #[arg(long, short = 'n')]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub timing_json: Option<PathBuf>,
    #[command(flatten)]
    pub camera: CameraArgs,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Fixture name, or `all`.
    #[arg(long)]
    pub name: Option<String>,
    /// Output directory; each fixture goes in its own subdirectory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Window count for the synthetic city.
    #[arg(long)]
    pub count: Option<usize>,
    #[command(flatten)]
    pub camera: CameraArgs,
}

fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn set_opt<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        *slot = value.clone();
    }
}

impl ThresholdArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.greenery_min, &self.greenery_min);
        set(&mut c.construction_min, &self.construction_min);
    }
}

impl CameraArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.fov_deg, &self.fov_deg);
        set(&mut c.width, &self.width);
        set(&mut c.height, &self.height);
        set(&mut c.near_m, &self.near_m);
        set(&mut c.far_m, &self.far_m);
        set(&mut c.cutoff_m, &self.cutoff_m);
    }
}

fn base_config(arg: &ConfigArg) -> Result<RunConfig> {
    match &arg.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

impl Command {
    /// Final configuration: file values, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let c = match self {
            Command::SegmentNdvi(a) => {
                let mut c = base_config(&a.config)?;
                set_opt(&mut c.ndvi, &a.ndvi);
                set_opt(&mut c.dsm, &a.dsm);
                set_opt(&mut c.labels_out, &a.out);
                a.thresholds.apply(&mut c);
                c
            }
            Command::BuildScene(a) => {
                let mut c = base_config(&a.config)?;
                set_opt(&mut c.mesh, &a.mesh);
                set_opt(&mut c.point_cloud, &a.point_cloud);
                set_opt(&mut c.dsm, &a.dsm);
                set_opt(&mut c.ndvi, &a.ndvi);
                set(&mut c.density, &a.density);
                set(&mut c.seed, &a.seed);
                set_opt(&mut c.near_out, &a.near_out);
                set_opt(&mut c.far_out, &a.far_out);
                c.ascii |= a.ascii;
                a.thresholds.apply(&mut c);
                c
            }
            Command::Assess(a) => {
                let mut c = base_config(&a.config)?;
                set_opt(&mut c.near_mesh, &a.near_mesh);
                set_opt(&mut c.far_mesh, &a.far_mesh);
                set_opt(&mut c.windows, &a.windows);
                set_opt(&mut c.results, &a.results);
                set_opt(&mut c.timing_json, &a.timing_json);
                set_opt(&mut c.dump_dir, &a.dump_dir);
                set(&mut c.workers, &a.workers);
                c.dump_images |= a.dump_images;
                c.keep_going |= a.keep_going;
                c.use_oracle |= a.use_oracle;
                a.camera.apply(&mut c);
                c
            }
            Command::Bench(a) => {
                let mut c = base_config(&a.config)?;
                set_opt(&mut c.near_mesh, &a.near_mesh);
                set_opt(&mut c.far_mesh, &a.far_mesh);
                set_opt(&mut c.windows, &a.windows);
                set_opt(&mut c.fixture, &a.fixture);
                set(&mut c.count, &a.count);
                set(&mut c.seed, &a.seed);
                set(&mut c.workers, &a.workers);
                set_opt(&mut c.timing_json, &a.timing_json);
                a.camera.apply(&mut c);
                c
            }
            Command::Fixtures(a) => {
                let mut c = base_config(&a.config)?;
                set_opt(&mut c.fixture, &a.name);
                set_opt(&mut c.fixtures_dir, &a.out);
                set(&mut c.seed, &a.seed);
                set(&mut c.count, &a.count);
                a.camera.apply(&mut c);
                c
            }
        };
        c.validate()?;
        Ok(c)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_RUNTIME
    }
}

pub fn execute(command: &Command) -> Result<()> {
    let cfg = command.resolve()?;
    match command {
        Command::SegmentNdvi(_) => cmd_segment_ndvi(&cfg),
        Command::BuildScene(_) => cmd_build_scene(&cfg),
        Command::Assess(_) => cmd_assess(&cfg),
        Command::Bench(_) => cmd_bench(&cfg),
        Command::Fixtures(_) => cmd_fixtures(&cfg),
    }
}

fn require_output<'a>(key: &str, path: &'a Option<PathBuf>) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::validation(format!("missing required output `{key}`")))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))
}

pub fn cmd_segment_ndvi(cfg: &RunConfig) -> Result<()> {
    let ndvi_path = require_input("ndvi", &cfg.ndvi)?;
    if let Some(dsm) = &cfg.dsm {
        check_input(dsm)?;
    }
    let out = require_output("labels_out", &cfg.labels_out)?;

    let ndvi = load_raster(ndvi_path)?;
    let mut labels = segment_ndvi(&ndvi, &cfg.thresholds());
    if let Some(dsm) = &cfg.dsm {
        labels = register_labels(&labels, &load_raster(dsm)?);
    }
    labels.save(out)?;
    println!(
        "wrote {}x{} label grid to {}",
        labels.grid().ncols(),
        labels.grid().nrows(),
        out.display()
    );
    Ok(())
}

pub fn cmd_build_scene(cfg: &RunConfig) -> Result<()> {
    let mesh_path = require_input("mesh", &cfg.mesh)?;
    if let Some(p) = &cfg.point_cloud {
        check_input(p)?;
    }
    let terrain = match (&cfg.dsm, &cfg.ndvi) {
        (Some(dsm), Some(ndvi)) => {
            check_input(dsm)?;
            check_input(ndvi)?;
            Some((dsm, ndvi))
        }
        (None, None) => None,
        _ => return Err(Error::validation("dsm and ndvi must be given together")),
    };
    let near_out = require_output("near_out", &cfg.near_out)?;
    if terrain.is_some() {
        require_output("far_out", &cfg.far_out)?;
    }
    let format = if cfg.ascii {
        PlyFormat::Ascii
    } else {
        PlyFormat::BinaryLittleEndian
    };

    let t0 = Instant::now();
    let loaded = load_mesh(mesh_path)?;
    let near = match (loaded.labels, &cfg.point_cloud) {
        (Some(labels), _) => {
            log::info!("mesh already labeled; passing it through");
            LabeledMesh::new(loaded.mesh, labels)?
        }
        (None, Some(cloud)) => transfer_labels(&loaded.mesh, &load_point_cloud(cloud)?)?,
        (None, None) => {
            return Err(Error::validation(
                "label source required: mesh is unlabeled and no point cloud given",
            ))
        }
    };
    near.save(near_out, format)?;
    println!(
        "near mesh: {} triangles -> {}",
        near.triangle_count(),
        near_out.display()
    );

    if let Some((dsm, ndvi)) = terrain {
        let dsm = load_raster(dsm)?;
        let labels = register_labels(&segment_ndvi(&load_raster(ndvi)?, &cfg.thresholds()), &dsm);
        let far = dsm_to_labeled_mesh(&dsm, &labels)?;
        let far_out = cfg.far_out.as_deref().expect("checked above");
        far.save(far_out, format)?;
        println!(
            "far mesh: {} triangles -> {}",
            far.triangle_count(),
            far_out.display()
        );
    }
    println!("scene_prep_secs = {:.6}", t0.elapsed().as_secs_f64());
    Ok(())
}

fn load_scene(cfg: &RunConfig) -> Result<ColoredScene> {
    let near = match &cfg.near_mesh {
        Some(p) => LabeledMesh::load(p)?,
        None => LabeledMesh::default(),
    };
    let far = match &cfg.far_mesh {
        Some(p) => LabeledMesh::load(p)?,
        None => LabeledMesh::default(),
    };
    ColoredScene::new(near, far, cfg.cutoff_m)
}

fn batch_options(cfg: &RunConfig) -> BatchOptions {
    BatchOptions {
        camera: cfg.camera(),
        workers: cfg.workers,
        keep_going: cfg.keep_going,
        dump_dir: None,
        use_oracle: false,
    }
}

fn write_timing_json(
    cfg: &RunConfig,
    report: &AssessmentReport,
    extra: serde_json::Value,
) -> Result<()> {
    if let Some(path) = &cfg.timing_json {
        let mut json = report.timing.to_json();
        json["scene_preparations"] = report.counters.scene_preparations.into();
        json["workers"] = cfg.workers.into();
        if let (Some(obj), serde_json::Value::Object(extra)) = (json.as_object_mut(), extra) {
            obj.extend(extra);
        }
        let text = serde_json::to_string_pretty(&json).expect("json");
        write_file(path, text.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_assess(cfg: &RunConfig) -> Result<()> {
    let windows_path = require_input("windows", &cfg.windows)?;
    if cfg.near_mesh.is_none() && cfg.far_mesh.is_none() {
        log::warn!("no scene meshes given; every view is sky");
    }
    for p in [&cfg.near_mesh, &cfg.far_mesh].into_iter().flatten() {
        check_input(p)?;
    }

    let scene = load_scene(cfg)?;
    let windows = load_windows(windows_path)?;
    let mut options = batch_options(cfg);
    if cfg.dump_images {
        let dir = match (&cfg.dump_dir, &cfg.results) {
            (Some(d), _) => d.clone(),
            (None, Some(r)) => r.parent().unwrap_or(Path::new("")).join("views"),
            (None, None) => PathBuf::from("views"),
        };
        std::fs::create_dir_all(&dir).map_err(|e| Error::from(e).in_file(&dir))?;
        options.dump_dir = Some(dir);
    }
    let report = assess_batch(&scene, &windows, &options)?;
    let csv = encode_csv(&report.records);

    let mut extra = serde_json::json!({});
    let mut summary = report.timing.to_text();
    summary.push_str(&format!(
        "scene_preparations = {}\n",
        report.counters.scene_preparations
    ));
    if !report.failures.is_empty() {
        summary.push_str(&format!("failed_windows = {}\n", report.failures.len()));
    }
    if cfg.use_oracle {
        let oracle = assess_batch(
            &scene,
            &windows,
            &BatchOptions {
                use_oracle: true,
                ..batch_options(cfg)
            },
        )?;
        let rmse = rmse_compare(&report.records, &oracle.records)?;
        for l in crate::SemanticLabel::ALL {
            summary.push_str(&format!("oracle_rmse_{} = {:.6}\n", l.name(), rmse.get(l)));
        }
        summary.push_str(&format!("oracle_rmse_max = {:.6}\n", rmse.max()));
        extra = serde_json::json!({ "oracle_rmse": rmse.per_label, "oracle_rmse_max": rmse.max() });
    }

    match &cfg.results {
        Some(path) => {
            write_file(path, csv.as_bytes())?;
            print!("{summary}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    let _ = std::io::stdout().flush();
    write_timing_json(cfg, &report, extra)?;
    if !report.failures.is_empty() {
        return Err(Error::BatchFailures {
            failed: report.failures.len(),
            total: windows.len(),
        });
    }
    Ok(())
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<()> {
    let from_files = cfg.near_mesh.is_some() || cfg.far_mesh.is_some();
    if cfg.count == 0 {
        return Err(Error::validation("count must be at least 1"));
    }
    let t_prep = Instant::now();
    let (scene, mut windows) = if from_files {
        for p in [&cfg.near_mesh, &cfg.far_mesh].into_iter().flatten() {
            check_input(p)?;
        }
        let windows_path = require_input("windows", &cfg.windows)?;
        (load_scene(cfg)?, load_windows(windows_path)?)
    } else {
        let name = cfg.fixture.as_deref().unwrap_or("synthetic-city");
        let params = FixtureParams {
            camera: cfg.camera(),
            seed: cfg.seed,
            windows: cfg.count,
        };
        let f = make_fixture(name, &params)?;
        (f.scene, f.windows)
    };
    let load_secs = t_prep.elapsed().as_secs_f64();
    if windows.is_empty() {
        return Err(Error::validation("no windows to bench"));
    }
    // Cycle the manifest so small fixtures can still be timed over `count` views.
    let base = windows.clone();
    windows = (0..cfg.count)
        .map(|i| {
            let mut w = base[i % base.len()].clone();
            if i >= base.len() {
                w.id = format!("{}#{}", w.id, i / base.len());
            }
            w
        })
        .collect();

    let report = assess_batch(&scene, &windows, &batch_options(cfg))?;
    let t = report.timing;
    let ratio = if t.render_mean_secs() > 0.0 {
        t.quantify_mean_secs() / t.render_mean_secs()
    } else {
        0.0
    };
    println!("triangles = {}", scene.triangle_count());
    println!("workers = {}", cfg.workers);
    println!("scene_load_secs = {load_secs:.6}");
    print!("{}", t.to_text());
    println!("quantification_to_view_ratio = {ratio:.6}");
    println!(
        "scene_preparations = {}",
        report.counters.scene_preparations
    );
    write_timing_json(
        cfg,
        &report,
        serde_json::json!({ "triangles": scene.triangle_count(), "scene_load_secs": load_secs, "quantification_to_view_ratio": ratio }),
    )
}

pub fn cmd_fixtures(cfg: &RunConfig) -> Result<()> {
    let out = require_output("fixtures_dir", &cfg.fixtures_dir)?;
    let names: Vec<&str> = match cfg.fixture.as_deref() {
        None | Some("all") => FIXTURE_NAMES.to_vec(),
        Some(name) if FIXTURE_NAMES.contains(&name) => vec![name],
        Some(name) => return Err(Error::UnknownFixture(name.to_string())),
    };
    let params = FixtureParams {
        camera: cfg.camera(),
        seed: cfg.seed,
        windows: cfg.count,
    };
    for name in names {
        let f = make_fixture(name, &params)?;
        let dir = out.join(name);
        f.save(&dir)?;
        println!(
            "{name}: {} triangles, {} windows -> {}",
            f.scene.triangle_count(),
            f.windows.len(),
            dir.display()
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str]) -> Result<RunConfig> {
        Cli::try_parse_from(args).unwrap().command.resolve()
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "width = 320\nheight = 200\nworkers = 3\n").unwrap();
        let p = path.to_str().unwrap();
        let c = resolve(&["winview", "assess", "--config", p, "--width", "64"]).unwrap();
        assert_eq!((c.width, c.height, c.workers), (64, 200, 3));
    }

    #[test]
    fn bad_thresholds_fail_before_inputs() {
        let e = resolve(&[
            "winview",
            "segment-ndvi",
            "--ndvi",
            "/nope",
            "--greenery-min",
            "-0.5",
        ])
        .unwrap_err();
        assert!(matches!(e, Error::Validation(_)), "{e:?}");
    }

    #[test]
    fn missing_input_names_the_path() {
        let c = resolve(&[
            "winview",
            "segment-ndvi",
            "--ndvi",
            "/no/such/ndvi.asc",
            "--out",
            "x.asc",
        ])
        .unwrap();
        let e = cmd_segment_ndvi(&c).unwrap_err();
        assert!(e.to_string().contains("/no/such/ndvi.asc"));
        assert_eq!(exit_code(&e), EXIT_INPUT);
    }

    #[test]
    fn parse_errors_exit_one() {
        assert_eq!(run(["winview", "assess", "--width", "wide"]), EXIT_INPUT);
        assert_eq!(run(["winview", "no-such-command"]), EXIT_INPUT);
    }
}
