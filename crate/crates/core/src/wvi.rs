//! Pixel counting, batch assessment over a window manifest, result CSV, and
//! RMSE comparison between two result sets.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::windows::validate_windows;
use crate::ingest::WindowSpec;
use crate::model::{color_to_label, SemanticLabel, WviRecord};
use crate::oracle::{raycast_prepared, Acceleration};
use crate::render::{
    place_camera, render_prepared, save_image, CameraParams, ColoredScene, PreparedScene, ViewImage,
};

/// Exact per-label pixel counts of one image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewCounts {
    pub counts: [u64; 4],
    pub total: u64,
}

impl ViewCounts {
    pub fn count(&self, label: SemanticLabel) -> u64 {
        self.counts[label.index()]
    }

    /// Index values; division happens only here.
    pub fn fractions(&self) -> [f64; 4] {
        self.counts.map(|c| c as f64 / self.total as f64)
    }

    pub fn to_record(&self, window_id: impl Into<String>) -> WviRecord {
        WviRecord::new(window_id, self.fractions())
    }
}

/// Counts pixels per label. Fails on the first non-palette color.
pub fn compute_wvi(img: &ViewImage) -> Result<ViewCounts> {
    if img.is_empty() {
        return Err(Error::validation("cannot compute WVI of an empty image"));
    }
    let mut counts = [0u64; 4];
    for &p in img.pixels() {
        counts[color_to_label(p)?.index()] += 1;
    }
    Ok(ViewCounts {
        counts,
        total: img.len() as u64,
    })
}

#[derive(Debug, Clone, Default)]
pub struct BatchOptions {
    pub camera: CameraParams,
    /// Worker threads; 0 uses rayon's default.
    pub workers: usize,
    /// Record per-window failures and continue instead of aborting.
    pub keep_going: bool,
    /// Write each rendered view as `<dir>/<window id>.ppm`.
    pub dump_dir: Option<PathBuf>,
    /// Render with the ray-casting reference instead of the rasterizer.
    pub use_oracle: bool,
}

/// Step timings mirroring the two-step split: view generation (rendering)
/// and WVI quantification (counting), plus the one-off scene preparation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepTiming {
    pub windows: usize,
    pub scene_prep_secs: f64,
    pub render_secs_total: f64,
    pub quantify_secs_total: f64,
    pub wall_secs: f64,
}

impl StepTiming {
    fn per_window(&self, total: f64) -> f64 {
        if self.windows == 0 {
            0.0
        } else {
            total / self.windows as f64
        }
    }

    pub fn render_mean_secs(&self) -> f64 {
        self.per_window(self.render_secs_total)
    }

    pub fn quantify_mean_secs(&self) -> f64 {
        self.per_window(self.quantify_secs_total)
    }

    /// Scene preparation amortized over the batch.
    pub fn prep_per_window_secs(&self) -> f64 {
        self.per_window(self.scene_prep_secs)
    }

    /// Key-value text block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "windows = {}", self.windows);
        let _ = writeln!(s, "scene_prep_secs = {:.6}", self.scene_prep_secs);
        let _ = writeln!(
            s,
            "scene_prep_per_window_secs = {:.6}",
            self.prep_per_window_secs()
        );
        let _ = writeln!(
            s,
            "view_generation_total_secs = {:.6}",
            self.render_secs_total
        );
        let _ = writeln!(
            s,
            "view_generation_mean_secs = {:.6}",
            self.render_mean_secs()
        );
        let _ = writeln!(
            s,
            "quantification_total_secs = {:.6}",
            self.quantify_secs_total
        );
        let _ = writeln!(
            s,
            "quantification_mean_secs = {:.6}",
            self.quantify_mean_secs()
        );
        let _ = writeln!(s, "wall_secs = {:.6}", self.wall_secs);
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "windows": self.windows,
            "scene_prep_secs": self.scene_prep_secs,
            "scene_prep_per_window_secs": self.prep_per_window_secs(),
            "view_generation_total_secs": self.render_secs_total,
            "view_generation_mean_secs": self.render_mean_secs(),
            "quantification_total_secs": self.quantify_secs_total,
            "quantification_mean_secs": self.quantify_mean_secs(),
            "wall_secs": self.wall_secs,
        })
    }
}

/// Instrumentation counters for one batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BatchCounters {
    pub scene_preparations: usize,
    pub views_rendered: usize,
    pub images_quantified: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFailure {
    pub window_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentReport {
    /// Successful windows in manifest order.
    pub records: Vec<WviRecord>,
    /// Pixel counts parallel to `records`.
    pub counts: Vec<ViewCounts>,
    pub failures: Vec<WindowFailure>,
    pub timing: StepTiming,
    pub counters: BatchCounters,
}

struct WindowOutcome {
    counts: ViewCounts,
    render_secs: f64,
    quantify_secs: f64,
}

/// File-system-safe image name for a window id.
pub fn image_file_name(window_id: &str) -> String {
    let safe: String = window_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.ppm")
}

fn assess_one(
    scene: &PreparedScene,
    window: &WindowSpec,
    options: &BatchOptions,
    rendered: &AtomicUsize,
    quantified: &AtomicUsize,
) -> Result<WindowOutcome> {
    let t0 = Instant::now();
    let camera = place_camera(window, &options.camera);
    let image = if options.use_oracle {
        raycast_prepared(scene, &camera, Acceleration::Bvh)
    } else {
        render_prepared(scene, &camera)
    };
    let render_secs = t0.elapsed().as_secs_f64();
    rendered.fetch_add(1, Ordering::Relaxed);

    if let Some(dir) = &options.dump_dir {
        save_image(&image, dir.join(image_file_name(&window.id)))?;
    }

    let t1 = Instant::now();
    let counts = compute_wvi(&image)?;
    let quantify_secs = t1.elapsed().as_secs_f64();
    quantified.fetch_add(1, Ordering::Relaxed);
    Ok(WindowOutcome {
        counts,
        render_secs,
        quantify_secs,
    })
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

/// Renders and counts every window. The scene is prepared once; records come
/// back in manifest order whatever the worker count.
pub fn assess_batch(
    scene: &ColoredScene,
    windows: &[WindowSpec],
    options: &BatchOptions,
) -> Result<AssessmentReport> {
    let wall = Instant::now();
    scene.validate()?;
    options.camera.validate()?;
    validate_windows(windows)?;

    let t_prep = Instant::now();
    let prepared = PreparedScene::new(scene);
    let scene_prep_secs = t_prep.elapsed().as_secs_f64();

    let rendered = AtomicUsize::new(0);
    let quantified = AtomicUsize::new(0);
    let outcomes: Vec<Result<WindowOutcome>> = thread_pool(options.workers)?.install(|| {
        windows
            .par_iter()
            .map(|w| {
                assess_one(&prepared, w, options, &rendered, &quantified).map_err(|e| {
                    Error::Window {
                        id: w.id.clone(),
                        source: Box::new(e),
                    }
                })
            })
            .collect()
    });

    let mut report = AssessmentReport {
        records: Vec::with_capacity(windows.len()),
        counts: Vec::with_capacity(windows.len()),
        failures: Vec::new(),
        timing: StepTiming {
            scene_prep_secs,
            ..StepTiming::default()
        },
        counters: BatchCounters {
            scene_preparations: 1,
            ..BatchCounters::default()
        },
    };
    for (w, outcome) in windows.iter().zip(outcomes) {
        match outcome {
            Ok(o) => {
                report.records.push(o.counts.to_record(&w.id));
                report.counts.push(o.counts);
                report.timing.render_secs_total += o.render_secs;
                report.timing.quantify_secs_total += o.quantify_secs;
            }
            Err(e) if options.keep_going => {
                log::error!("{e}");
                report.failures.push(WindowFailure {
                    window_id: w.id.clone(),
                    message: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    report.timing.windows = report.records.len();
    report.counters.views_rendered = rendered.into_inner();
    report.counters.images_quantified = quantified.into_inner();
    report.timing.wall_secs = wall.elapsed().as_secs_f64();
    Ok(report)
}

pub const CSV_HEADER: &str = "id,wvi_greenery,wvi_waterbody,wvi_sky,wvi_construction";

pub fn encode_csv(records: &[WviRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6}",
            csv_field(&r.window_id),
            r.wvi[0],
            r.wvi[1],
            r.wvi[2],
            r.wvi[3]
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_csv(records: &[WviRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_csv(records)).map_err(|e| Error::from(e).in_file(path))
}

pub fn parse_csv(text: &str) -> Result<Vec<WviRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::parse(format!(
            "results CSV header must be {CSV_HEADER:?}"
        )));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::parse(e.to_string()))?;
        let mut wvi = [0.0; 4];
        for (k, v) in wvi.iter_mut().enumerate() {
            let field = &row[k + 1];
            *v = field
                .parse()
                .map_err(|_| Error::parse(format!("bad WVI value {field:?}")))?;
        }
        records.push(WviRecord::new(&row[0], wvi));
    }
    Ok(records)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<WviRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_csv(&text).map_err(|e| e.in_file(path))
}

/// Per-label root mean squared difference between two result sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseReport {
    pub per_label: [f64; 4],
    /// Mean of the four per-label values.
    pub average: f64,
    pub windows: usize,
}

impl RmseReport {
    pub fn get(&self, label: SemanticLabel) -> f64 {
        self.per_label[label.index()]
    }

    pub fn max(&self) -> f64 {
        self.per_label.iter().copied().fold(0.0, f64::max)
    }
}

impl fmt::Display for RmseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "label          rmse")?;
        for label in SemanticLabel::ALL {
            writeln!(f, "{:<14} {:.6}", label.name(), self.get(label))?;
        }
        write!(f, "{:<14} {:.6}", "average", self.average)
    }
}

/// Pairs records by window id. Both sets must hold exactly the same ids.
pub fn rmse_compare(a: &[WviRecord], b: &[WviRecord]) -> Result<RmseReport> {
    let index = |records: &[WviRecord], side: &str| -> Result<HashMap<String, [f64; 4]>> {
        let mut map = HashMap::with_capacity(records.len());
        for r in records {
            if map.insert(r.window_id.clone(), r.wvi).is_some() {
                return Err(Error::IdMismatch(format!(
                    "duplicate id {:?} in {side}",
                    r.window_id
                )));
            }
        }
        Ok(map)
    };
    let (_, mb) = (index(a, "first set")?, index(b, "second set")?);
    if a.len() != b.len() {
        return Err(Error::IdMismatch(format!(
            "{} vs {} windows",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::IdMismatch("no windows to compare".into()));
    }
    let mut sq = [0.0f64; 4];
    for r in a {
        let other = mb.get(&r.window_id).ok_or_else(|| {
            Error::IdMismatch(format!("{:?} missing from second set", r.window_id))
        })?;
        for k in 0..4 {
            let d = r.wvi[k] - other[k];
            sq[k] += d * d;
        }
    }
    let n = a.len() as f64;
    let per_label = sq.map(|s| (s / n).sqrt());
    Ok(RmseReport {
        per_label,
        average: per_label.iter().sum::<f64>() / 4.0,
        windows: a.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Rgb8, CONSTRUCTION_COLOR, GREENERY_COLOR, SKY_COLOR, WATERBODY_COLOR};
    use proptest::prelude::*;

    #[test]
    fn all_white() {
        let c = compute_wvi(&ViewImage::sky(900, 900)).unwrap();
        assert_eq!(c.fractions(), [0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn four_quadrants() {
        let mut img = ViewImage::sky(4, 4);
        for row in 0..4 {
            for col in 0..4 {
                let color = match (col < 2, row < 2) {
                    (true, true) => GREENERY_COLOR,
                    (false, true) => WATERBODY_COLOR,
                    (true, false) => SKY_COLOR,
                    (false, false) => CONSTRUCTION_COLOR,
                };
                img.set(col, row, color);
            }
        }
        assert_eq!(compute_wvi(&img).unwrap().fractions(), [0.25; 4]);
    }

    #[test]
    fn quarter_green_rest_red() {
        let mut px = vec![CONSTRUCTION_COLOR; 810_000];
        px[..202_500].fill(GREENERY_COLOR);
        let c = compute_wvi(&ViewImage::from_pixels(900, 900, px).unwrap()).unwrap();
        assert_eq!(c.counts, [202_500, 0, 0, 607_500]);
        assert_eq!(c.fractions(), [0.25, 0.0, 0.0, 0.75]);
    }

    #[test]
    fn non_palette_pixel_fails() {
        let mut img = ViewImage::sky(2, 2);
        img.set(1, 1, Rgb8::new(254, 0, 0));
        assert!(matches!(compute_wvi(&img), Err(Error::UnknownColor(_))));
        assert!(compute_wvi(&ViewImage::sky(0, 0)).is_err());
    }

    #[test]
    fn csv_row_format() {
        let text = encode_csv(&[WviRecord::new("w1", [0.0, 0.0, 1.0, 0.0])]);
        assert_eq!(
            text,
            format!("{CSV_HEADER}\nw1,0.000000,0.000000,1.000000,0.000000\n")
        );
    }

    #[test]
    fn csv_round_trip_and_quoting() {
        let records = vec![
            WviRecord::new("a,b", [0.1234564, 0.2, 0.3, 0.3765436]),
            WviRecord::new("plain", [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]),
        ];
        let back = parse_csv(&encode_csv(&records)).unwrap();
        assert_eq!(back.len(), 2);
        for (r, b) in records.iter().zip(&back) {
            assert_eq!(r.window_id, b.window_id);
            for k in 0..4 {
                assert!((r.wvi[k] - b.wvi[k]).abs() <= 5e-7);
            }
        }
    }

    #[test]
    fn unwritable_csv_path() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_csv(&[], dir.path().join("no").join("x.csv")).unwrap_err();
        assert!(matches!(err.root(), Error::Io(_)));
    }

    #[test]
    fn rmse_examples() {
        let a = vec![WviRecord::new("w", [0.5, 0.1, 0.2, 0.2])];
        let same = rmse_compare(&a, &a).unwrap();
        assert_eq!(same.per_label, [0.0; 4]);
        assert_eq!(same.average, 0.0);

        let b = vec![WviRecord::new("w", [0.4, 0.1, 0.2, 0.2])];
        assert!((rmse_compare(&a, &b).unwrap().get(SemanticLabel::Greenery) - 0.1).abs() < 1e-12);

        // Differences 0.1 and 0.3: mean square 0.05.
        let a = vec![
            WviRecord::new("x", [0.5, 0.0, 0.5, 0.0]),
            WviRecord::new("y", [0.6, 0.0, 0.4, 0.0]),
        ];
        let b = vec![
            WviRecord::new("y", [0.3, 0.0, 0.4, 0.0]),
            WviRecord::new("x", [0.4, 0.0, 0.5, 0.0]),
        ];
        let r = rmse_compare(&a, &b).unwrap();
        assert!((r.get(SemanticLabel::Greenery) - 0.05f64.sqrt()).abs() < 1e-12);
        assert!((r.get(SemanticLabel::Greenery) - 0.2236).abs() < 1e-4);
        assert_eq!(r.get(SemanticLabel::Sky), 0.0);
    }

    #[test]
    fn rmse_id_mismatch() {
        let a = vec![WviRecord::new("x", [0.0; 4])];
        let b = vec![WviRecord::new("y", [0.0; 4])];
        assert!(matches!(rmse_compare(&a, &b), Err(Error::IdMismatch(_))));
        assert!(matches!(rmse_compare(&a, &[]), Err(Error::IdMismatch(_))));
        let dup = vec![WviRecord::new("x", [0.0; 4]), WviRecord::new("x", [0.0; 4])];
        assert!(matches!(
            rmse_compare(&dup, &dup),
            Err(Error::IdMismatch(_))
        ));
    }

    #[test]
    fn empty_batch() {
        let r = assess_batch(&ColoredScene::empty(), &[], &BatchOptions::default()).unwrap();
        assert!(r.records.is_empty());
        assert_eq!(r.timing.render_secs_total, 0.0);
        assert_eq!(r.timing.quantify_secs_total, 0.0);
        assert_eq!(r.timing.render_mean_secs(), 0.0);
    }

    #[test]
    fn three_windows_empty_scene() {
        let windows: Vec<_> = (0..3)
            .map(|i| {
                WindowSpec::new(
                    format!("w{i}"),
                    crate::geometry::Vec3::new(i as f64, 0.0, 1.5),
                    90.0 * i as f64,
                )
                .unwrap()
            })
            .collect();
        let opts = BatchOptions {
            camera: CameraParams::default().with_size(40, 30),
            ..BatchOptions::default()
        };
        let r = assess_batch(&ColoredScene::empty(), &windows, &opts).unwrap();
        assert_eq!(r.records.len(), 3);
        for (rec, w) in r.records.iter().zip(&windows) {
            assert_eq!(rec.window_id, w.id);
            assert_eq!(rec.wvi, [0.0, 0.0, 1.0, 0.0]);
        }
        assert_eq!(
            r.counters,
            BatchCounters {
                scene_preparations: 1,
                views_rendered: 3,
                images_quantified: 3
            }
        );
    }

    #[test]
    fn dump_failure_aborts_or_is_recorded() {
        let windows = vec![WindowSpec::new("w0", crate::geometry::Vec3::ZERO, 0.0).unwrap()];
        let dir = tempfile::tempdir().unwrap();
        let mut opts = BatchOptions {
            camera: CameraParams::default().with_size(8, 8),
            dump_dir: Some(dir.path().join("missing")),
            ..BatchOptions::default()
        };
        let err = assess_batch(&ColoredScene::empty(), &windows, &opts).unwrap_err();
        assert!(matches!(err, Error::Window { ref id, .. } if id == "w0"));
        opts.keep_going = true;
        let r = assess_batch(&ColoredScene::empty(), &windows, &opts).unwrap();
        assert!(r.records.is_empty());
        assert_eq!(r.failures.len(), 1);
    }

    #[test]
    fn image_names_are_sanitized() {
        assert_eq!(image_file_name("b1/f3 w2"), "b1_f3_w2.ppm");
    }

    proptest! {
        #[test]
        fn counts_sum_and_permutation_invariance(
            codes in prop::collection::vec(0usize..4, 1..400),
            seed in any::<u64>(),
        ) {
            let px: Vec<Rgb8> = codes.iter().map(|&c| SemanticLabel::ALL[c].color()).collect();
            let n = px.len() as u32;
            let c = compute_wvi(&ViewImage::from_pixels(n, 1, px.clone()).unwrap()).unwrap();
            prop_assert_eq!(c.counts.iter().sum::<u64>(), c.total);
            prop_assert!(c.fractions().iter().all(|f| (0.0..=1.0).contains(f)));

            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = px;
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let c2 = compute_wvi(&ViewImage::from_pixels(1, n, shuffled).unwrap()).unwrap();
            prop_assert_eq!(c.counts, c2.counts);
        }
    }
}
