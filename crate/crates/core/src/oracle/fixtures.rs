//! Procedural test scenes: analytic views with known WVI, a synthetic city
//! large enough for throughput checks, and random box scenes for oracle
//! comparisons.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distant::{
    dsm_to_labeled_mesh, register_labels, segment_ndvi, NdviThresholds, DEFAULT_CUTOFF_M,
};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::ingest::{save_windows, GeoRaster, Mesh, PlyFormat, WindowSpec};
use crate::model::SemanticLabel::{self, *};
use crate::render::{CameraParams, ColoredScene};
use crate::transfer::LabeledMesh;

pub const FIXTURE_NAMES: [&str; 5] = [
    "empty-sky",
    "full-wall",
    "half-wall",
    "quad-split",
    "synthetic-city",
];

/// Eye height of the single window in the analytic fixtures.
const EYE_HEIGHT_M: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureParams {
    pub camera: CameraParams,
    pub seed: u64,
    /// Window count for the synthetic city.
    pub windows: usize,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams {
            camera: CameraParams::default(),
            seed: 7,
            windows: 100,
        }
    }
}

/// Known WVI for a window, within `tolerance` per label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedWvi {
    pub wvi: [f64; 4],
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub scene: ColoredScene,
    pub windows: Vec<WindowSpec>,
    /// Parallel to `windows`; `None` where only the oracle can tell.
    pub expected: Vec<Option<ExpectedWvi>>,
    pub camera: CameraParams,
}

impl Fixture {
    /// Writes `near.ply`, `far.ply`, `windows.csv`, `expected.csv` and a
    /// `fixture.toml` run config that `assess --config` accepts.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
        self.scene
            .near_mesh
            .save(dir.join("near.ply"), PlyFormat::BinaryLittleEndian)?;
        self.scene
            .far_mesh
            .save(dir.join("far.ply"), PlyFormat::BinaryLittleEndian)?;
        save_windows(dir.join("windows.csv"), &self.windows)?;

        let mut expected =
            String::from("id,wvi_greenery,wvi_waterbody,wvi_sky,wvi_construction,tolerance\n");
        for (w, e) in self.windows.iter().zip(&self.expected) {
            if let Some(e) = e {
                let [g, b, s, c] = e.wvi;
                writeln!(
                    expected,
                    "{},{g:.6},{b:.6},{s:.6},{c:.6},{:.6}",
                    w.id, e.tolerance
                )
                .unwrap();
            }
        }
        let path = dir.join("expected.csv");
        std::fs::write(&path, expected).map_err(|e| Error::from(e).in_file(&path))?;

        let c = &self.camera;
        let config = format!(
            "near_mesh = \"near.ply\"\nfar_mesh = \"far.ply\"\nwindows = \"windows.csv\"\n\
             cutoff_m = {:?}\nfov_deg = {:?}\nwidth = {}\nheight = {}\nnear_m = {:?}\nfar_m = {:?}\n",
            self.scene.cutoff_m, c.fov_deg, c.width, c.height, c.near_m, c.far_m
        );
        let path = dir.join("fixture.toml");
        std::fs::write(&path, config).map_err(|e| Error::from(e).in_file(&path))
    }
}

pub fn make_fixture(name: &str, params: &FixtureParams) -> Result<Fixture> {
    params.camera.validate()?;
    match name {
        "empty-sky" => Ok(analytic(
            name,
            params,
            ColoredScene::empty(),
            [0.0, 0.0, 1.0, 0.0],
            0.0,
        )),
        "full-wall" => full_wall(params),
        "half-wall" => half_wall(params),
        "quad-split" => quad_split(params),
        "synthetic-city" => synthetic_city(params),
        _ => Err(Error::UnknownFixture(name.to_string())),
    }
}

/// Accumulates labeled geometry; quads get their own vertices so each keeps
/// a uniform label, boxes share their eight corners.
#[derive(Debug, Default)]
struct SceneBuilder {
    vertices: Vec<Vec3>,
    labels: Vec<SemanticLabel>,
    triangles: Vec<[u32; 3]>,
}

impl SceneBuilder {
    fn vertex(&mut self, p: Vec3, label: SemanticLabel) -> u32 {
        self.vertices.push(p);
        self.labels.push(label);
        (self.vertices.len() - 1) as u32
    }

    /// Corners in order around the quad.
    fn quad(&mut self, corners: [Vec3; 4], label: SemanticLabel) {
        let [a, b, c, d] = corners.map(|p| self.vertex(p, label));
        self.triangles.push([a, b, c]);
        self.triangles.push([a, c, d]);
    }

    /// Axis-aligned box without its bottom face.
    fn block(&mut self, min: Vec3, max: Vec3, label: SemanticLabel) {
        let v: Vec<u32> = (0..8)
            .map(|i| {
                let p = Vec3::new(
                    if i & 1 == 0 { min.x } else { max.x },
                    if i & 2 == 0 { min.y } else { max.y },
                    if i & 4 == 0 { min.z } else { max.z },
                );
                self.vertex(p, label)
            })
            .collect();
        let faces = [
            [0, 1, 5, 4], // south
            [1, 3, 7, 5], // east
            [3, 2, 6, 7], // north
            [2, 0, 4, 6], // west
            [4, 5, 7, 6], // roof
        ];
        for f in faces {
            self.triangles.push([v[f[0]], v[f[1]], v[f[2]]]);
            self.triangles.push([v[f[0]], v[f[2]], v[f[3]]]);
        }
    }

    fn build(self) -> Result<LabeledMesh> {
        let (mesh, _) = Mesh::new(self.vertices, self.triangles)?;
        LabeledMesh::new(mesh, self.labels)
    }
}

/// Tangents of the half field of view, horizontal then vertical.
fn half_fov_tangents(camera: &CameraParams) -> (f64, f64) {
    let tv = (camera.fov_deg.to_radians() / 2.0).tan();
    (tv * camera.width as f64 / camera.height as f64, tv)
}

fn single_window() -> WindowSpec {
    WindowSpec::new("w0", Vec3::new(0.0, 0.0, EYE_HEIGHT_M), 0.0).expect("valid window")
}

fn analytic(
    name: &str,
    params: &FixtureParams,
    scene: ColoredScene,
    wvi: [f64; 4],
    tolerance: f64,
) -> Fixture {
    Fixture {
        name: name.to_string(),
        scene,
        windows: vec![single_window()],
        expected: vec![Some(ExpectedWvi { wvi, tolerance })],
        camera: params.camera,
    }
}

fn near_only(b: SceneBuilder) -> Result<ColoredScene> {
    ColoredScene::new(b.build()?, LabeledMesh::default(), DEFAULT_CUTOFF_M)
}

/// Vertical wall facing the camera at distance `d` north of the origin.
fn wall(b: &mut SceneBuilder, d: f64, x: [f64; 2], z: [f64; 2], label: SemanticLabel) {
    b.quad(
        [
            Vec3::new(x[0], d, z[0]),
            Vec3::new(x[1], d, z[0]),
            Vec3::new(x[1], d, z[1]),
            Vec3::new(x[0], d, z[1]),
        ],
        label,
    );
}

fn full_wall(params: &FixtureParams) -> Result<Fixture> {
    let d = 10.0;
    let (th, tv) = half_fov_tangents(&params.camera);
    let (ex, ez) = (1.5 * d * th, 1.5 * d * tv);
    let mut b = SceneBuilder::default();
    wall(
        &mut b,
        d,
        [-ex, ex],
        [EYE_HEIGHT_M - ez, EYE_HEIGHT_M + ez],
        Construction,
    );
    Ok(analytic(
        "full-wall",
        params,
        near_only(b)?,
        [0.0, 0.0, 0.0, 1.0],
        0.0,
    ))
}

/// Construction covers the left half of the view; the dividing edge lies on
/// the image center line, so the tolerance is two pixel columns.
fn half_wall(params: &FixtureParams) -> Result<Fixture> {
    let d = 10.0;
    let (th, tv) = half_fov_tangents(&params.camera);
    let (ex, ez) = (1.5 * d * th, 1.5 * d * tv);
    let mut b = SceneBuilder::default();
    wall(
        &mut b,
        d,
        [-ex, 0.0],
        [EYE_HEIGHT_M - ez, EYE_HEIGHT_M + ez],
        Construction,
    );
    let tol = 2.0 / params.camera.width as f64;
    Ok(analytic(
        "half-wall",
        params,
        near_only(b)?,
        [0.0, 0.0, 0.5, 0.5],
        tol,
    ))
}

/// One label per image quadrant: sky top-left, greenery top-right,
/// construction bottom-left, and water bottom-right (a low wall in front of
/// a ground plane). All dividing edges project onto the image center lines.
fn quad_split(params: &FixtureParams) -> Result<Fixture> {
    let d = 50.0;
    let h = EYE_HEIGHT_M;
    let (th, tv) = half_fov_tangents(&params.camera);
    let (ex, ez) = (1.5 * d * th, 1.5 * d * tv);
    let mut b = SceneBuilder::default();
    wall(&mut b, d, [-ex, 0.0], [h - ez, h], Construction);
    wall(&mut b, d, [0.0, ex], [h, h + ez], Greenery);
    wall(&mut b, d, [0.0, ex], [0.0, h], Waterbody);
    b.quad(
        [
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(ex, -1.0, 0.0),
            Vec3::new(ex, d, 0.0),
            Vec3::new(0.0, d, 0.0),
        ],
        Waterbody,
    );
    Ok(analytic(
        "quad-split",
        params,
        near_only(b)?,
        [0.25; 4],
        0.01,
    ))
}

/// Deterministic smooth field used for terrain and NDVI.
fn wave(x: f64, y: f64, phase: [f64; 4]) -> f64 {
    0.5 * ((x / 700.0 + phase[0]).sin() * (y / 900.0 + phase[1]).cos())
        + 0.3 * ((x / 230.0 + phase[2]).cos() * (y / 310.0 + phase[3]).sin())
}

/// A seeded city of block buildings, parks, trees and a river on a ground
/// grid, plus a 6.4 km DSM far-field with NDVI-derived labels and a sea.
/// Windows sit on facades and look straight out.
fn synthetic_city(params: &FixtureParams) -> Result<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let phase: [f64; 4] = [0, 1, 2, 3].map(|_| rng.gen_range(0.0..2.0 * PI));
    let river = |x: f64| 200.0 + 40.0 * (x / 150.0 + phase[0]).sin();
    let in_river = |x: f64, y: f64, margin: f64| (y - river(x)).abs() < 30.0 + margin;

    const PLOT: f64 = 30.0;
    const PLOTS: i32 = 40;
    let half = PLOT * PLOTS as f64 / 2.0;

    let mut b = SceneBuilder::default();
    let mut park = vec![false; (PLOTS * PLOTS) as usize];
    let mut buildings: Vec<(Vec3, Vec3)> = Vec::new();
    for j in 0..PLOTS {
        for i in 0..PLOTS {
            let x0 = -half + i as f64 * PLOT;
            let y0 = -half + j as f64 * PLOT;
            let (cx, cy) = (x0 + PLOT / 2.0, y0 + PLOT / 2.0);
            if in_river(cx, cy, 25.0) {
                continue;
            }
            let roll: f64 = rng.gen();
            if roll < 0.12 {
                park[(j * PLOTS + i) as usize] = true;
                for _ in 0..rng.gen_range(1..=3) {
                    let s = rng.gen_range(4.0..7.0);
                    let x = rng.gen_range(x0 + 3.0..x0 + PLOT - 3.0 - s);
                    let y = rng.gen_range(y0 + 3.0..y0 + PLOT - 3.0 - s);
                    let base = rng.gen_range(2.0..3.5);
                    let top = base + rng.gen_range(4.0..8.0);
                    b.block(
                        Vec3::new(x, y, base),
                        Vec3::new(x + s, y + s, top),
                        Greenery,
                    );
                }
            } else if roll < 0.92 {
                let (sx, sy) = (rng.gen_range(10.0..24.0), rng.gen_range(10.0..24.0));
                let x = rng.gen_range(x0 + 3.0..=x0 + PLOT - 3.0 - sx);
                let y = rng.gen_range(y0 + 3.0..=y0 + PLOT - 3.0 - sy);
                let height = 8.0 + 82.0 * rng.gen::<f64>().powi(2);
                let (min, max) = (Vec3::new(x, y, 0.0), Vec3::new(x + sx, y + sy, height));
                b.block(min, max, Construction);
                buildings.push((min, max));
            }
        }
    }

    const CELL: f64 = 25.0;
    let cells = (2.0 * (half + 50.0) / CELL) as i32;
    let g0 = -(half + 50.0);
    for j in 0..cells {
        for i in 0..cells {
            let (x, y) = (g0 + i as f64 * CELL, g0 + j as f64 * CELL);
            let (cx, cy) = (x + CELL / 2.0, y + CELL / 2.0);
            let pi = ((cx + half) / PLOT).floor() as i32;
            let pj = ((cy + half) / PLOT).floor() as i32;
            let label = if in_river(cx, cy, 0.0) {
                Waterbody
            } else if (0..PLOTS).contains(&pi)
                && (0..PLOTS).contains(&pj)
                && park[(pj * PLOTS + pi) as usize]
            {
                Greenery
            } else {
                Construction
            };
            b.quad(
                [
                    Vec3::new(x, y, 0.0),
                    Vec3::new(x + CELL, y, 0.0),
                    Vec3::new(x + CELL, y + CELL, 0.0),
                    Vec3::new(x, y + CELL, 0.0),
                ],
                label,
            );
        }
    }
    let near = b.build()?;
    let far = synthetic_terrain(phase)?;
    let scene = ColoredScene::new(near, far, DEFAULT_CUTOFF_M)?;

    let tall: Vec<&(Vec3, Vec3)> = buildings.iter().filter(|(_, max)| max.z >= 12.0).collect();
    if tall.is_empty() && params.windows > 0 {
        return Err(Error::validation(
            "synthetic city has no building tall enough for windows",
        ));
    }
    let mut windows = Vec::with_capacity(params.windows);
    for k in 0..params.windows {
        let &&(min, max) = &tall[rng.gen_range(0..tall.len())];
        let z = rng.gen_range(3.0..max.z - 3.0);
        let u: f64 = rng.gen_range(0.2..0.8);
        let (position, heading) = match rng.gen_range(0..4) {
            0 => (Vec3::new(min.x + u * (max.x - min.x), max.y + 0.3, z), 0.0),
            1 => (Vec3::new(max.x + 0.3, min.y + u * (max.y - min.y), z), 90.0),
            2 => (
                Vec3::new(min.x + u * (max.x - min.x), min.y - 0.3, z),
                180.0,
            ),
            _ => (
                Vec3::new(min.x - 0.3, min.y + u * (max.y - min.y), z),
                270.0,
            ),
        };
        windows.push(WindowSpec::new(format!("c{k:04}"), position, heading)?);
    }
    Ok(Fixture {
        name: "synthetic-city".to_string(),
        expected: vec![None; windows.len()],
        scene,
        windows,
        camera: params.camera,
    })
}

/// Rolling hills rising away from the city with a sea to the south-east,
/// labeled through the usual NDVI segmentation and registration.
fn synthetic_terrain(phase: [f64; 4]) -> Result<LabeledMesh> {
    const N: usize = 256;
    const CELL: f64 = 25.0;
    let origin = -(N as f64) * CELL / 2.0;
    let sea = |x: f64, y: f64| x > 1800.0 && y < -1200.0;
    let mut heights = Vec::with_capacity(N * N);
    for row in 0..N {
        for col in 0..N {
            let x = origin + (col as f64 + 0.5) * CELL;
            let y = origin + (row as f64 + 0.5) * CELL;
            let r = x.hypot(y);
            let rise = ((r - 1500.0).max(0.0) / 1700.0).powf(1.2);
            let h = if sea(x, y) {
                0.0
            } else {
                250.0 * rise * (1.0 + 0.6 * wave(x, y, phase))
            };
            heights.push(h.max(0.0));
        }
    }
    let dsm = GeoRaster::new(N, N, origin, origin, CELL, -9999.0, heights)?;

    const NDVI_N: usize = 128;
    let ndvi_cell = CELL * N as f64 / NDVI_N as f64;
    let nodata = -9999.0;
    let mut ndvi = Vec::with_capacity(NDVI_N * NDVI_N);
    for row in 0..NDVI_N {
        for col in 0..NDVI_N {
            let x = origin + (col as f64 + 0.5) * ndvi_cell;
            let y = origin + (row as f64 + 0.5) * ndvi_cell;
            ndvi.push(if sea(x, y) {
                nodata
            } else {
                0.6 * wave(y, x, phase) + 0.12
            });
        }
    }
    let ndvi = GeoRaster::new(NDVI_N, NDVI_N, origin, origin, ndvi_cell, nodata, ndvi)?;
    let labels = register_labels(&segment_ndvi(&ndvi, &NdviThresholds::default()), &dsm);
    dsm_to_labeled_mesh(&dsm, &labels)
}

/// Twenty non-intersecting labeled boxes on a patchwork ground around a
/// camera at the origin with a random heading, plus a hilly far-field DSM
/// behind a 100 m cutoff.
pub fn random_box_scene(seed: u64, camera: CameraParams) -> Result<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let label = |rng: &mut ChaCha8Rng| SemanticLabel::GEOMETRY[rng.gen_range(0..3)];
    let mut b = SceneBuilder::default();

    let mut boxes: Vec<(Vec3, Vec3)> = Vec::new();
    while boxes.len() < 20 {
        let r = rng.gen_range(4.0..90.0);
        let a = rng.gen_range(0.0..2.0 * PI);
        let (sx, sy) = (rng.gen_range(2.0..15.0), rng.gen_range(2.0..15.0));
        let (x, y) = (r * a.cos() - sx / 2.0, r * a.sin() - sy / 2.0);
        let base = if rng.gen_bool(0.2) {
            rng.gen_range(1.0..6.0)
        } else {
            0.0
        };
        let min = Vec3::new(x, y, base);
        let max = Vec3::new(x + sx, y + sy, base + rng.gen_range(3.0..40.0));
        let clear_of_camera = max.x < -1.0 || min.x > 1.0 || max.y < -1.0 || min.y > 1.0;
        let overlaps = boxes.iter().any(|(lo, hi)| {
            min.x < hi.x + 0.5 && max.x > lo.x - 0.5 && min.y < hi.y + 0.5 && max.y > lo.y - 0.5
        });
        if clear_of_camera && !overlaps {
            boxes.push((min, max));
            let l = label(&mut rng);
            b.block(min, max, l);
        }
    }

    const CELL: f64 = 10.0;
    for j in -12..12 {
        for i in -12..12 {
            let (x, y) = (i as f64 * CELL, j as f64 * CELL);
            let l = label(&mut rng);
            b.quad(
                [
                    Vec3::new(x, y, 0.0),
                    Vec3::new(x + CELL, y, 0.0),
                    Vec3::new(x + CELL, y + CELL, 0.0),
                    Vec3::new(x, y + CELL, 0.0),
                ],
                l,
            );
        }
    }

    const N: usize = 96;
    let origin = -(N as f64) * CELL / 2.0;
    let phase: [f64; 4] = [0, 1, 2, 3].map(|_| rng.gen_range(0.0..2.0 * PI));
    let mut heights = Vec::with_capacity(N * N);
    let mut codes = Vec::with_capacity(N * N);
    for row in 0..N {
        for col in 0..N {
            let x = origin + (col as f64 + 0.5) * CELL;
            let y = origin + (row as f64 + 0.5) * CELL;
            let r = x.hypot(y);
            heights.push((r - 100.0).max(0.0) * 0.15 * (1.0 + 0.5 * wave(3.0 * x, 3.0 * y, phase)));
            codes.push(0.5 * wave(5.0 * y, 5.0 * x, phase) + 0.1);
        }
    }
    let dsm = GeoRaster::new(N, N, origin, origin, CELL, -9999.0, heights)?;
    let labels = segment_ndvi(&dsm.with_values(codes)?, &NdviThresholds::default());
    let far = dsm_to_labeled_mesh(&dsm, &labels)?;
    let scene = ColoredScene::new(b.build()?, far, 100.0)?;

    let eye = rng.gen_range(1.5..15.0);
    let heading = rng.gen_range(0.0..360.0);
    Ok(Fixture {
        name: format!("random-boxes-{seed}"),
        scene,
        windows: vec![WindowSpec::new("r0", Vec3::new(0.0, 0.0, eye), heading)?],
        expected: vec![None],
        camera,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_named_fixture_builds() {
        let params = FixtureParams {
            windows: 5,
            ..FixtureParams::default()
        };
        for name in FIXTURE_NAMES {
            let f = make_fixture(name, &params).unwrap();
            assert_eq!(f.windows.len(), f.expected.len());
            assert_eq!(f.name, name);
        }
    }

    #[test]
    fn unknown_fixture_is_rejected() {
        assert!(matches!(
            make_fixture("no-such-scene", &FixtureParams::default()),
            Err(Error::UnknownFixture(_))
        ));
    }

    #[test]
    fn synthetic_city_is_large_and_seeded() {
        let params = FixtureParams {
            windows: 20,
            ..FixtureParams::default()
        };
        let a = make_fixture("synthetic-city", &params).unwrap();
        assert!(
            a.scene.triangle_count() >= 100_000,
            "{}",
            a.scene.triangle_count()
        );
        let b = make_fixture("synthetic-city", &params).unwrap();
        assert_eq!(a.windows, b.windows);
        assert_eq!(a.scene, b.scene);
        let far = a.scene.far_mesh.triangle_labels();
        for l in [Greenery, Waterbody, Construction] {
            assert!(far.contains(&l), "far field lacks {l}");
        }
    }

    #[test]
    fn random_boxes_do_not_overlap() {
        for seed in 0..5 {
            let f = random_box_scene(seed, CameraParams::default()).unwrap();
            assert_eq!(f.scene.cutoff_m, 100.0);
            assert!(f.scene.far_mesh.triangle_count() > 0);
        }
    }
}
