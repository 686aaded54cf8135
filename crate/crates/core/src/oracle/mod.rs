//! Independent reference renderer and procedural fixtures for validating the
//! rasterizer.

mod bvh;
pub mod fixtures;
mod raycast;

pub use fixtures::{
    make_fixture, random_box_scene, ExpectedWvi, Fixture, FixtureParams, FIXTURE_NAMES,
};
pub use raycast::{
    raycast_prepared, raycast_view, raycast_view_with, Acceleration, RayHit, RayScene,
};

use crate::error::Result;
use crate::ingest::WindowSpec;
use crate::render::{CameraParams, ColoredScene};
use crate::wvi::{assess_batch, rmse_compare, BatchOptions, RmseReport};

/// Assesses `windows` with both renderers and reports the per-label RMSE
/// between the two result sets.
pub fn cross_check(
    scene: &ColoredScene,
    windows: &[WindowSpec],
    camera: &CameraParams,
) -> Result<RmseReport> {
    let raster = assess_batch(
        scene,
        windows,
        &BatchOptions {
            camera: *camera,
            ..BatchOptions::default()
        },
    )?;
    let oracle = assess_batch(
        scene,
        windows,
        &BatchOptions {
            camera: *camera,
            use_oracle: true,
            ..BatchOptions::default()
        },
    )?;
    rmse_compare(&raster.records, &oracle.records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::{place_camera, render_view};
    use crate::wvi::compute_wvi;

    #[test]
    fn bvh_matches_brute_force() {
        let camera = CameraParams::default().with_size(120, 90);
        for seed in 0..4 {
            let f = random_box_scene(seed, camera).unwrap();
            let pose = place_camera(&f.windows[0], &camera);
            let a = raycast_view_with(&f.scene, &pose, Acceleration::Bvh);
            let b = raycast_view_with(&f.scene, &pose, Acceleration::BruteForce);
            assert_eq!(a, b, "seed {seed}");
        }
    }

    #[test]
    fn oracle_reproduces_analytic_fixtures() {
        let params = FixtureParams {
            camera: CameraParams::default().with_size(200, 150),
            ..FixtureParams::default()
        };
        for name in ["empty-sky", "full-wall", "half-wall", "quad-split"] {
            let f = make_fixture(name, &params).unwrap();
            let pose = place_camera(&f.windows[0], &params.camera);
            let rec = compute_wvi(&raycast_view(&f.scene, &pose))
                .unwrap()
                .to_record("w0");
            let e = f.expected[0].unwrap();
            for k in 0..4 {
                assert!(
                    (rec.wvi[k] - e.wvi[k]).abs() <= e.tolerance,
                    "{name} {k}: {:?}",
                    rec.wvi
                );
            }
        }
    }

    #[test]
    fn raster_and_oracle_agree_on_random_scenes() {
        let camera = CameraParams::default().with_size(160, 120);
        for seed in 10..14 {
            let f = random_box_scene(seed, camera).unwrap();
            let pose = place_camera(&f.windows[0], &camera);
            let a = render_view(&f.scene, &pose);
            let b = raycast_view(&f.scene, &pose);
            let same = a
                .pixels()
                .iter()
                .zip(b.pixels())
                .filter(|(p, q)| p == q)
                .count();
            assert!(
                same as f64 >= 0.99 * a.len() as f64,
                "seed {seed}: {same}/{}",
                a.len()
            );
        }
    }
}
