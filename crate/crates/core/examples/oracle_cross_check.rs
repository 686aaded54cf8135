//! Compares the rasterizer with the ray-casting reference on the analytic
//! fixtures and on seeded random box scenes.
//!
//! cargo run --release -p winview --example oracle_cross_check -- [scenes] [size]

use std::time::Instant;

use winview::oracle::{cross_check, make_fixture, random_box_scene, FixtureParams, FIXTURE_NAMES};
use winview::render::CameraParams;

fn main() -> winview::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenes: u64 = args.next().map_or(10, |s| s.parse().expect("scene count"));
    let size: u32 = args.next().map_or(900, |s| s.parse().expect("image size"));
    let camera = CameraParams::default().with_size(size, size);

    let params = FixtureParams {
        camera,
        windows: 10,
        ..FixtureParams::default()
    };
    for name in FIXTURE_NAMES {
        let f = make_fixture(name, &params)?;
        let t = Instant::now();
        let rmse = cross_check(&f.scene, &f.windows, &camera)?;
        println!(
            "{name:>16}: max rmse {:.6} ({:.2}s)",
            rmse.max(),
            t.elapsed().as_secs_f64()
        );
    }

    let mut worst: f64 = 0.0;
    for seed in 0..scenes {
        let f = random_box_scene(seed, camera)?;
        let rmse = cross_check(&f.scene, &f.windows, &camera)?;
        worst = worst.max(rmse.max());
    }
    println!("{scenes} random scenes: worst per-label difference {worst:.6}");
    Ok(())
}
