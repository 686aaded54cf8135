//! Assesses a batch of facade windows in the synthetic city and prints the
//! results with the step timings.
//!
//! cargo run --release -p winview --example batch_assessment -- [windows] [workers]

use winview::oracle::{make_fixture, FixtureParams};
use winview::wvi::{assess_batch, encode_csv, BatchOptions};

fn main() -> winview::Result<()> {
    let mut args = std::env::args().skip(1);
    let windows: usize = args.next().map_or(25, |s| s.parse().expect("window count"));
    let workers: usize = args.next().map_or(0, |s| s.parse().expect("worker count"));

    let city = make_fixture(
        "synthetic-city",
        &FixtureParams {
            windows,
            ..FixtureParams::default()
        },
    )?;
    println!(
        "{} triangles, {} windows",
        city.scene.triangle_count(),
        city.windows.len()
    );

    let options = BatchOptions {
        camera: city.camera,
        workers,
        ..BatchOptions::default()
    };
    let report = assess_batch(&city.scene, &city.windows, &options)?;
    for line in encode_csv(&report.records).lines().take(6) {
        println!("{line}");
    }
    print!("{}", report.timing.to_text());
    println!(
        "scene_preparations = {}",
        report.counters.scene_preparations
    );
    Ok(())
}
