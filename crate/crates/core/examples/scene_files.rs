//! Exports a fixture in the on-disk formats, reads it back, and assesses the
//! reloaded scene: the same round trip the command line performs.
//!
//! cargo run -p winview --example scene_files -- [dir]

use winview::ingest::load_windows;
use winview::oracle::{make_fixture, FixtureParams};
use winview::render::ColoredScene;
use winview::transfer::LabeledMesh;
use winview::wvi::{assess_batch, encode_csv, BatchOptions};

fn main() -> winview::Result<()> {
    let dir = std::env::args().nth(1).map_or_else(
        || std::env::temp_dir().join("winview-half-wall"),
        Into::into,
    );
    let fixture = make_fixture("half-wall", &FixtureParams::default())?;
    fixture.save(&dir)?;
    println!("exported to {}", dir.display());

    let scene = ColoredScene::new(
        LabeledMesh::load(dir.join("near.ply"))?,
        LabeledMesh::load(dir.join("far.ply"))?,
        fixture.scene.cutoff_m,
    )?;
    let windows = load_windows(dir.join("windows.csv"))?;
    let report = assess_batch(
        &scene,
        &windows,
        &BatchOptions {
            camera: fixture.camera,
            ..BatchOptions::default()
        },
    )?;
    print!("{}", encode_csv(&report.records));
    println!(
        "expected: {}",
        std::fs::read_to_string(dir.join("expected.csv"))?
            .lines()
            .nth(1)
            .unwrap_or("")
    );
    Ok(())
}
