//! Builds the far-field layer from a DSM and an NDVI raster and shows how the
//! layer cutoff decides which geometry a window sees.
//!
//! cargo run --release -p winview --example distant_terrain

use winview::distant::{dsm_to_labeled_mesh, register_labels, segment_ndvi, NdviThresholds};
use winview::geometry::Vec3;
use winview::ingest::{GeoRaster, WindowSpec};
use winview::render::{place_camera, render_view, CameraParams, ColoredScene};
use winview::transfer::LabeledMesh;
use winview::wvi::compute_wvi;

fn main() -> winview::Result<()> {
    // An 8 km square DSM with an east-west ridge 3 km north of the window
    // and a no-data lake in front of it.
    let (n, cell) = (320usize, 25.0);
    let origin = -(n as f64) * cell / 2.0;
    let mut heights = Vec::with_capacity(n * n);
    let mut ndvi = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let y = origin + (row as f64 + 0.5) * cell;
            let x = origin + (col as f64 + 0.5) * cell;
            heights.push(300.0 * (-((y - 3000.0) / 600.0).powi(2)).exp());
            let lake = x.abs() < 600.0 && (1200.0..2200.0).contains(&y);
            ndvi.push(if lake {
                -9999.0
            } else if x < 0.0 {
                0.5
            } else {
                0.05
            });
        }
    }
    let dsm = GeoRaster::new(n, n, origin, origin, cell, -9999.0, heights)?;
    let ndvi = dsm.with_values(ndvi)?;
    let labels = register_labels(&segment_ndvi(&ndvi, &NdviThresholds::default()), &dsm);
    let far = dsm_to_labeled_mesh(&dsm, &labels)?;
    println!("far-field mesh: {} triangles", far.triangle_count());

    let window = WindowSpec::new("ridge-view", Vec3::new(0.0, 0.0, 20.0), 0.0)?;
    let camera = place_camera(&window, &CameraParams::default());
    for cutoff in [500.0, 2000.0, 5000.0] {
        let scene = ColoredScene::new(LabeledMesh::default(), far.clone(), cutoff)?;
        let wvi = compute_wvi(&render_view(&scene, &camera))?.fractions();
        println!(
            "cutoff {cutoff:>6} m: greenery {:.4} water {:.4} sky {:.4} construction {:.4}",
            wvi[0], wvi[1], wvi[2], wvi[3]
        );
    }
    Ok(())
}
