//! Segments a coarse NDVI raster into labels and resamples them onto a finer
//! DSM grid.
//!
//! cargo run -p winview --example ndvi_segmentation

use winview::distant::{register_labels, segment_ndvi, NdviThresholds};
use winview::ingest::GeoRaster;
use winview::SemanticLabel;

fn main() -> winview::Result<()> {
    let nodata = -9999.0;
    // 4x3 cells of 30 m, rows south first; the corner is a no-data sea.
    #[rustfmt::skip]
    let ndvi = GeoRaster::new(4, 3, 0.0, 0.0, 30.0, nodata, vec![
        nodata, 0.05, 0.3, 0.6,
        -0.2,   0.0,  0.1, 0.4,
        0.02,   0.08, 0.2, 0.11,
    ])?;
    let labels = segment_ndvi(&ndvi, &NdviThresholds::default());
    for row in (0..3).rev() {
        let line: Vec<&str> = (0..4).map(|c| labels.label(c, row).name()).collect();
        println!("{}", line.join(" "));
    }

    let dsm = GeoRaster::new(12, 9, 0.0, 0.0, 10.0, nodata, vec![0.0; 108])?;
    let fine = register_labels(&labels, &dsm);
    for l in SemanticLabel::GEOMETRY {
        let n = fine.labels().iter().filter(|&&x| x == l).count();
        println!("{:<13} {n} of {} DSM cells", l.name(), fine.labels().len());
    }
    Ok(())
}
