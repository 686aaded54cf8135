//! Counts palette pixels in a view image and writes the result row.
//!
//! cargo run -p winview --example wvi_from_image -- [view.ppm]

use winview::model::{label_to_color, SemanticLabel};
use winview::render::{load_image, ViewImage};
use winview::wvi::{compute_wvi, encode_csv};

fn main() -> winview::Result<()> {
    let img = match std::env::args().nth(1) {
        Some(path) => load_image(path)?,
        None => {
            // Top third sky, a greenery band, construction below.
            let mut img = ViewImage::sky(90, 90);
            for row in 30..90 {
                for col in 0..90 {
                    let label = if row < 50 {
                        SemanticLabel::Greenery
                    } else {
                        SemanticLabel::Construction
                    };
                    img.set(col, row, label_to_color(label));
                }
            }
            img
        }
    };
    let counts = compute_wvi(&img)?;
    for label in SemanticLabel::ALL {
        println!("{:<13} {:>8} px", label.name(), counts.count(label));
    }
    print!("{}", encode_csv(&[counts.to_record("view")]));
    Ok(())
}
