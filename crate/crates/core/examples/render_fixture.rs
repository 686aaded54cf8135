//! Renders one analytic fixture, saves the view as PPM, and compares its
//! WVI with the known answer.
//!
//! cargo run -p winview --example render_fixture -- [fixture] [out.ppm]

use winview::oracle::{make_fixture, FixtureParams};
use winview::render::{place_camera, render_view, save_image};
use winview::wvi::compute_wvi;
use winview::SemanticLabel;

fn main() -> winview::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "quad-split".into());
    let out = args.next().unwrap_or_else(|| format!("{name}.ppm"));

    let fixture = make_fixture(&name, &FixtureParams::default())?;
    let camera = place_camera(&fixture.windows[0], &fixture.camera);
    let img = render_view(&fixture.scene, &camera);
    save_image(&img, &out)?;

    let wvi = compute_wvi(&img)?.fractions();
    let expected = fixture.expected[0];
    for l in SemanticLabel::ALL {
        match expected {
            Some(e) => println!(
                "{:<13} {:.6}  expected {:.6} ± {}",
                l.name(),
                wvi[l.index()],
                e.wvi[l.index()],
                e.tolerance
            ),
            None => println!("{:<13} {:.6}", l.name(), wvi[l.index()]),
        }
    }
    println!("wrote {out}");
    Ok(())
}
