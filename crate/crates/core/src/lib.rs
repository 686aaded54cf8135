//! Window view index (WVI) assessment over semantically colored 3D city scenes.
//!
//! The pipeline has two steps. Scene preparation labels a city mesh from a
//! labeled point cloud and turns a DSM plus an NDVI raster into a labeled
//! far-field terrain layer. Assessment places a level camera on every window,
//! rasterizes the four-color scene, and counts pixels per palette color.
//!
//! ```text
//! mesh + labeled cloud ──transfer──▶ near LabeledMesh ─┐
//! NDVI ──segment──▶ labels ──register──▶ DSM mesh ─────┴─▶ ColoredScene
//! windows.csv ──▶ CameraPose ──render──▶ ViewImage ──count──▶ WviRecord
//! ```
//!
//! Runnable walkthroughs of each capability live in this crate's `examples/`
//! directory; `cargo run -p winview --example <name>`.

pub mod cli;
pub mod distant;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod render;
pub mod transfer;
pub mod wvi;

pub use error::{Error, Result};
pub use model::{Rgb8, SemanticLabel, WviRecord};
