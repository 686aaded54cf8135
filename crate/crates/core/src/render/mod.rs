//! Window cameras and the four-color software renderer.

pub mod camera;
pub mod image;
pub mod raster;
pub mod scene;

pub use camera::{place_camera, CameraParams, CameraPoint, CameraPose};
pub use image::{load_image, save_image, ViewImage};
pub use raster::{render_prepared, render_prepared_ordered, render_view};
pub use scene::{ColoredScene, Layer, PreparedScene, SceneTriangle};
