//! Loaders and writers for the on-disk inputs: PLY meshes and labeled point
//! clouds, ESRI ASCII grids, and the window manifest CSV.

pub mod mesh;
pub mod ply;
pub mod raster;
pub mod windows;

pub use mesh::{
    load_mesh, load_point_cloud, save_mesh, save_point_cloud, LabeledPoint, LabeledPointCloud,
    LoadedMesh, Mesh,
};
pub use ply::PlyFormat;
pub use raster::{load_raster, save_raster, GeoRaster};
pub use windows::{load_windows, save_windows, WindowSpec};
