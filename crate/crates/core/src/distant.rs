//! Far-field layer: NDVI thresholding into three geometry labels, nearest
//! neighbor registration onto the DSM grid, and DSM heightfield meshing.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::ingest::raster::{encode_ascii_grid, GeoRaster};
use crate::ingest::Mesh;
use crate::model::SemanticLabel;
use crate::transfer::LabeledMesh;

/// Default distance beyond which the DSM layer replaces the city mesh.
pub const DEFAULT_CUTOFF_M: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NdviThresholds {
    /// Values strictly above this are greenery.
    pub greenery_min: f64,
    /// Values in `[construction_min, greenery_min]` are construction.
    pub construction_min: f64,
}

impl Default for NdviThresholds {
    fn default() -> Self {
        NdviThresholds {
            greenery_min: 0.1,
            construction_min: 0.0,
        }
    }
}

impl NdviThresholds {
    pub fn new(greenery_min: f64, construction_min: f64) -> Result<Self> {
        let t = NdviThresholds {
            greenery_min,
            construction_min,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.greenery_min.is_finite() || !self.construction_min.is_finite() {
            return Err(Error::validation("NDVI thresholds must be finite"));
        }
        if self.greenery_min < self.construction_min {
            return Err(Error::validation(format!(
                "greenery_min {} is below construction_min {}",
                self.greenery_min, self.construction_min
            )));
        }
        Ok(())
    }

    /// Label for one NDVI value; `None` is no-data.
    ///
    /// Values below `construction_min` are treated as water, like no-data.
    pub fn classify(&self, ndvi: Option<f64>) -> SemanticLabel {
        match ndvi {
            None => SemanticLabel::Waterbody,
            Some(v) if v > self.greenery_min => SemanticLabel::Greenery,
            Some(v) if v >= self.construction_min => SemanticLabel::Construction,
            Some(_) => SemanticLabel::Waterbody,
        }
    }
}

/// One geometry label per cell of a georeferenced grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRaster {
    grid: GeoRaster,
    labels: Vec<SemanticLabel>,
}

impl LabelRaster {
    pub fn new(grid: &GeoRaster, labels: Vec<SemanticLabel>) -> Result<Self> {
        if labels.len() != grid.values().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} cells",
                labels.len(),
                grid.values().len()
            )));
        }
        if labels.contains(&SemanticLabel::Sky) {
            return Err(Error::validation("sky label in label raster"));
        }
        Ok(LabelRaster {
            grid: grid.clone(),
            labels,
        })
    }

    /// Grid geometry; values are those of the raster the labels came from.
    pub fn grid(&self) -> &GeoRaster {
        &self.grid
    }

    pub fn labels(&self) -> &[SemanticLabel] {
        &self.labels
    }

    pub fn label(&self, col: usize, row: usize) -> SemanticLabel {
        self.labels[self.grid.index(col, row)]
    }

    /// ESRI ASCII grid of integer label codes.
    pub fn to_code_raster(&self) -> GeoRaster {
        let codes = self.labels.iter().map(|l| l.code() as f64).collect();
        GeoRaster::new(
            self.grid.ncols(),
            self.grid.nrows(),
            self.grid.origin_x(),
            self.grid.origin_y(),
            self.grid.cellsize(),
            -9999.0,
            codes,
        )
        .expect("same geometry as a valid raster")
    }

    pub fn from_code_raster(raster: &GeoRaster) -> Result<Self> {
        let labels = raster
            .values()
            .iter()
            .map(|&v| {
                if v.fract() != 0.0 {
                    return Err(Error::parse(format!("label code {v} is not an integer")));
                }
                SemanticLabel::from_geometry_code(v as i64)
            })
            .collect::<Result<Vec<_>>>()?;
        LabelRaster::new(raster, labels)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, encode_ascii_grid(&self.to_code_raster()))
            .map_err(|e| Error::from(e).in_file(path))
    }
}

pub fn segment_ndvi(ndvi: &GeoRaster, thresholds: &NdviThresholds) -> LabelRaster {
    let labels = (0..ndvi.values().len())
        .into_par_iter()
        .map(|i| {
            let (col, row) = (i % ndvi.ncols(), i / ndvi.ncols());
            thresholds.classify(ndvi.get(col, row))
        })
        .collect();
    LabelRaster {
        grid: ndvi.clone(),
        labels,
    }
}

/// Nearest-neighbor resampling of `labels` onto `target`'s grid: each target
/// cell takes the label of the source cell containing its center. Centers
/// outside the source extent become water.
pub fn register_labels(labels: &LabelRaster, target: &GeoRaster) -> LabelRaster {
    let out = (0..target.values().len())
        .into_par_iter()
        .map(|i| {
            let (col, row) = (i % target.ncols(), i / target.ncols());
            let (x, y) = target.cell_center(col, row);
            match labels.grid.cell_containing(x, y) {
                Some((c, r)) => labels.label(c, r),
                None => SemanticLabel::Waterbody,
            }
        })
        .collect();
    LabelRaster {
        grid: target.clone(),
        labels: out,
    }
}

/// Meshes a DSM as a heightfield with one vertex per valid cell center.
///
/// Each complete quad of valid nodes yields two triangles split along the
/// lower-left to upper-right diagonal. Vertices carry their cell's label and
/// triangle labels follow the usual majority rule, so a region of uniform
/// label keeps that label on every triangle.
pub fn dsm_to_labeled_mesh(dsm: &GeoRaster, labels: &LabelRaster) -> Result<LabeledMesh> {
    if !dsm.same_grid(labels.grid()) {
        return Err(Error::DimensionMismatch(format!(
            "label grid {}x{} at ({}, {}) step {} does not match DSM {}x{} at ({}, {}) step {}",
            labels.grid.ncols(),
            labels.grid.nrows(),
            labels.grid.origin_x(),
            labels.grid.origin_y(),
            labels.grid.cellsize(),
            dsm.ncols(),
            dsm.nrows(),
            dsm.origin_x(),
            dsm.origin_y(),
            dsm.cellsize()
        )));
    }
    let (ncols, nrows) = (dsm.ncols(), dsm.nrows());
    let mut vertex_of = vec![u32::MAX; ncols * nrows];
    let mut vertices = Vec::new();
    let mut vertex_labels = Vec::new();
    for row in 0..nrows {
        for col in 0..ncols {
            if let Some(h) = dsm.get(col, row) {
                let (x, y) = dsm.cell_center(col, row);
                vertex_of[dsm.index(col, row)] = vertices.len() as u32;
                vertices.push(Vec3::new(x, y, h));
                vertex_labels.push(labels.label(col, row));
            }
        }
    }
    let mut triangles = Vec::new();
    for row in 0..nrows.saturating_sub(1) {
        for col in 0..ncols.saturating_sub(1) {
            let ll = vertex_of[dsm.index(col, row)];
            let lr = vertex_of[dsm.index(col + 1, row)];
            let ul = vertex_of[dsm.index(col, row + 1)];
            let ur = vertex_of[dsm.index(col + 1, row + 1)];
            if [ll, lr, ul, ur].contains(&u32::MAX) {
                continue;
            }
            triangles.push([ll, lr, ur]);
            triangles.push([ll, ur, ul]);
        }
    }
    let (mesh, _) = Mesh::new(vertices, triangles)?;
    LabeledMesh::new(mesh, vertex_labels)
}
