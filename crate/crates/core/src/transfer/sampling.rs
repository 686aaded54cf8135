use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{triangle_area, Vec3};
use crate::ingest::{LabeledPoint, LabeledPointCloud, Mesh};
use crate::transfer::LabeledMesh;

/// A surface sample and the triangle it lies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub position: Vec3,
    pub triangle: usize,
}

/// Area-uniform samples over the mesh surface.
///
/// Each triangle receives `floor(area * density)` points plus one more with
/// probability equal to the fractional part, so the expected count per
/// triangle is exactly `area * density`. Output is a pure function of the
/// inputs and `seed`.
pub fn sample_surface_indexed(mesh: &Mesh, density: f64, seed: u64) -> Result<Vec<SurfaceSample>> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::validation(format!(
            "sampling density must be > 0, got {density}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for t in 0..mesh.triangles().len() {
        let [a, b, c] = mesh.triangle(t);
        let expected = triangle_area(a, b, c) * density;
        let whole = expected.floor();
        let count = whole as usize + usize::from(rng.gen::<f64>() < expected - whole);
        samples.reserve(count);
        for _ in 0..count {
            let s = rng.gen::<f64>().sqrt();
            let r = rng.gen::<f64>();
            let position = a * (1.0 - s) + b * (s * (1.0 - r)) + c * (s * r);
            samples.push(SurfaceSample {
                position,
                triangle: t,
            });
        }
    }
    Ok(samples)
}

pub fn sample_surface(mesh: &Mesh, density: f64, seed: u64) -> Result<Vec<Vec3>> {
    Ok(sample_surface_indexed(mesh, density, seed)?
        .into_iter()
        .map(|s| s.position)
        .collect())
}

/// Samples a labeled mesh, each point inheriting the label of its triangle.
pub fn sample_labeled_surface(
    mesh: &LabeledMesh,
    density: f64,
    seed: u64,
) -> Result<LabeledPointCloud> {
    let points = sample_surface_indexed(mesh.mesh(), density, seed)?
        .into_iter()
        .map(|s| LabeledPoint {
            position: s.position,
            label: mesh.triangle_labels()[s.triangle],
        })
        .collect();
    LabeledPointCloud::new(points)
}
