use crate::distant::DEFAULT_CUTOFF_M;
use crate::error::{Error, Result};
use crate::geometry::{centroid, Vec3};
use crate::model::{label_to_color, Rgb8, SemanticLabel};
use crate::render::camera::CameraPose;
use crate::transfer::LabeledMesh;

/// The four-color scene: a near-field city mesh and a far-field DSM layer
/// split at `cutoff_m` from each camera. Anything unoccupied is sky.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredScene {
    pub near_mesh: LabeledMesh,
    pub far_mesh: LabeledMesh,
    pub cutoff_m: f64,
}

impl Default for ColoredScene {
    fn default() -> Self {
        ColoredScene::empty()
    }
}

impl ColoredScene {
    pub fn new(near_mesh: LabeledMesh, far_mesh: LabeledMesh, cutoff_m: f64) -> Result<Self> {
        let scene = ColoredScene {
            near_mesh,
            far_mesh,
            cutoff_m,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn empty() -> Self {
        ColoredScene {
            near_mesh: LabeledMesh::default(),
            far_mesh: LabeledMesh::default(),
            cutoff_m: DEFAULT_CUTOFF_M,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff_m.is_nan() || self.cutoff_m <= 0.0 {
            return Err(Error::validation(format!(
                "cutoff_m must be > 0, got {}",
                self.cutoff_m
            )));
        }
        Ok(())
    }

    pub fn triangle_count(&self) -> usize {
        self.near_mesh.triangle_count() + self.far_mesh.triangle_count()
    }

    /// Rotates every vertex about the vertical axis through `pivot`; a camera
    /// at `pivot` with heading `h + degrees` then sees what heading `h` saw.
    pub fn rotated_about(&self, pivot: Vec3, degrees: f64) -> ColoredScene {
        let f = |v: Vec3| v.rotate_heading(pivot, degrees);
        ColoredScene {
            near_mesh: self.near_mesh.map_vertices(f),
            far_mesh: self.far_mesh.map_vertices(f),
            cutoff_m: self.cutoff_m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Near,
    Far,
}

/// Flattened triangle ready for drawing. Its position in
/// [`PreparedScene::triangles`] is its draw index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneTriangle {
    pub vertices: [Vec3; 3],
    pub centroid: Vec3,
    pub label: SemanticLabel,
    pub color: Rgb8,
    pub layer: Layer,
}

impl SceneTriangle {
    /// Layer culling by centroid distance: near-field triangles beyond the
    /// cutoff and far-field triangles inside it are dropped.
    pub fn culled(&self, camera: &CameraPose, cutoff_m: f64) -> bool {
        let d = self.centroid.distance(camera.position);
        match self.layer {
            Layer::Near => d > cutoff_m,
            Layer::Far => d < cutoff_m,
        }
    }
}

/// A scene flattened once and shared read-only by every window render.
#[derive(Debug, Clone)]
pub struct PreparedScene {
    triangles: Vec<SceneTriangle>,
    cutoff_m: f64,
}

impl PreparedScene {
    /// Near-field triangles come first, so they win exact depth ties.
    pub fn new(scene: &ColoredScene) -> Self {
        let mut triangles = Vec::with_capacity(scene.triangle_count());
        for (mesh, layer) in [
            (&scene.near_mesh, Layer::Near),
            (&scene.far_mesh, Layer::Far),
        ] {
            for (t, &label) in mesh.triangle_labels().iter().enumerate() {
                let [a, b, c] = mesh.mesh().triangle(t);
                triangles.push(SceneTriangle {
                    vertices: [a, b, c],
                    centroid: centroid(a, b, c),
                    label,
                    color: label_to_color(label),
                    layer,
                });
            }
        }
        PreparedScene {
            triangles,
            cutoff_m: scene.cutoff_m,
        }
    }

    pub fn triangles(&self) -> &[SceneTriangle] {
        &self.triangles
    }

    pub fn cutoff_m(&self) -> f64 {
        self.cutoff_m
    }

    /// Draw indices of triangles that survive layer culling for `camera`.
    pub fn visible(
        &self,
        camera: &CameraPose,
    ) -> impl Iterator<Item = (usize, &SceneTriangle)> + '_ {
        let camera = *camera;
        self.triangles
            .iter()
            .enumerate()
            .filter(move |(_, t)| !t.culled(&camera, self.cutoff_m))
    }
}
