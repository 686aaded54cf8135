//! Labels an unlabeled mesh from a labeled point cloud: every vertex takes
//! the label of its exact nearest cloud point, and every triangle takes the
//! majority label of its vertices.

pub mod kdtree;
pub mod sampling;

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::ingest::mesh::{encode_mesh, load_mesh};
use crate::ingest::{LabeledPointCloud, Mesh, PlyFormat};
use crate::model::SemanticLabel;

pub use kdtree::{nearest_brute_force, KdTree, Nearest};
pub use sampling::{sample_labeled_surface, sample_surface, sample_surface_indexed, SurfaceSample};

/// Default surface sampling density in points per square meter.
pub const DEFAULT_DENSITY: f64 = 100.0;

/// A mesh with one geometry label per vertex and a derived label per triangle.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledMesh {
    mesh: Mesh,
    vertex_labels: Vec<SemanticLabel>,
    triangle_labels: Vec<SemanticLabel>,
}

impl LabeledMesh {
    pub fn new(mesh: Mesh, vertex_labels: Vec<SemanticLabel>) -> Result<Self> {
        if vertex_labels.len() != mesh.vertices().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} vertices",
                vertex_labels.len(),
                mesh.vertices().len()
            )));
        }
        if let Some(i) = vertex_labels.iter().position(|&l| l == SemanticLabel::Sky) {
            return Err(Error::validation(format!(
                "sky label on geometry (vertex {i})"
            )));
        }
        let triangle_labels = derive_triangle_labels(&vertex_labels, mesh.triangles());
        Ok(LabeledMesh {
            mesh,
            vertex_labels,
            triangle_labels,
        })
    }

    /// Every vertex carries `label`.
    pub fn uniform(mesh: Mesh, label: SemanticLabel) -> Result<Self> {
        let n = mesh.vertices().len();
        LabeledMesh::new(mesh, vec![label; n])
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn vertex_labels(&self) -> &[SemanticLabel] {
        &self.vertex_labels
    }

    pub fn triangle_labels(&self) -> &[SemanticLabel] {
        &self.triangle_labels
    }

    pub fn triangle_count(&self) -> usize {
        self.triangle_labels.len()
    }

    pub fn merge(parts: &[LabeledMesh]) -> LabeledMesh {
        let meshes: Vec<Mesh> = parts.iter().map(|p| p.mesh.clone()).collect();
        LabeledMesh {
            mesh: Mesh::merge(&meshes),
            vertex_labels: parts
                .iter()
                .flat_map(|p| p.vertex_labels.iter().copied())
                .collect(),
            triangle_labels: parts
                .iter()
                .flat_map(|p| p.triangle_labels.iter().copied())
                .collect(),
        }
    }

    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> LabeledMesh {
        LabeledMesh {
            mesh: self.mesh.map_vertices(f),
            vertex_labels: self.vertex_labels.clone(),
            triangle_labels: self.triangle_labels.clone(),
        }
    }

    pub fn encode(&self, format: PlyFormat) -> Result<Vec<u8>> {
        encode_mesh(&self.mesh, Some(&self.vertex_labels), format)
    }

    /// Writes PLY with the `label` vertex property.
    pub fn save(&self, path: impl AsRef<Path>, format: PlyFormat) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.encode(format)?).map_err(|e| Error::from(e).in_file(path))
    }

    /// Reads a PLY mesh that must carry per-vertex labels.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let loaded = load_mesh(path)?;
        let labels = loaded.labels.ok_or_else(|| {
            Error::validation("mesh has no \"label\" vertex property").in_file(path)
        })?;
        LabeledMesh::new(loaded.mesh, labels).map_err(|e| e.in_file(path))
    }
}

fn priority(label: SemanticLabel) -> u8 {
    match label {
        SemanticLabel::Construction => 3,
        SemanticLabel::Greenery => 2,
        SemanticLabel::Waterbody => 1,
        SemanticLabel::Sky => 0,
    }
}

/// Majority of three labels; a three-way split resolves by
/// Construction > Greenery > Waterbody.
pub fn majority_label(labels: [SemanticLabel; 3]) -> SemanticLabel {
    let [a, b, c] = labels;
    if a == b || a == c {
        a
    } else if b == c {
        b
    } else {
        *labels
            .iter()
            .max_by_key(|&&l| priority(l))
            .expect("three labels")
    }
}

pub fn derive_triangle_labels(
    vertex_labels: &[SemanticLabel],
    triangles: &[[u32; 3]],
) -> Vec<SemanticLabel> {
    triangles
        .iter()
        .map(|t| majority_label(t.map(|i| vertex_labels[i as usize])))
        .collect()
}

/// How [`transfer_labels_with`] finds each vertex's nearest cloud point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NearestSearch {
    #[default]
    KdTree,
    BruteForce,
}

pub fn transfer_labels(mesh: &Mesh, cloud: &LabeledPointCloud) -> Result<LabeledMesh> {
    transfer_labels_with(mesh, cloud, NearestSearch::KdTree)
}

/// Assigns each vertex the label of its Euclidean-nearest cloud point,
/// breaking distance ties by lowest point index.
pub fn transfer_labels_with(
    mesh: &Mesh,
    cloud: &LabeledPointCloud,
    search: NearestSearch,
) -> Result<LabeledMesh> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let positions: Vec<Vec3> = cloud.points().iter().map(|p| p.position).collect();
    let nearest: Vec<usize> = match search {
        NearestSearch::KdTree => {
            let tree = KdTree::new(positions);
            mesh.vertices()
                .par_iter()
                .map(|&v| tree.nearest(v).expect("non-empty cloud").index)
                .collect()
        }
        NearestSearch::BruteForce => mesh
            .vertices()
            .par_iter()
            .map(|&v| {
                nearest_brute_force(&positions, v)
                    .expect("non-empty cloud")
                    .index
            })
            .collect(),
    };
    let labels = nearest
        .into_iter()
        .map(|i| cloud.points()[i].label)
        .collect();
    LabeledMesh::new(mesh.clone(), labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::LabeledPoint;
    use SemanticLabel::*;

    #[test]
    fn majority_rule_examples() {
        assert_eq!(majority_label([Greenery, Greenery, Construction]), Greenery);
        assert_eq!(
            majority_label([Greenery, Waterbody, Construction]),
            Construction
        );
        assert_eq!(majority_label([Waterbody, Waterbody, Waterbody]), Waterbody);
        assert_eq!(majority_label([Waterbody, Greenery, Waterbody]), Waterbody);
        assert_eq!(majority_label([Construction, Greenery, Greenery]), Greenery);
    }

    #[test]
    fn majority_rule_exhaustive() {
        for a in SemanticLabel::GEOMETRY {
            for b in SemanticLabel::GEOMETRY {
                for c in SemanticLabel::GEOMETRY {
                    let labels = [a, b, c];
                    let got = majority_label(labels);
                    let count = |l| labels.iter().filter(|&&x| x == l).count();
                    let max = SemanticLabel::GEOMETRY
                        .iter()
                        .map(|&l| count(l))
                        .max()
                        .unwrap();
                    if max >= 2 {
                        assert_eq!(count(got), max);
                    } else {
                        assert_eq!(got, Construction);
                    }
                }
            }
        }
    }

    fn square() -> Mesh {
        Mesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
        .0
    }

    #[test]
    fn single_point_labels_everything() {
        let cloud = LabeledPointCloud::new(vec![LabeledPoint {
            position: Vec3::new(100.0, 0.0, 0.0),
            label: Construction,
        }])
        .unwrap();
        let lm = transfer_labels(&square(), &cloud).unwrap();
        assert!(lm.vertex_labels().iter().all(|&l| l == Construction));
        assert!(lm.triangle_labels().iter().all(|&l| l == Construction));
    }

    #[test]
    fn equidistant_tie_goes_to_lowest_index() {
        let mesh = Mesh::new(
            vec![
                Vec3::ZERO,
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
        .0;
        let cloud = LabeledPointCloud::new(vec![
            LabeledPoint {
                position: Vec3::new(0.0, 0.0, 1.0),
                label: Greenery,
            },
            LabeledPoint {
                position: Vec3::new(0.0, 0.0, -1.0),
                label: Waterbody,
            },
        ])
        .unwrap();
        for search in [NearestSearch::KdTree, NearestSearch::BruteForce] {
            let lm = transfer_labels_with(&mesh, &cloud, search).unwrap();
            assert_eq!(lm.vertex_labels()[0], Greenery);
        }
    }

    #[test]
    fn sky_rejected_and_lengths_checked() {
        assert!(LabeledMesh::new(square(), vec![Sky, Greenery, Greenery, Greenery]).is_err());
        assert!(matches!(
            LabeledMesh::new(square(), vec![Greenery; 3]),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
