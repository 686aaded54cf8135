use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{triangle_area2, Vec3};
use crate::ingest::ply::{
    parse_ply, write_ply, Element, PlyData, PlyFormat, PropertyDef, PropertyKind, Scalar,
    ScalarType, Value,
};
use crate::model::SemanticLabel;

/// Validated triangle mesh: finite vertices, in-range indices, no zero-area
/// triangles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
}

impl Mesh {
    /// Validates and builds a mesh, dropping zero-area triangles. Returns the
    /// mesh and the number of triangles dropped.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<(Mesh, usize)> {
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "vertex {i} has a non-finite coordinate"
            )));
        }
        let n = vertices.len();
        let mut kept = Vec::with_capacity(triangles.len());
        let mut dropped = 0;
        for (t, tri) in triangles.into_iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i as usize >= n) {
                return Err(Error::validation(format!(
                    "triangle {t} references vertex {bad} of {n}"
                )));
            }
            let [a, b, c] = tri.map(|i| vertices[i as usize]);
            if triangle_area2(a, b, c) > 0.0 {
                kept.push(tri);
            } else {
                dropped += 1;
            }
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} degenerate triangle(s)");
        }
        Ok((
            Mesh {
                vertices,
                triangles: kept,
            },
            dropped,
        ))
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Concatenates meshes, offsetting indices.
    pub fn merge(parts: &[Mesh]) -> Mesh {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in parts {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            triangles.extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
        }
        Mesh {
            vertices,
            triangles,
        }
    }

    /// Applies `f` to every vertex. Panics if `f` produces a degenerate
    /// triangle or a non-finite coordinate, which rigid motions never do.
    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> Mesh {
        let vertices: Vec<Vec3> = self.vertices.iter().map(|&v| f(v)).collect();
        assert!(vertices.iter().all(|v| v.is_finite()));
        Mesh {
            vertices,
            triangles: self.triangles.clone(),
        }
    }
}

/// A mesh as read from disk, with its optional per-vertex labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMesh {
    pub mesh: Mesh,
    pub labels: Option<Vec<SemanticLabel>>,
    pub dropped_degenerate: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub position: Vec3,
    pub label: SemanticLabel,
}

/// Point cloud where every point carries a geometry label (never sky).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointCloud {
    points: Vec<LabeledPoint>,
}

impl LabeledPointCloud {
    pub fn new(points: Vec<LabeledPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if let Some(i) = points.iter().position(|p| p.label == SemanticLabel::Sky) {
            return Err(Error::validation(format!(
                "sky label on geometry (point {i})"
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.position.is_finite()) {
            return Err(Error::validation(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        Ok(LabeledPointCloud { points })
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn vertex_positions(vertex: &Element) -> Result<Vec<Vec3>> {
    let mut axes = Vec::with_capacity(3);
    for axis in ["x", "y", "z"] {
        let col = vertex
            .scalars(axis)?
            .ok_or_else(|| Error::parse(format!("vertex element lacks property {axis:?}")))?;
        axes.push(col);
    }
    Ok((0..vertex.rows.len())
        .map(|i| {
            Vec3::new(
                axes[0][i].as_f64(),
                axes[1][i].as_f64(),
                axes[2][i].as_f64(),
            )
        })
        .collect())
}

fn vertex_labels(vertex: &Element) -> Result<Option<Vec<SemanticLabel>>> {
    let Some(idx) = vertex.property_index("label") else {
        return Ok(None);
    };
    if !matches!(vertex.properties[idx].kind, PropertyKind::Scalar(t) if t.is_integer()) {
        return Err(Error::parse("vertex property \"label\" must be an integer"));
    }
    let col = vertex.scalars("label")?.expect("label column");
    col.into_iter()
        .enumerate()
        .map(|(i, s)| {
            SemanticLabel::from_geometry_code(s.as_int()?)
                .map_err(|e| Error::validation(format!("vertex {i}: {e}")))
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn face_triangles(face: &Element) -> Result<Vec<[u32; 3]>> {
    let idx = face
        .property_index("vertex_indices")
        .or_else(|| face.property_index("vertex_index"))
        .ok_or_else(|| Error::parse("face element lacks vertex_indices"))?;
    let mut triangles = Vec::with_capacity(face.rows.len());
    for (f, row) in face.rows.iter().enumerate() {
        let Value::List(items) = &row[idx] else {
            return Err(Error::parse("vertex_indices must be a list property"));
        };
        if items.len() < 3 {
            return Err(Error::validation(format!(
                "face {f} has fewer than 3 vertices"
            )));
        }
        let ids = items
            .iter()
            .map(|s| {
                let i = s.as_int()?;
                u32::try_from(i)
                    .map_err(|_| Error::validation(format!("face {f} references vertex {i}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        // Polygons are fan-triangulated around their first vertex.
        for k in 1..ids.len() - 1 {
            triangles.push([ids[0], ids[k], ids[k + 1]]);
        }
    }
    Ok(triangles)
}

pub fn parse_mesh(bytes: &[u8]) -> Result<LoadedMesh> {
    let ply = parse_ply(bytes)?;
    let vertex = ply
        .element("vertex")
        .ok_or_else(|| Error::parse("missing vertex element"))?;
    let positions = vertex_positions(vertex)?;
    let labels = vertex_labels(vertex)?;
    let triangles = match ply.element("face") {
        Some(face) => face_triangles(face)?,
        None => Vec::new(),
    };
    let (mesh, dropped_degenerate) = Mesh::new(positions, triangles)?;
    Ok(LoadedMesh {
        mesh,
        labels,
        dropped_degenerate,
    })
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<LoadedMesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_mesh(&bytes).map_err(|e| e.in_file(path))
}

pub fn parse_point_cloud(bytes: &[u8]) -> Result<LabeledPointCloud> {
    let ply = parse_ply(bytes)?;
    let vertex = ply
        .element("vertex")
        .ok_or_else(|| Error::parse("missing vertex element"))?;
    let positions = vertex_positions(vertex)?;
    let labels = vertex_labels(vertex)?
        .ok_or_else(|| Error::parse("point cloud lacks vertex property \"label\""))?;
    LabeledPointCloud::new(
        positions
            .into_iter()
            .zip(labels)
            .map(|(position, label)| LabeledPoint { position, label })
            .collect(),
    )
    .map_err(|e| match e {
        Error::EmptyCloud => Error::validation("point cloud is empty"),
        other => other,
    })
}

pub fn load_point_cloud(path: impl AsRef<Path>) -> Result<LabeledPointCloud> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_point_cloud(&bytes).map_err(|e| e.in_file(path))
}

fn vertex_element(positions: &[Vec3], labels: Option<&[SemanticLabel]>) -> Element {
    let mut properties: Vec<PropertyDef> = ["x", "y", "z"]
        .iter()
        .map(|n| PropertyDef {
            name: n.to_string(),
            kind: PropertyKind::Scalar(ScalarType::F64),
        })
        .collect();
    if labels.is_some() {
        properties.push(PropertyDef {
            name: "label".into(),
            kind: PropertyKind::Scalar(ScalarType::U8),
        });
    }
    let rows = positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = vec![
                Value::Scalar(Scalar::Float(p.x)),
                Value::Scalar(Scalar::Float(p.y)),
                Value::Scalar(Scalar::Float(p.z)),
            ];
            if let Some(labels) = labels {
                row.push(Value::Scalar(Scalar::Int(labels[i].code() as i64)));
            }
            row
        })
        .collect();
    Element {
        name: "vertex".into(),
        properties,
        rows,
    }
}

/// Encodes a mesh, optionally with a per-vertex `label` property.
pub fn encode_mesh(
    mesh: &Mesh,
    labels: Option<&[SemanticLabel]>,
    format: PlyFormat,
) -> Result<Vec<u8>> {
    if let Some(labels) = labels {
        if labels.len() != mesh.vertices.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} vertices",
                labels.len(),
                mesh.vertices.len()
            )));
        }
    }
    let face = Element {
        name: "face".into(),
        properties: vec![PropertyDef {
            name: "vertex_indices".into(),
            kind: PropertyKind::List {
                count: ScalarType::U8,
                item: ScalarType::U32,
            },
        }],
        rows: mesh
            .triangles
            .iter()
            .map(|t| {
                vec![Value::List(
                    t.iter().map(|&i| Scalar::Int(i as i64)).collect(),
                )]
            })
            .collect(),
    };
    write_ply(&PlyData {
        format,
        elements: vec![vertex_element(&mesh.vertices, labels), face],
    })
}

pub fn save_mesh(
    path: impl AsRef<Path>,
    mesh: &Mesh,
    labels: Option<&[SemanticLabel]>,
    format: PlyFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_mesh(mesh, labels, format)?;
    std::fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))
}

pub fn encode_point_cloud(cloud: &LabeledPointCloud, format: PlyFormat) -> Result<Vec<u8>> {
    let positions: Vec<Vec3> = cloud.points.iter().map(|p| p.position).collect();
    let labels: Vec<SemanticLabel> = cloud.points.iter().map(|p| p.label).collect();
    write_ply(&PlyData {
        format,
        elements: vec![vertex_element(&positions, Some(&labels))],
    })
}

pub fn save_point_cloud(
    path: impl AsRef<Path>,
    cloud: &LabeledPointCloud,
    format: PlyFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_point_cloud(cloud, format)?;
    std::fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ply(vertices: &str, faces: &str, nv: usize, nf: usize, with_label: bool) -> String {
        let label = if with_label {
            "property int label\n"
        } else {
            ""
        };
        format!(
            "ply\nformat ascii 1.0\nelement vertex {nv}\nproperty float x\nproperty float y\nproperty float z\n{label}element face {nf}\nproperty list uchar int vertex_indices\nend_header\n{vertices}{faces}"
        )
    }

    #[test]
    fn minimal_labeled_triangle() {
        let text = ply("0 0 0 3\n1 0 0 3\n0 1 0 3\n", "3 0 1 2\n", 3, 1, true);
        let loaded = parse_mesh(text.as_bytes()).unwrap();
        assert_eq!(loaded.mesh.triangles(), &[[0, 1, 2]]);
        assert_eq!(loaded.labels.unwrap(), vec![SemanticLabel::Construction; 3]);
    }

    #[test]
    fn out_of_range_index() {
        let text = ply("0 0 0\n1 0 0\n0 1 0\n", "3 0 1 7\n", 3, 1, false);
        let err = parse_mesh(text.as_bytes()).unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains("vertex 7")),
            "{err}"
        );
    }

    #[test]
    fn sky_label_rejected() {
        let text = ply("0 0 0 2\n1 0 0 3\n0 1 0 3\n", "3 0 1 2\n", 3, 1, true);
        let err = parse_mesh(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("sky label on geometry")));
    }

    #[test]
    fn unknown_label_code_rejected() {
        let text = ply("0 0 0 9\n1 0 0 3\n0 1 0 3\n", "3 0 1 2\n", 3, 1, true);
        assert!(matches!(
            parse_mesh(text.as_bytes()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn degenerate_triangles_dropped_and_counted() {
        let text = ply(
            "0 0 0\n1 0 0\n0 1 0\n2 0 0\n",
            "3 0 1 2\n3 0 1 3\n3 0 0 2\n",
            4,
            3,
            false,
        );
        let loaded = parse_mesh(text.as_bytes()).unwrap();
        assert_eq!(loaded.mesh.triangles().len(), 1);
        assert_eq!(loaded.dropped_degenerate, 2);
    }

    #[test]
    fn quads_are_fan_triangulated() {
        let text = ply("0 0 0\n1 0 0\n1 1 0\n0 1 0\n", "4 0 1 2 3\n", 4, 1, false);
        let loaded = parse_mesh(text.as_bytes()).unwrap();
        assert_eq!(loaded.mesh.triangles(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn non_finite_vertex_rejected() {
        let text = ply("0 0 nan\n1 0 0\n0 1 0\n", "3 0 1 2\n", 3, 1, false);
        assert!(matches!(
            parse_mesh(text.as_bytes()),
            Err(Error::Validation(_))
        ));
    }

    fn cloud_ply(rows: &str, n: usize) -> String {
        format!(
            "ply\nformat ascii 1.0\nelement vertex {n}\nproperty double x\nproperty double y\nproperty double z\nproperty uchar label\nend_header\n{rows}"
        )
    }

    #[test]
    fn point_cloud_examples() {
        let cloud = parse_point_cloud(cloud_ply("0 0 0 0\n1 1 1 1\n", 2).as_bytes()).unwrap();
        let labels: Vec<_> = cloud.points().iter().map(|p| p.label).collect();
        assert_eq!(
            labels,
            vec![SemanticLabel::Greenery, SemanticLabel::Waterbody]
        );

        assert!(matches!(
            parse_point_cloud(cloud_ply("", 0).as_bytes()),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse_point_cloud(cloud_ply("0 0 0 5\n", 1).as_bytes()),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse_point_cloud(cloud_ply("0 0 0 2\n", 1).as_bytes()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn float_label_property_rejected() {
        let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nproperty float label\nend_header\n0 0 0 1.0\n";
        assert!(matches!(
            parse_point_cloud(text.as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn binary_f32_vertices_and_i16_labels() {
        let mut bytes = b"ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nproperty short label\nelement face 1\nproperty list uchar uint vertex_indices\nend_header\n".to_vec();
        for (p, l) in [([0f32, 0., 0.], 1i16), ([2., 0., 0.], 1), ([0., 2., 0.], 0)] {
            for c in p {
                bytes.extend_from_slice(&c.to_le_bytes());
            }
            bytes.extend_from_slice(&l.to_le_bytes());
        }
        bytes.push(3);
        for i in [0u32, 1, 2] {
            bytes.extend_from_slice(&i.to_le_bytes());
        }
        let loaded = parse_mesh(&bytes).unwrap();
        assert_eq!(loaded.mesh.vertices()[1], Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(
            loaded.labels.unwrap(),
            vec![
                SemanticLabel::Waterbody,
                SemanticLabel::Waterbody,
                SemanticLabel::Greenery
            ]
        );
    }
}
