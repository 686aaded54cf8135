//! Labels an unlabeled two-building mesh from a dense labeled point cloud
//! and measures how many vertices got their label back.
//!
//! cargo run --release -p winview --example label_transfer -- [density]

use winview::geometry::Vec3;
use winview::ingest::Mesh;
use winview::transfer::{sample_labeled_surface, transfer_labels, LabeledMesh};
use winview::SemanticLabel;

fn block(min: Vec3, max: Vec3, first: u32) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let v = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { min.x } else { max.x },
                if i & 2 == 0 { min.y } else { max.y },
                if i & 4 == 0 { min.z } else { max.z },
            )
        })
        .collect();
    let faces = [
        [0, 1, 5, 4],
        [1, 3, 7, 5],
        [3, 2, 6, 7],
        [2, 0, 4, 6],
        [4, 5, 7, 6],
    ];
    let t = faces
        .iter()
        .flat_map(|f| [[f[0], f[1], f[2]], [f[0], f[2], f[3]]])
        .map(|t| t.map(|i| i + first))
        .collect();
    (v, t)
}

fn main() -> winview::Result<()> {
    let density: f64 = std::env::args()
        .nth(1)
        .map_or(100.0, |s| s.parse().expect("density"));
    let (mut v, mut t) = block(Vec3::new(0.0, 0.0, 0.0), Vec3::new(10.0, 10.0, 30.0), 0);
    let (v2, t2) = block(Vec3::new(20.0, 0.0, 0.0), Vec3::new(30.0, 8.0, 6.0), 8);
    v.extend(v2);
    t.extend(t2);
    let mut labels = vec![SemanticLabel::Construction; 8];
    labels.extend([SemanticLabel::Greenery; 8]);
    let (mesh, _) = Mesh::new(v, t)?;
    let truth = LabeledMesh::new(mesh.clone(), labels)?;

    let cloud = sample_labeled_surface(&truth, density, 42)?;
    println!("sampled {} labeled points at {density} pts/m2", cloud.len());
    let labeled = transfer_labels(&mesh, &cloud)?;
    let recovered = labeled
        .triangle_labels()
        .iter()
        .zip(truth.triangle_labels())
        .filter(|(a, b)| a == b)
        .count();
    println!(
        "recovered {recovered} of {} triangle labels",
        truth.triangle_count()
    );
    Ok(())
}
