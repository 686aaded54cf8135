#![allow(dead_code)]

use winview::geometry::Vec3;
use winview::ingest::Mesh;
use winview::render::ViewImage;
use winview::transfer::LabeledMesh;
use winview::SemanticLabel;

/// Open-bottomed box sharing its eight corners.
pub fn block(min: Vec3, max: Vec3, first: u32) -> (Vec<Vec3>, Vec<[u32; 3]>) {
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

/// Two well-separated buildings, construction and greenery, 10 m apart.
pub fn two_box_scene() -> LabeledMesh {
    let (mut v, mut t) = block(Vec3::new(0.0, 0.0, 0.0), Vec3::new(10.0, 10.0, 30.0), 0);
    let (v2, t2) = block(Vec3::new(20.0, 0.0, 0.0), Vec3::new(30.0, 8.0, 6.0), 8);
    v.extend(v2);
    t.extend(t2);
    let mut labels = vec![SemanticLabel::Construction; 8];
    labels.extend([SemanticLabel::Greenery; 8]);
    let (mesh, _) = Mesh::new(v, t).unwrap();
    LabeledMesh::new(mesh, labels).unwrap()
}

/// True when pixel `i` borders a pixel of another color in `img`.
pub fn on_silhouette(img: &ViewImage, i: usize) -> bool {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let (c, r) = ((i as i64) % w, (i as i64) / w);
    let p = img.pixels()[i];
    for dr in -1..=1 {
        for dc in -1..=1 {
            let (cc, rr) = (c + dc, r + dr);
            if (0..w).contains(&cc)
                && (0..h).contains(&rr)
                && img.pixels()[(rr * w + cc) as usize] != p
            {
                return true;
            }
        }
    }
    false
}

/// Agreeing pixel count, and whether every disagreement sits on a
/// silhouette in either image.
pub fn compare_views(a: &ViewImage, b: &ViewImage) -> (usize, bool) {
    let mut same = 0;
    let mut confined = true;
    for i in 0..a.len() {
        if a.pixels()[i] == b.pixels()[i] {
            same += 1;
        } else if !on_silhouette(a, i) && !on_silhouette(b, i) {
            confined = false;
        }
    }
    (same, confined)
}
