//! Reference renderer: one ray per pixel center, nearest hit wins.
//!
//! Shares only the camera model and the layer-culling rule with the
//! rasterizer. Intersection is Möller–Trumbore on camera-space triangles.

use rayon::prelude::*;

use crate::model::{label_to_color, SemanticLabel, SKY_COLOR};
use crate::oracle::bvh::Bvh;
use crate::render::{CameraPoint, CameraPose, ColoredScene, PreparedScene, ViewImage};

/// Barycentric slack so rays through a shared edge hit at least one side.
const BARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    /// Draw index in the prepared scene (near-field first).
    pub triangle: usize,
    /// Distance from the camera along the ray, in meters.
    pub distance: f64,
    pub label: SemanticLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Acceleration {
    /// Test every visible triangle for every ray.
    BruteForce,
    #[default]
    Bvh,
}

/// Visible triangle in camera space.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CamTriangle {
    pub v: [CameraPoint; 3],
    pub draw_index: usize,
    pub label: SemanticLabel,
}

/// Ray parameter `t` of the hit, where the ray is `origin + t * dir` with
/// `dir.z == 1`, so `t` is camera depth.
#[inline]
pub(crate) fn intersect(dir: CameraPoint, tri: &CamTriangle) -> Option<f64> {
    let [a, b, c] = tri.v;
    let e1 = sub(b, a);
    let e2 = sub(c, a);
    let p = cross(dir, e2);
    let det = dot(e1, p);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    let s = CameraPoint {
        x: -a.x,
        y: -a.y,
        z: -a.z,
    };
    let u = dot(s, p) * inv;
    if !(-BARY_EPS..=1.0 + BARY_EPS).contains(&u) {
        return None;
    }
    let q = cross(s, e1);
    let v = dot(dir, q) * inv;
    if v < -BARY_EPS || u + v > 1.0 + BARY_EPS {
        return None;
    }
    Some(dot(e2, q) * inv)
}

#[inline]
fn sub(a: CameraPoint, b: CameraPoint) -> CameraPoint {
    CameraPoint {
        x: a.x - b.x,
        y: a.y - b.y,
        z: a.z - b.z,
    }
}

#[inline]
fn dot(a: CameraPoint, b: CameraPoint) -> f64 {
    a.x * b.x + a.y * b.y + a.z * b.z
}

#[inline]
fn cross(a: CameraPoint, b: CameraPoint) -> CameraPoint {
    CameraPoint {
        x: a.y * b.z - a.z * b.y,
        y: a.z * b.x - a.x * b.z,
        z: a.x * b.y - a.y * b.x,
    }
}

/// Nearest so far: smaller depth wins, then smaller draw index.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Best {
    pub t: f64,
    pub index: usize,
    pub slot: usize,
}

impl Best {
    pub fn none() -> Self {
        Best {
            t: f64::INFINITY,
            index: usize::MAX,
            slot: usize::MAX,
        }
    }

    #[inline]
    pub fn offer(&mut self, t: f64, index: usize, slot: usize) {
        if t < self.t || (t == self.t && index < self.index) {
            *self = Best { t, index, slot };
        }
    }
}

/// A scene culled and transformed for one camera, ready for ray queries.
pub struct RayScene {
    triangles: Vec<CamTriangle>,
    bvh: Option<Bvh>,
    near: f64,
    far: f64,
}

impl RayScene {
    pub fn new(scene: &PreparedScene, camera: &CameraPose, accel: Acceleration) -> Self {
        let triangles: Vec<CamTriangle> = scene
            .visible(camera)
            .map(|(draw_index, t)| CamTriangle {
                v: t.vertices.map(|v| camera.to_camera(v)),
                draw_index,
                label: t.label,
            })
            .collect();
        let bvh = match accel {
            Acceleration::BruteForce => None,
            Acceleration::Bvh => Some(Bvh::new(&triangles)),
        };
        RayScene {
            triangles,
            bvh,
            near: camera.params.near_m,
            far: camera.params.far_m,
        }
    }

    /// Nearest hit along camera-space `dir` (with `dir.z == 1`) inside the
    /// clip range.
    pub fn cast(&self, dir: CameraPoint) -> Option<RayHit> {
        let mut best = Best::none();
        let (near, far) = (self.near, self.far);
        let mut test = |slot: usize, best: &mut Best| {
            let tri = &self.triangles[slot];
            if let Some(t) = intersect(dir, tri) {
                if t >= near && t <= far {
                    best.offer(t, tri.draw_index, slot);
                }
            }
        };
        match &self.bvh {
            Some(bvh) => bvh.traverse(dir, &mut best, &mut test),
            None => {
                for slot in 0..self.triangles.len() {
                    test(slot, &mut best);
                }
            }
        }
        (best.slot != usize::MAX).then(|| {
            let tri = &self.triangles[best.slot];
            RayHit {
                triangle: tri.draw_index,
                distance: best.t * dot(dir, dir).sqrt(),
                label: tri.label,
            }
        })
    }
}

pub fn raycast_view(scene: &ColoredScene, camera: &CameraPose) -> ViewImage {
    raycast_prepared(&PreparedScene::new(scene), camera, Acceleration::Bvh)
}

pub fn raycast_view_with(
    scene: &ColoredScene,
    camera: &CameraPose,
    accel: Acceleration,
) -> ViewImage {
    raycast_prepared(&PreparedScene::new(scene), camera, accel)
}

pub fn raycast_prepared(
    scene: &PreparedScene,
    camera: &CameraPose,
    accel: Acceleration,
) -> ViewImage {
    let rays = RayScene::new(scene, camera, accel);
    let (w, h) = (camera.params.width, camera.params.height);
    let pixels = (0..h)
        .into_par_iter()
        .flat_map_iter(|row| {
            let rays = &rays;
            (0..w).map(move |col| match rays.cast(camera.pixel_ray(col, row)) {
                Some(hit) => label_to_color(hit.label),
                None => SKY_COLOR,
            })
        })
        .collect();
    ViewImage::from_pixels(w, h, pixels).expect("pixel count")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> CameraPoint {
        CameraPoint { x, y, z }
    }

    fn tri(v: [CameraPoint; 3]) -> CamTriangle {
        CamTriangle {
            v,
            draw_index: 0,
            label: SemanticLabel::Construction,
        }
    }

    #[test]
    fn hit_depth_is_camera_z() {
        let t = tri([p(-1.0, -1.0, 5.0), p(1.0, -1.0, 5.0), p(0.0, 1.0, 5.0)]);
        assert!((intersect(p(0.0, 0.0, 1.0), &t).unwrap() - 5.0).abs() < 1e-12);
        assert!((intersect(p(0.02, 0.02, 1.0), &t).unwrap() - 5.0).abs() < 1e-12);
        assert!(intersect(p(1.0, 1.0, 1.0), &t).is_none());
    }

    #[test]
    fn edge_on_triangle_misses() {
        let t = tri([p(0.0, -1.0, 2.0), p(0.0, 1.0, 2.0), p(0.0, 0.0, 4.0)]);
        assert!(intersect(p(0.0, 0.0, 1.0), &t).is_none());
    }

    #[test]
    fn ties_prefer_lower_index() {
        let mut b = Best::none();
        b.offer(3.0, 5, 0);
        b.offer(3.0, 2, 1);
        b.offer(3.0, 4, 2);
        assert_eq!((b.index, b.slot), (2, 1));
        b.offer(2.5, 9, 3);
        assert_eq!(b.index, 9);
    }
}
