//! Deterministic scanline-free triangle rasterizer.
//!
//! Coverage is decided per pixel center with edge functions evaluated in a
//! canonical vertex order, so two triangles sharing an edge compute exactly
//! negated values along it. Together with the top-left rule this makes
//! shared edges watertight without overlap. Depth is the camera-space `z`
//! recovered by perspective-correct interpolation of `1/z`; among equal
//! depths the lower draw index wins whatever order triangles arrive in.

use crate::model::{Rgb8, SKY_COLOR};
use crate::render::camera::{CameraPoint, CameraPose};
use crate::render::image::ViewImage;
use crate::render::scene::{ColoredScene, PreparedScene};

/// Camera-space polygon produced by clipping one triangle; at most five
/// vertices after the near and far planes.
#[derive(Clone, Copy)]
struct ClipPolygon {
    points: [CameraPoint; 8],
    len: usize,
}

impl ClipPolygon {
    fn new() -> Self {
        ClipPolygon {
            points: [CameraPoint {
                x: 0.0,
                y: 0.0,
                z: 0.0,
            }; 8],
            len: 0,
        }
    }

    fn push(&mut self, p: CameraPoint) {
        self.points[self.len] = p;
        self.len += 1;
    }

    fn as_slice(&self) -> &[CameraPoint] {
        &self.points[..self.len]
    }
}

fn canonical_order(a: CameraPoint, b: CameraPoint) -> (CameraPoint, CameraPoint) {
    let key = |p: &CameraPoint| (p.z, p.x, p.y);
    let (ka, kb) = (key(&a), key(&b));
    let less =
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2));
    if less.is_le() {
        (a, b)
    } else {
        (b, a)
    }
}

/// Intersection of segment `ab` with the plane `z = plane`, computed from a
/// canonical endpoint order so both triangles on a shared edge agree.
fn intersect_z(a: CameraPoint, b: CameraPoint, plane: f64) -> CameraPoint {
    let (p, q) = canonical_order(a, b);
    let t = (plane - p.z) / (q.z - p.z);
    CameraPoint {
        x: p.x + (q.x - p.x) * t,
        y: p.y + (q.y - p.y) * t,
        z: plane,
    }
}

/// Sutherland-Hodgman against one z plane. `keep_above` keeps `z >= plane`,
/// otherwise `z <= plane`.
fn clip_z(input: &ClipPolygon, plane: f64, keep_above: bool) -> ClipPolygon {
    let inside = |p: &CameraPoint| {
        if keep_above {
            p.z >= plane
        } else {
            p.z <= plane
        }
    };
    let mut out = ClipPolygon::new();
    let pts = input.as_slice();
    for i in 0..pts.len() {
        let cur = pts[i];
        let next = pts[(i + 1) % pts.len()];
        let (in_cur, in_next) = (inside(&cur), inside(&next));
        if in_cur {
            out.push(cur);
        }
        if in_cur != in_next {
            out.push(intersect_z(cur, next, plane));
        }
    }
    out
}

#[derive(Clone, Copy)]
struct ScreenVertex {
    x: f64,
    y: f64,
    inv_z: f64,
}

/// Edge function for the directed edge `a -> b`, positive on its left in
/// y-down screen space once the triangle is positively oriented.
#[derive(Clone, Copy)]
struct Edge {
    lo_x: f64,
    lo_y: f64,
    dx: f64,
    dy: f64,
    sign: f64,
    owns_zero: bool,
}

impl Edge {
    fn new(a: ScreenVertex, b: ScreenVertex) -> Self {
        let a_first = a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).is_le();
        let (lo, hi, sign) = if a_first { (a, b, 1.0) } else { (b, a, -1.0) };
        let (dx, dy) = (hi.x - lo.x, hi.y - lo.y);
        // Directed edge vector and its interior-pointing normal (-dy, dx).
        let (ddx, ddy) = (sign * dx, sign * dy);
        let (nx, ny) = (-ddy, ddx);
        Edge {
            lo_x: lo.x,
            lo_y: lo.y,
            dx,
            dy,
            sign,
            // Top-left rule: pixels exactly on a left edge (interior to the
            // right) or a top edge (horizontal, interior below) belong to it.
            owns_zero: nx > 0.0 || (nx == 0.0 && ny > 0.0),
        }
    }

    #[inline]
    fn eval(&self, px: f64, py: f64) -> f64 {
        self.sign * (self.dx * (py - self.lo_y) - self.dy * (px - self.lo_x))
    }

    #[inline]
    fn covers(&self, value: f64) -> bool {
        value > 0.0 || (value == 0.0 && self.owns_zero)
    }
}

struct FrameBuffer {
    width: u32,
    height: u32,
    color: Vec<Rgb8>,
    depth: Vec<f64>,
    owner: Vec<usize>,
}

impl FrameBuffer {
    fn new(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        FrameBuffer {
            width,
            height,
            color: vec![SKY_COLOR; n],
            depth: vec![f64::INFINITY; n],
            owner: vec![usize::MAX; n],
        }
    }

    fn fill_triangle(&mut self, v: [ScreenVertex; 3], color: Rgb8, index: usize) {
        let [p0, mut p1, mut p2] = v;
        let orient = Edge::new(p1, p2).eval(p0.x, p0.y);
        if orient == 0.0 || !orient.is_finite() {
            return;
        }
        if orient < 0.0 {
            std::mem::swap(&mut p1, &mut p2);
        }
        let e0 = Edge::new(p1, p2);
        let e1 = Edge::new(p2, p0);
        let e2 = Edge::new(p0, p1);

        let min_x = p0.x.min(p1.x).min(p2.x);
        let max_x = p0.x.max(p1.x).max(p2.x);
        let min_y = p0.y.min(p1.y).min(p2.y);
        let max_y = p0.y.max(p1.y).max(p2.y);
        let col0 = (min_x - 0.5).ceil().max(0.0);
        let col1 = (max_x - 0.5).floor().min(self.width as f64 - 1.0);
        let row0 = (min_y - 0.5).ceil().max(0.0);
        let row1 = (max_y - 0.5).floor().min(self.height as f64 - 1.0);
        if col0 > col1 || row0 > row1 {
            return;
        }
        let (col0, col1, row0, row1) = (col0 as u32, col1 as u32, row0 as u32, row1 as u32);

        for row in row0..=row1 {
            let py = row as f64 + 0.5;
            let base = row as usize * self.width as usize;
            for col in col0..=col1 {
                let px = col as f64 + 0.5;
                let w0 = e0.eval(px, py);
                if !e0.covers(w0) {
                    continue;
                }
                let w1 = e1.eval(px, py);
                if !e1.covers(w1) {
                    continue;
                }
                let w2 = e2.eval(px, py);
                if !e2.covers(w2) {
                    continue;
                }
                let sum = w0 + w1 + w2;
                if sum <= 0.0 {
                    continue;
                }
                let inv_z = (w0 * p0.inv_z + w1 * p1.inv_z + w2 * p2.inv_z) / sum;
                let depth = 1.0 / inv_z;
                let i = base + col as usize;
                if depth < self.depth[i] || (depth == self.depth[i] && index < self.owner[i]) {
                    self.depth[i] = depth;
                    self.owner[i] = index;
                    self.color[i] = color;
                }
            }
        }
    }

    fn into_image(self) -> ViewImage {
        ViewImage::from_pixels(self.width, self.height, self.color).expect("framebuffer size")
    }
}

/// Renders one view. Prepares the scene on every call; batch callers should
/// prepare once and use [`render_prepared`].
pub fn render_view(scene: &ColoredScene, camera: &CameraPose) -> ViewImage {
    render_prepared(&PreparedScene::new(scene), camera)
}

pub fn render_prepared(scene: &PreparedScene, camera: &CameraPose) -> ViewImage {
    rasterize(scene, camera, scene.visible(camera).map(|(i, _)| i))
}

/// Draws the visible triangles in `order` (draw indices; culled or unknown
/// ones are skipped). Depth ties resolve by draw index, so any permutation
/// yields the same image as [`render_prepared`].
pub fn render_prepared_ordered(
    scene: &PreparedScene,
    camera: &CameraPose,
    order: &[usize],
) -> ViewImage {
    let tris = scene.triangles();
    let cutoff = scene.cutoff_m();
    rasterize(
        scene,
        camera,
        order
            .iter()
            .copied()
            .filter(|&i| i < tris.len() && !tris[i].culled(camera, cutoff)),
    )
}

fn rasterize(
    scene: &PreparedScene,
    camera: &CameraPose,
    order: impl Iterator<Item = usize>,
) -> ViewImage {
    let params = camera.params;
    let mut fb = FrameBuffer::new(params.width, params.height);
    let (near, far) = (params.near_m, params.far_m);

    for index in order {
        let tri = &scene.triangles()[index];
        let cam_pts = tri.vertices.map(|v| camera.to_camera(v));
        if cam_pts.iter().all(|p| p.z < near) || cam_pts.iter().all(|p| p.z > far) {
            continue;
        }
        let mut poly = ClipPolygon::new();
        for p in cam_pts {
            poly.push(p);
        }
        if cam_pts.iter().any(|p| p.z < near) {
            poly = clip_z(&poly, near, true);
        }
        if cam_pts.iter().any(|p| p.z > far) {
            poly = clip_z(&poly, far, false);
        }
        if poly.len < 3 {
            continue;
        }
        let mut screen = [ScreenVertex {
            x: 0.0,
            y: 0.0,
            inv_z: 0.0,
        }; 8];
        for (s, p) in screen.iter_mut().zip(poly.as_slice()) {
            let (x, y) = camera.project(*p);
            *s = ScreenVertex {
                x,
                y,
                inv_z: 1.0 / p.z,
            };
        }
        for k in 1..poly.len - 1 {
            fb.fill_triangle([screen[0], screen[k], screen[k + 1]], tri.color, index);
        }
    }
    fb.into_image()
}
