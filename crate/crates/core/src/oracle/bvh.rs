//! Bounding volume hierarchy over camera-space triangles. Traversal only
//! skips boxes whose entry depth is strictly beyond the current best hit, so
//! the result is identical to a brute-force scan.

use crate::oracle::raycast::{Best, CamTriangle};
use crate::render::CameraPoint;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: [f64; 3],
    max: [f64; 3],
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        }
    }

    fn grow(&mut self, p: CameraPoint) {
        for (k, v) in [p.x, p.y, p.z].into_iter().enumerate() {
            self.min[k] = self.min[k].min(v);
            self.max[k] = self.max[k].max(v);
        }
    }

    fn union(&mut self, o: &Aabb) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(o.min[k]);
            self.max[k] = self.max[k].max(o.max[k]);
        }
    }

    /// Widens the box to cover hits accepted by the barycentric slack.
    fn padded(mut self) -> Self {
        for k in 0..3 {
            let pad = 1e-7 * (self.max[k] - self.min[k] + self.min[k].abs().max(self.max[k].abs()))
                + 1e-9;
            self.min[k] -= pad;
            self.max[k] += pad;
        }
        self
    }

    /// Entry parameter of the ray `t * dir` (origin at the camera), or
    /// `None` if it misses.
    fn entry(&self, dir: [f64; 3]) -> Option<f64> {
        let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
        for (k, &d) in dir.iter().enumerate() {
            if d == 0.0 {
                if self.min[k] > 0.0 || self.max[k] < 0.0 {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / d;
            let (a, b) = (self.min[k] * inv, self.max[k] * inv);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            t0 = t0.max(lo);
            t1 = t1.min(hi);
        }
        (t0 <= t1 && t1 >= 0.0).then_some(t0)
    }
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: range into `order`. Interior: `left` is the next node, `right` given.
    start: usize,
    count: usize,
    right: usize,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub(crate) fn new(triangles: &[CamTriangle]) -> Self {
        let boxes: Vec<Aabb> = triangles
            .iter()
            .map(|t| {
                let mut b = Aabb::empty();
                t.v.iter().for_each(|&p| b.grow(p));
                b.padded()
            })
            .collect();
        let centers: Vec<[f64; 3]> = boxes
            .iter()
            .map(|b| [0, 1, 2].map(|k| 0.5 * (b.min[k] + b.max[k])))
            .collect();
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: (0..triangles.len()).collect(),
        };
        if !triangles.is_empty() {
            bvh.build(&boxes, &centers, 0, triangles.len());
        }
        bvh
    }

    fn build(&mut self, boxes: &[Aabb], centers: &[[f64; 3]], start: usize, end: usize) -> usize {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &i in &self.order[start..end] {
            bounds.union(&boxes[i]);
            let c = centers[i];
            cbounds.grow(CameraPoint {
                x: c[0],
                y: c[1],
                z: c[2],
            });
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            bounds,
            start,
            count: end - start,
            right: 0,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let axis = (0..3)
            .max_by(|&a, &b| {
                (cbounds.max[a] - cbounds.min[a]).total_cmp(&(cbounds.max[b] - cbounds.min[b]))
            })
            .expect("axes");
        if cbounds.max[axis] - cbounds.min[axis] <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centers[a][axis]
                .total_cmp(&centers[b][axis])
                .then(a.cmp(&b))
        });
        self.nodes[id].count = 0;
        self.build(boxes, centers, start, mid);
        let right = self.build(boxes, centers, mid, end);
        self.nodes[id].right = right;
        id
    }

    /// Visits the nearer child first and drops any node whose entry lies
    /// beyond the best hit found so far.
    pub(crate) fn traverse(
        &self,
        dir: CameraPoint,
        best: &mut Best,
        test: &mut impl FnMut(usize, &mut Best),
    ) {
        let d = [dir.x, dir.y, dir.z];
        let Some(t_root) = self.nodes.first().and_then(|n| n.bounds.entry(d)) else {
            return;
        };
        let mut stack: Vec<(usize, f64)> = Vec::with_capacity(64);
        stack.push((0, t_root));
        while let Some((n, t_entry)) = stack.pop() {
            if t_entry > best.t {
                continue;
            }
            let node = &self.nodes[n];
            if node.count > 0 {
                for &slot in &self.order[node.start..node.start + node.count] {
                    test(slot, best);
                }
                continue;
            }
            let (l, r) = (n + 1, node.right);
            let tl = self.nodes[l].bounds.entry(d);
            let tr = self.nodes[r].bounds.entry(d);
            match (tl, tr) {
                (Some(a), Some(b)) if a <= b => {
                    stack.push((r, b));
                    stack.push((l, a));
                }
                (Some(a), Some(b)) => {
                    stack.push((l, a));
                    stack.push((r, b));
                }
                (Some(a), None) => stack.push((l, a)),
                (None, Some(b)) => stack.push((r, b)),
                (None, None) => {}
            }
        }
    }
}
