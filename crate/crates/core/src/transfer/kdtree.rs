//! Exact nearest-neighbor search over 3D points.
//!
//! Ties in distance resolve to the lowest point index, so results match a
//! brute-force scan bit for bit.

use crate::geometry::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// Index and squared distance of a nearest point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub index: usize,
    pub distance_squared: f64,
}

impl Nearest {
    fn better_than(&self, other: &Nearest) -> bool {
        self.distance_squared < other.distance_squared
            || (self.distance_squared == other.distance_squared && self.index < other.index)
    }
}

impl KdTree {
    pub fn new(points: Vec<Vec3>) -> Self {
        let mut tree = KdTree {
            order: (0..points.len()).collect(),
            points,
            nodes: Vec::new(),
        };
        if !tree.points.is_empty() {
            tree.build(0, tree.points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let (lo, hi) = self.order[start..end].iter().fold(
            (
                Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
                -Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            ),
            |(lo, hi), &i| (lo.min(self.points[i]), hi.max(self.points[i])),
        );
        let spread = hi - lo;
        let axis = (0..3)
            .max_by(|&a, &b| spread.axis(a).total_cmp(&spread.axis(b)).then(b.cmp(&a)))
            .expect("three axes");
        if spread.axis(axis) == 0.0 {
            // All points coincide.
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a].axis(axis).total_cmp(&points[b].axis(axis))
        });
        let value = self.points[self.order[mid]].axis(axis);
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Exact nearest neighbor of `query`, or `None` for an empty tree.
    pub fn nearest(&self, query: Vec3) -> Option<Nearest> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = Nearest {
            index: usize::MAX,
            distance_squared: f64::INFINITY,
        };
        self.search(0, query, &mut best);
        Some(best)
    }

    fn search(&self, node: usize, q: Vec3, best: &mut Nearest) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = Nearest {
                        index: i,
                        distance_squared: self.points[i].distance_squared(q),
                    };
                    if cand.better_than(best) {
                        *best = cand;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q.axis(axis) - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, best);
                // Inclusive so equidistant points with lower indices are still found.
                if diff * diff <= best.distance_squared {
                    self.search(far, q, best);
                }
            }
        }
    }
}

/// Reference linear scan with the same tie rule as [`KdTree::nearest`].
pub fn nearest_brute_force(points: &[Vec3], query: Vec3) -> Option<Nearest> {
    points
        .iter()
        .enumerate()
        .map(|(index, p)| Nearest {
            index,
            distance_squared: p.distance_squared(query),
        })
        .reduce(|best, cand| if cand.better_than(&best) { cand } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_tree() {
        assert!(KdTree::new(vec![]).nearest(Vec3::ZERO).is_none());
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let pts = vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let tree = KdTree::new(pts);
        assert_eq!(tree.nearest(Vec3::ZERO).unwrap().index, 0);
    }

    #[test]
    fn duplicate_points_pick_first() {
        let mut pts = vec![Vec3::new(5.0, 5.0, 5.0); 40];
        pts.push(Vec3::ZERO);
        pts.push(Vec3::ZERO);
        let tree = KdTree::new(pts);
        assert_eq!(tree.nearest(Vec3::new(0.1, 0.0, 0.0)).unwrap().index, 40);
        assert_eq!(tree.nearest(Vec3::new(4.0, 5.0, 5.0)).unwrap().index, 0);
    }

    #[test]
    fn matches_brute_force_on_lattice_with_many_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Vec3> = (0..2000)
            .map(|_| {
                Vec3::new(
                    rng.gen_range(0..10) as f64,
                    rng.gen_range(0..10) as f64,
                    rng.gen_range(0..4) as f64,
                )
            })
            .collect();
        let tree = KdTree::new(pts.clone());
        for _ in 0..2000 {
            let q = Vec3::new(
                rng.gen_range(-2..12) as f64 * 0.5,
                rng.gen_range(-2..12) as f64 * 0.5,
                rng.gen_range(-1..5) as f64 * 0.5,
            );
            assert_eq!(tree.nearest(q), nearest_brute_force(&pts, q));
        }
    }

    proptest! {
        #[test]
        fn kd_tree_is_exact(
            pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0, -5.0f64..5.0), 1..300),
            qs in prop::collection::vec((-60.0f64..60.0, -60.0f64..60.0, -6.0f64..6.0), 1..20),
        ) {
            let pts: Vec<Vec3> = pts.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect();
            let tree = KdTree::new(pts.clone());
            for (x, y, z) in qs {
                let q = Vec3::new(x, y, z);
                prop_assert_eq!(tree.nearest(q), nearest_brute_force(&pts, q));
            }
        }
    }
}
