//! Minimal 3D vector math in the scene frame (x = east, y = north, z = up, meters).

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const UP: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).length()
    }

    pub fn distance_squared(self, o: Vec3) -> f64 {
        let d = self - o;
        d.dot(d)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn axis(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    /// Rotates about the vertical axis through `pivot`, clockwise seen from
    /// above, so that a heading of `h` becomes `h + degrees`.
    pub fn rotate_heading(self, pivot: Vec3, degrees: f64) -> Vec3 {
        let (s, c) = degrees.to_radians().sin_cos();
        let d = self - pivot;
        Vec3::new(
            pivot.x + d.x * c + d.y * s,
            pivot.y - d.x * s + d.y * c,
            self.z,
        )
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Twice the area of triangle `abc`.
pub fn triangle_area2(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    (b - a).cross(c - a).length()
}

pub fn triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    0.5 * triangle_area2(a, b, c)
}

pub fn centroid(a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    Vec3::new(
        (a.x + b.x + c.x) / 3.0,
        (a.y + b.y + c.y) / 3.0,
        (a.z + b.z + c.z) / 3.0,
    )
}

/// Unit direction on the horizontal plane for a compass heading in degrees
/// clockwise from north (+y).
pub fn heading_direction(heading_deg: f64) -> Vec3 {
    let (s, c) = heading_deg.to_radians().sin_cos();
    Vec3::new(s, c, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotate_heading_moves_north_to_heading() {
        let north = Vec3::new(0.0, 10.0, 3.0);
        for h in [0.0, 45.0, 90.0, 225.0, 300.0] {
            let r = north.rotate_heading(Vec3::ZERO, h);
            let d = heading_direction(h) * 10.0;
            assert!((r.x - d.x).abs() < 1e-12 && (r.y - d.y).abs() < 1e-12);
            assert_eq!(r.z, 3.0);
        }
    }

    #[test]
    fn area_of_right_triangle() {
        let a = triangle_area(
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
        );
        assert_eq!(a, 1.0);
    }
}
