use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{heading_direction, Vec3};
use crate::ingest::WindowSpec;

/// Intrinsics and clip range shared by every window camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraParams {
    /// Vertical field of view in degrees. Pixels are square.
    pub fov_deg: f64,
    pub width: u32,
    pub height: u32,
    pub near_m: f64,
    pub far_m: f64,
}

impl Default for CameraParams {
    fn default() -> Self {
        CameraParams {
            fov_deg: 60.0,
            width: 900,
            height: 900,
            near_m: 0.1,
            far_m: 20_000.0,
        }
    }
}

impl CameraParams {
    pub fn with_size(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::validation(format!(
                "fov_deg must be in (0, 180), got {}",
                self.fov_deg
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::validation("image size must be positive"));
        }
        if !(self.near_m > 0.0 && self.near_m.is_finite()) {
            return Err(Error::validation(format!(
                "near_m must be > 0, got {}",
                self.near_m
            )));
        }
        if !(self.far_m > self.near_m && self.far_m.is_finite()) {
            return Err(Error::validation(format!(
                "far_m {} must exceed near_m {}",
                self.far_m, self.near_m
            )));
        }
        Ok(())
    }
}

/// A level camera at a window: pitch and roll are always zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub position: Vec3,
    pub heading_deg: f64,
    pub params: CameraParams,
    forward: Vec3,
    right: Vec3,
}

/// Point in camera space: `x` right, `y` up, `z` along the view direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CameraPose {
    pub fn new(position: Vec3, heading_deg: f64, params: CameraParams) -> Self {
        let forward = heading_direction(heading_deg);
        CameraPose {
            position,
            heading_deg,
            params,
            forward,
            right: forward.cross(Vec3::UP),
        }
    }

    pub fn pitch_deg(&self) -> f64 {
        0.0
    }

    pub fn roll_deg(&self) -> f64 {
        0.0
    }

    pub fn forward(&self) -> Vec3 {
        self.forward
    }

    pub fn right(&self) -> Vec3 {
        self.right
    }

    pub fn up(&self) -> Vec3 {
        Vec3::UP
    }

    /// Focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        0.5 * self.params.height as f64 / (0.5 * self.params.fov_deg.to_radians()).tan()
    }

    pub fn center_px(&self) -> (f64, f64) {
        (
            0.5 * self.params.width as f64,
            0.5 * self.params.height as f64,
        )
    }

    pub fn to_camera(&self, p: Vec3) -> CameraPoint {
        let d = p - self.position;
        CameraPoint {
            x: d.dot(self.right),
            y: d.z,
            z: d.dot(self.forward),
        }
    }

    /// Screen position (x right, y down, in pixels) of a camera-space point
    /// in front of the camera.
    pub fn project(&self, p: CameraPoint) -> (f64, f64) {
        let f = self.focal_px();
        let (cx, cy) = self.center_px();
        (cx + f * p.x / p.z, cy - f * p.y / p.z)
    }

    /// Camera-space direction through the center of pixel `(col, row)`,
    /// scaled so its `z` component is 1.
    pub fn pixel_ray(&self, col: u32, row: u32) -> CameraPoint {
        let f = self.focal_px();
        let (cx, cy) = self.center_px();
        CameraPoint {
            x: (col as f64 + 0.5 - cx) / f,
            y: -(row as f64 + 0.5 - cy) / f,
            z: 1.0,
        }
    }
}

/// Camera on the window center, level, facing the window heading.
pub fn place_camera(window: &WindowSpec, params: &CameraParams) -> CameraPose {
    CameraPose::new(window.position, window.heading_deg, *params)
}
