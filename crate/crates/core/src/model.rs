//! Semantic vocabulary shared by every stage: the four view classes, their
//! palette, and the per-window index record.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four view classes.
///
/// The declaration order is the total order used for serialization and
/// tie-breaking: `Greenery < Waterbody < Sky < Construction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SemanticLabel {
    Greenery,
    Waterbody,
    Sky,
    Construction,
}

impl SemanticLabel {
    pub const ALL: [SemanticLabel; 4] = [
        SemanticLabel::Greenery,
        SemanticLabel::Waterbody,
        SemanticLabel::Sky,
        SemanticLabel::Construction,
    ];

    /// Labels that may be carried by geometry. Sky is the empty background.
    pub const GEOMETRY: [SemanticLabel; 3] = [
        SemanticLabel::Greenery,
        SemanticLabel::Waterbody,
        SemanticLabel::Construction,
    ];

    /// Position in [`SemanticLabel::ALL`], also the integer file code.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: i64) -> Result<Self> {
        match code {
            0 => Ok(SemanticLabel::Greenery),
            1 => Ok(SemanticLabel::Waterbody),
            2 => Ok(SemanticLabel::Sky),
            3 => Ok(SemanticLabel::Construction),
            other => Err(Error::validation(format!("unknown label code {other}"))),
        }
    }

    /// Like [`SemanticLabel::from_code`] but rejects the sky code, which is
    /// reserved for the background.
    pub fn from_geometry_code(code: i64) -> Result<Self> {
        match Self::from_code(code)? {
            SemanticLabel::Sky => Err(Error::validation("sky label on geometry")),
            label => Ok(label),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticLabel::Greenery => "greenery",
            SemanticLabel::Waterbody => "waterbody",
            SemanticLabel::Sky => "sky",
            SemanticLabel::Construction => "construction",
        }
    }

    pub fn color(self) -> Rgb8 {
        label_to_color(self)
    }
}

impl fmt::Display for SemanticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Rgb8 {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb8 {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb8 { r, g, b }
    }
}

impl fmt::Display for Rgb8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RGB({}, {}, {})", self.r, self.g, self.b)
    }
}

pub const GREENERY_COLOR: Rgb8 = Rgb8::new(0, 255, 0);
pub const WATERBODY_COLOR: Rgb8 = Rgb8::new(0, 0, 255);
pub const SKY_COLOR: Rgb8 = Rgb8::new(255, 255, 255);
pub const CONSTRUCTION_COLOR: Rgb8 = Rgb8::new(255, 0, 0);

pub fn label_to_color(label: SemanticLabel) -> Rgb8 {
    match label {
        SemanticLabel::Greenery => GREENERY_COLOR,
        SemanticLabel::Waterbody => WATERBODY_COLOR,
        SemanticLabel::Sky => SKY_COLOR,
        SemanticLabel::Construction => CONSTRUCTION_COLOR,
    }
}

/// Exact inverse of [`label_to_color`]. Any other color means something
/// blended or interpolated a non-palette value into the image.
pub fn color_to_label(color: Rgb8) -> Result<SemanticLabel> {
    match (color.r, color.g, color.b) {
        (0, 255, 0) => Ok(SemanticLabel::Greenery),
        (0, 0, 255) => Ok(SemanticLabel::Waterbody),
        (255, 255, 255) => Ok(SemanticLabel::Sky),
        (255, 0, 0) => Ok(SemanticLabel::Construction),
        _ => Err(Error::UnknownColor(color)),
    }
}

/// The four window view indices of one window, indexed by
/// [`SemanticLabel::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WviRecord {
    pub window_id: String,
    pub wvi: [f64; 4],
}

impl WviRecord {
    pub fn new(window_id: impl Into<String>, wvi: [f64; 4]) -> Self {
        WviRecord {
            window_id: window_id.into(),
            wvi,
        }
    }

    pub fn get(&self, label: SemanticLabel) -> f64 {
        self.wvi[label.index()]
    }

    pub fn greenery(&self) -> f64 {
        self.get(SemanticLabel::Greenery)
    }

    pub fn waterbody(&self) -> f64 {
        self.get(SemanticLabel::Waterbody)
    }

    pub fn sky(&self) -> f64 {
        self.get(SemanticLabel::Sky)
    }

    pub fn construction(&self) -> f64 {
        self.get(SemanticLabel::Construction)
    }
}
