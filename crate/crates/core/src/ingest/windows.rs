use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// One window: camera position at its center, looking along its heading.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    pub id: String,
    pub position: Vec3,
    /// Degrees clockwise from north, in `[0, 360)`.
    pub heading_deg: f64,
}

impl WindowSpec {
    pub fn new(id: impl Into<String>, position: Vec3, heading_deg: f64) -> Result<Self> {
        let w = WindowSpec {
            id: id.into(),
            position,
            heading_deg,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::validation("window id is empty"));
        }
        if !self.position.is_finite() {
            return Err(Error::validation(format!(
                "window {}: non-finite position",
                self.id
            )));
        }
        if !(0.0..360.0).contains(&self.heading_deg) {
            return Err(Error::validation(format!(
                "window {}: heading {} outside [0, 360)",
                self.id, self.heading_deg
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct WindowRow {
    id: String,
    x: f64,
    y: f64,
    z: f64,
    heading_deg: f64,
}

/// Checks every window and rejects duplicate ids.
pub fn validate_windows(windows: &[WindowSpec]) -> Result<()> {
    let mut seen = HashSet::with_capacity(windows.len());
    for w in windows {
        w.validate()?;
        if !seen.insert(w.id.as_str()) {
            return Err(Error::validation(format!("duplicate window id {:?}", w.id)));
        }
    }
    Ok(())
}

pub fn parse_windows(reader: impl Read) -> Result<Vec<WindowSpec>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(format!("windows CSV: {e}")))?
        .clone();
    let expected = ["id", "x", "y", "z", "heading_deg"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::parse(format!(
            "windows CSV header must be {:?}, got {:?}",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut windows = Vec::new();
    for (line, row) in rdr.deserialize::<WindowRow>().enumerate() {
        let row = row.map_err(|e| Error::parse(format!("windows CSV row {}: {e}", line + 1)))?;
        windows.push(WindowSpec {
            id: row.id,
            position: Vec3::new(row.x, row.y, row.z),
            heading_deg: row.heading_deg,
        });
    }
    validate_windows(&windows)?;
    Ok(windows)
}

pub fn load_windows(path: impl AsRef<Path>) -> Result<Vec<WindowSpec>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_windows(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
}

pub fn encode_windows(windows: &[WindowSpec]) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for w in windows {
        wtr.serialize(WindowRow {
            id: w.id.clone(),
            x: w.position.x,
            y: w.position.y,
            z: w.position.z,
            heading_deg: w.heading_deg,
        })
        .map_err(|e| Error::validation(e.to_string()))?;
    }
    wtr.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn save_windows(path: impl AsRef<Path>, windows: &[WindowSpec]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_windows(windows)?).map_err(|e| Error::from(e).in_file(path))
}
