use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Georeferenced grid of reals with a no-data sentinel.
///
/// Storage is row-major with row 0 the southernmost row, so `(col, row)`
/// grows east and north from the lower-left origin.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoRaster {
    ncols: usize,
    nrows: usize,
    origin_x: f64,
    origin_y: f64,
    cellsize: f64,
    nodata: f64,
    values: Vec<f64>,
}

impl GeoRaster {
    /// Builds a raster from south-first row-major values.
    pub fn new(
        ncols: usize,
        nrows: usize,
        origin_x: f64,
        origin_y: f64,
        cellsize: f64,
        nodata: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if ncols == 0 || nrows == 0 {
            return Err(Error::validation("raster dimensions must be positive"));
        }
        if !(cellsize > 0.0 && cellsize.is_finite()) {
            return Err(Error::validation(format!(
                "cellsize must be > 0, got {cellsize}"
            )));
        }
        if !origin_x.is_finite() || !origin_y.is_finite() {
            return Err(Error::validation("raster origin must be finite"));
        }
        if values.len() != ncols * nrows {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {ncols}x{nrows} grid",
                values.len()
            )));
        }
        Ok(GeoRaster {
            ncols,
            nrows,
            origin_x,
            origin_y,
            cellsize,
            nodata,
            values,
        })
    }

    /// Raster with the same geometry as `self` and new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        GeoRaster::new(
            self.ncols,
            self.nrows,
            self.origin_x,
            self.origin_y,
            self.cellsize,
            self.nodata,
            values,
        )
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn origin_x(&self) -> f64 {
        self.origin_x
    }

    pub fn origin_y(&self) -> f64 {
        self.origin_y
    }

    pub fn cellsize(&self) -> f64 {
        self.cellsize
    }

    pub fn nodata(&self) -> f64 {
        self.nodata
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn same_grid(&self, other: &GeoRaster) -> bool {
        self.ncols == other.ncols
            && self.nrows == other.nrows
            && self.origin_x == other.origin_x
            && self.origin_y == other.origin_y
            && self.cellsize == other.cellsize
    }

    pub fn index(&self, col: usize, row: usize) -> usize {
        assert!(
            col < self.ncols && row < self.nrows,
            "cell ({col}, {row}) out of range"
        );
        row * self.ncols + col
    }

    /// Raw cell value, including the sentinel.
    pub fn value(&self, col: usize, row: usize) -> f64 {
        self.values[self.index(col, row)]
    }

    pub fn is_nodata(&self, col: usize, row: usize) -> bool {
        let v = self.value(col, row);
        v == self.nodata || v.is_nan()
    }

    /// Cell value, or `None` for no-data.
    pub fn get(&self, col: usize, row: usize) -> Option<f64> {
        (!self.is_nodata(col, row)).then(|| self.value(col, row))
    }

    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin_x + (col as f64 + 0.5) * self.cellsize,
            self.origin_y + (row as f64 + 0.5) * self.cellsize,
        )
    }

    /// Cell whose half-open extent `[min, min + cellsize)` contains `(x, y)`.
    pub fn cell_containing(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fc = ((x - self.origin_x) / self.cellsize).floor();
        let fr = ((y - self.origin_y) / self.cellsize).floor();
        if fc < 0.0 || fr < 0.0 || fc >= self.ncols as f64 || fr >= self.nrows as f64 {
            return None;
        }
        Some((fc as usize, fr as usize))
    }
}

fn header_value<'a>(key: &str, tokens: &mut impl Iterator<Item = &'a str>) -> Result<&'a str> {
    tokens
        .next()
        .ok_or_else(|| Error::parse(format!("header key {key} has no value")))
}

/// Parses an ESRI ASCII grid. The first data row in the file is the
/// northernmost and becomes the last internal row.
pub fn parse_ascii_grid(text: &str) -> Result<GeoRaster> {
    const KEYS: [&str; 6] = [
        "ncols",
        "nrows",
        "xllcorner",
        "yllcorner",
        "cellsize",
        "nodata_value",
    ];
    let mut header: [Option<f64>; 6] = [None; 6];
    let mut tokens = text.split_ascii_whitespace().peekable();
    while let Some(tok) = tokens.peek() {
        let lower = tok.to_ascii_lowercase();
        let Some(k) = KEYS.iter().position(|&key| key == lower) else {
            break;
        };
        tokens.next();
        let raw = header_value(KEYS[k], &mut tokens)?;
        let v: f64 = raw
            .parse()
            .map_err(|_| Error::parse(format!("bad value {raw:?} for {}", KEYS[k])))?;
        if header[k].replace(v).is_some() {
            return Err(Error::parse(format!("duplicate header key {}", KEYS[k])));
        }
    }
    let get =
        |k: usize| header[k].ok_or_else(|| Error::parse(format!("missing header key {}", KEYS[k])));
    let dim = |k: usize| -> Result<usize> {
        let v = get(k)?;
        if v.fract() != 0.0 || v < 1.0 {
            return Err(Error::parse(format!(
                "{} must be a positive integer",
                KEYS[k]
            )));
        }
        Ok(v as usize)
    };
    let (ncols, nrows) = (dim(0)?, dim(1)?);
    let (xll, yll, cellsize, nodata) = (get(2)?, get(3)?, get(4)?, get(5)?);

    let file_values = tokens
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::parse(format!("bad grid value {t:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if file_values.len() != ncols * nrows {
        return Err(Error::parse(format!(
            "expected {} values for {ncols}x{nrows}, found {}",
            ncols * nrows,
            file_values.len()
        )));
    }
    let values = file_values.chunks(ncols).rev().flatten().copied().collect();
    GeoRaster::new(ncols, nrows, xll, yll, cellsize, nodata, values).map_err(|e| match e {
        Error::Validation(m) => Error::Parse(m),
        other => other,
    })
}

pub fn load_raster(path: impl AsRef<Path>) -> Result<GeoRaster> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_ascii_grid(&text).map_err(|e| e.in_file(path))
}

pub fn encode_ascii_grid(raster: &GeoRaster) -> String {
    let mut out = String::new();
    // Shortest round-trip float formatting keeps save/load bit-exact.
    let _ = writeln!(out, "ncols {}", raster.ncols);
    let _ = writeln!(out, "nrows {}", raster.nrows);
    let _ = writeln!(out, "xllcorner {}", raster.origin_x);
    let _ = writeln!(out, "yllcorner {}", raster.origin_y);
    let _ = writeln!(out, "cellsize {}", raster.cellsize);
    let _ = writeln!(out, "NODATA_value {}", raster.nodata);
    for row in raster.values.chunks(raster.ncols).rev() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn save_raster(path: impl AsRef<Path>, raster: &GeoRaster) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_ascii_grid(raster)).map_err(|e| Error::from(e).in_file(path))
}
