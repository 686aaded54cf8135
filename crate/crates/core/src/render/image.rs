use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Rgb8, SKY_COLOR};

/// Row-major 8-bit RGB image, top row first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewImage {
    width: u32,
    height: u32,
    pixels: Vec<Rgb8>,
}

impl ViewImage {
    pub fn filled(width: u32, height: u32, color: Rgb8) -> Self {
        ViewImage {
            width,
            height,
            pixels: vec![color; width as usize * height as usize],
        }
    }

    pub fn sky(width: u32, height: u32) -> Self {
        Self::filled(width, height, SKY_COLOR)
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Rgb8>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize {
            return Err(Error::DimensionMismatch(format!(
                "{} pixels for {width}x{height}",
                pixels.len()
            )));
        }
        Ok(ViewImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb8] {
        &mut self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn get(&self, col: u32, row: u32) -> Rgb8 {
        self.pixels[row as usize * self.width as usize + col as usize]
    }

    pub fn set(&mut self, col: u32, row: u32, color: Rgb8) {
        self.pixels[row as usize * self.width as usize + col as usize] = color;
    }

    /// Binary PPM (P6) bytes.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + self.pixels.len() * 3);
        write!(out, "P6\n{} {}\n255\n", self.width, self.height).expect("write to Vec");
        for p in &self.pixels {
            out.extend_from_slice(&[p.r, p.g, p.b]);
        }
        out
    }

    pub fn from_ppm(bytes: &[u8]) -> Result<Self> {
        // Header: magic, width, height, maxval, each separated by whitespace,
        // with optional `#` comments, then exactly one whitespace byte.
        let mut pos = 0;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
                if bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                } else {
                    pos += 1;
                }
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::parse("truncated PPM header"));
            }
            fields.push(
                std::str::from_utf8(&bytes[start..pos])
                    .map_err(|_| Error::parse("bad PPM header"))?,
            );
        }
        if fields[0] != "P6" {
            return Err(Error::parse(format!(
                "unsupported PPM magic {:?}",
                fields[0]
            )));
        }
        let num = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| Error::parse(format!("bad PPM number {s:?}")))
        };
        let (width, height, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
        if maxval != 255 {
            return Err(Error::parse(format!("unsupported PPM maxval {maxval}")));
        }
        let body = bytes
            .get(pos + 1..)
            .ok_or_else(|| Error::parse("missing PPM body"))?;
        let n = width as usize * height as usize;
        if body.len() != n * 3 {
            return Err(Error::parse(format!(
                "PPM body has {} bytes, expected {}",
                body.len(),
                n * 3
            )));
        }
        let pixels = body
            .chunks_exact(3)
            .map(|c| Rgb8::new(c[0], c[1], c[2]))
            .collect();
        ViewImage::from_pixels(width, height, pixels)
    }
}

pub fn save_image(img: &ViewImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, img.to_ppm()).map_err(|e| Error::from(e).in_file(path))
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ViewImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    ViewImage::from_ppm(&bytes).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CONSTRUCTION_COLOR;

    #[test]
    fn one_red_pixel() {
        let img = ViewImage::filled(1, 1, CONSTRUCTION_COLOR);
        let bytes = img.to_ppm();
        assert_eq!(&bytes[..11], b"P6\n1 1\n255\n");
        assert_eq!(&bytes[11..], &[0xFF, 0x00, 0x00]);
    }

    #[test]
    fn default_size_header_is_15_bytes() {
        let bytes = ViewImage::sky(900, 900).to_ppm();
        assert_eq!(&bytes[..15], b"P6\n900 900\n255\n");
        assert_eq!(bytes.len(), 15 + 900 * 900 * 3);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = ViewImage::sky(3, 2);
        img.set(2, 1, CONSTRUCTION_COLOR);
        img.set(0, 0, Rgb8::new(10, 32, 13)); // whitespace-valued bytes right after the header
        let path = dir.path().join("v.ppm");
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("v.ppm");
        let err = save_image(&ViewImage::sky(1, 1), &path).unwrap_err();
        assert!(matches!(err.root(), Error::Io(_)));
    }

    #[test]
    fn header_comments_and_truncation() {
        let img = ViewImage::from_ppm(b"P6 # c\n1 # w\n1\n255\n\x00\xff\x00").unwrap();
        assert_eq!(img.get(0, 0), Rgb8::new(0, 255, 0));
        assert!(ViewImage::from_ppm(b"P6\n2 1\n255\n\x00\xff\x00").is_err());
        assert!(ViewImage::from_ppm(b"P3\n1 1\n255\n0 0 0").is_err());
    }
}
