use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet};

/// 8-bit grayscale raster, row-major from the top row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub max_gray: u8,
    pub pixels: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmEncoding {
    /// `P2`
    Ascii,
    /// `P5`
    Binary,
}

/// Which side of the threshold is foreground.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Pixels below the threshold.
    Dark,
    /// Pixels at or above the threshold.
    Light,
}

impl GrayImage {
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        GrayImage {
            width,
            height,
            max_gray: 255,
            pixels: vec![value; width * height],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, v: u8) {
        self.pixels[row * self.width + col] = v;
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let magic = next_token(bytes, &mut pos).unwrap_or_default();
        let encoding = match magic.as_slice() {
            b"P2" => PgmEncoding::Ascii,
            b"P5" => PgmEncoding::Binary,
            _ => return Err(Error::Format("not a PGM image (expected P2 or P5)".into())),
        };
        let mut header = [0usize; 3];
        for (slot, name) in header
            .iter_mut()
            .zip(["width", "height", "maximum gray value"])
        {
            *slot = next_number(bytes, &mut pos)
                .ok_or_else(|| Error::Format(format!("PGM header: bad {name}")))?;
        }
        let [width, height, max_gray] = header;
        if max_gray == 0 || max_gray > 255 {
            return Err(Error::Format(format!(
                "only 8-bit PGM is supported, maximum gray value is {max_gray}"
            )));
        }
        let n = width * height;
        let pixels = match encoding {
            PgmEncoding::Ascii => (0..n)
                .map(|_| {
                    next_number(bytes, &mut pos)
                        .filter(|&v| v <= max_gray)
                        .map(|v| v as u8)
                        .ok_or_else(|| Error::Format("PGM: bad or missing pixel value".into()))
                })
                .collect::<Result<Vec<u8>>>()?,
            PgmEncoding::Binary => {
                // Exactly one whitespace byte separates the header from the raster.
                let start = pos + 1;
                let data = bytes
                    .get(start..start + n)
                    .ok_or_else(|| Error::Format("PGM: truncated raster".into()))?;
                data.to_vec()
            }
        };
        Ok(GrayImage {
            width,
            height,
            max_gray: max_gray as u8,
            pixels,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        GrayImage::parse(&bytes).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn encode(&self, encoding: PgmEncoding) -> Vec<u8> {
        let magic = match encoding {
            PgmEncoding::Ascii => "P2",
            PgmEncoding::Binary => "P5",
        };
        let mut out = format!(
            "{magic}\n{} {}\n{}\n",
            self.width, self.height, self.max_gray
        )
        .into_bytes();
        match encoding {
            PgmEncoding::Binary => out.extend_from_slice(&self.pixels),
            PgmEncoding::Ascii => {
                for row in self.pixels.chunks(self.width.max(1)) {
                    let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                    out.extend_from_slice(line.join(" ").as_bytes());
                    out.push(b'\n');
                }
            }
        }
        out
    }

    pub fn write(&self, path: &Path, encoding: PgmEncoding) -> Result<()> {
        fs::write(path, self.encode(encoding)).map_err(|e| Error::io(path, e))
    }
}

fn skip_space_and_comments(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        if bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        } else if bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Option<Vec<u8>> {
    skip_space_and_comments(bytes, pos);
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    (*pos > start).then(|| bytes[start..*pos].to_vec())
}

fn next_number(bytes: &[u8], pos: &mut usize) -> Option<usize> {
    std::str::from_utf8(&next_token(bytes, pos)?)
        .ok()?
        .parse()
        .ok()
}

/// Foreground pixels as points `(column, rows − 1 − row)`, so `y` points up.
pub fn binarize(image: &GrayImage, threshold: u8, polarity: Polarity) -> PointSet {
    let mut set = PointSet::with_capacity(crate::geometry::Dim::Two, image.pixels.len() / 8);
    for row in 0..image.height {
        for col in 0..image.width {
            let v = image.get(col, row);
            let fg = match polarity {
                Polarity::Dark => v < threshold,
                Polarity::Light => v >= threshold,
            };
            if fg {
                set.push_unchecked(Point::new2(col as f64, (image.height - 1 - row) as f64));
            }
        }
    }
    set
}

pub fn binarize_image(path: &Path, threshold: u8, polarity: Polarity) -> Result<Dataset> {
    let image = GrayImage::read(path)?;
    let points = binarize(&image, threshold, polarity);
    if points.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{}: no foreground pixels at threshold {threshold}",
            path.display()
        )));
    }
    Ok(Dataset {
        points,
        provenance: path.display().to_string(),
        ground_truth: Vec::new(),
    })
}
