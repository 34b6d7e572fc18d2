use std::path::Path;

use super::{node, BicubicConvolution, Border, SampledSurface, MIN_NODES};
use crate::error::{Error, Result};

/// Single-channel image with intensities in [0, 1], stored row-major
/// (row 0 first).
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    intensities: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, intensities: Vec<f64>) -> Result<Self> {
        if width < MIN_NODES || height < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "image must be at least {MIN_NODES}x{MIN_NODES}, got {width}x{height}"
            )));
        }
        if intensities.len() != width * height {
            return Err(Error::InvalidGrid(format!(
                "{} intensities for a {width}x{height} image",
                intensities.len()
            )));
        }
        if let Some(v) = intensities.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::InvalidGrid(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self { width, height, intensities })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut v = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                v.push(f(col, row));
            }
        }
        Self::new(width, height, v)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.intensities[row * self.width + col]
    }
}

/// Read a plain (P2) or raw (P5) PGM file.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    parse_pgm(&std::fs::read(path)?)
}

/// Parse PGM bytes. Intensities are divided by the header's maxval.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos)?;
    let binary = match magic.as_str() {
        "P2" => false,
        "P5" => true,
        other => return Err(Error::Parse(format!("unsupported PGM magic {other:?}"))),
    };
    let width = parse_header_int(bytes, &mut pos, "width")?;
    let height = parse_header_int(bytes, &mut pos, "height")?;
    let maxval = parse_header_int(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("PGM maxval {maxval} outside 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Parse("PGM dimensions overflow".into()))?;
    let scale = maxval as f64;
    let mut raw = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the header from the raster.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::Parse("missing whitespace before PGM raster".into()));
        }
        pos += 1;
        let bpp = if maxval < 256 { 1 } else { 2 };
        let data = &bytes[pos..];
        if data.len() < count * bpp {
            return Err(Error::Parse(format!("PGM raster has {} bytes, need {}", data.len(), count * bpp)));
        }
        for p in 0..count {
            let v = if bpp == 1 {
                data[p] as usize
            } else {
                ((data[2 * p] as usize) << 8) | data[2 * p + 1] as usize
            };
            raw.push(v);
        }
    } else {
        for _ in 0..count {
            raw.push(parse_header_int(bytes, &mut pos, "pixel")?);
        }
    }
    let mut intensities = Vec::with_capacity(count);
    for v in raw {
        if v > maxval {
            return Err(Error::Parse(format!("PGM sample {v} exceeds maxval {maxval}")));
        }
        intensities.push(v as f64 / scale);
    }
    GrayImage::new(width, height, intensities)
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse("unexpected end of PGM data".into()));
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_header_int(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    tok.parse().map_err(|_| Error::Parse(format!("invalid PGM {what} {tok:?}")))
}

/// Write a plain (P2) PGM with the given maxval.
pub fn write_pgm(img: &GrayImage, maxval: u16, mut out: impl std::io::Write) -> Result<()> {
    writeln!(out, "P2\n{} {}\n{}", img.width, img.height, maxval)?;
    for row in img.intensities.chunks(img.width) {
        let line: Vec<String> = row
            .iter()
            .map(|v| ((v.clamp(0.0, 1.0) * maxval as f64).round() as u32).to_string())
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Lift an image to its graph surface `(x, y, I(x, y))` on a `k x k` grid.
///
/// Pixel centers sit on a uniform grid over [0, 1]^2 (first and last pixel
/// on the boundary, column index along x, row index along y) and `I` is
/// resampled by Keys cubic convolution with replicated borders.
pub fn lift_image(img: &GrayImage, k: usize) -> Result<SampledSurface> {
    let interp = BicubicConvolution::new(img.width, img.height, 1, img.intensities.clone(), Border::Replicate)?;
    let mut values = Vec::with_capacity(k * k);
    for j in 0..k.max(1) {
        for i in 0..k.max(1) {
            let (x, y) = (node(i, k), node(j, k));
            values.push([x, y, interp.value(x, y)[0]]);
        }
    }
    SampledSurface::new(k, values)
}
