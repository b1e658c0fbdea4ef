//! Reading and writing 8-bit grayscale PGM images (binary `P5` and ASCII
//! `P2`), the input/output format of the image demonstration. Only what that
//! demonstration needs: maxval up to 255 (smaller maxvals are rescaled to
//! the full 8-bit range), `#` comments in the header, atomic writes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        let expected = width
            .checked_mul(height)
            .filter(|_| width > 0 && height > 0)
            .ok_or_else(|| {
                Error::MalformedImage(format!("bad dimensions {width}x{height}"))
            })?;
        if pixels.len() != expected {
            return Err(Error::MalformedImage(format!(
                "{width}x{height} needs {expected} pixels, got {}",
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major, top-left origin.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Pulls the next header token, skipping whitespace and `#` comments.
fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
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
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::MalformedImage("truncated header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn parse_number(token: &[u8]) -> Result<usize> {
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            Error::MalformedImage(format!(
                "expected a number, found {:?}",
                String::from_utf8_lossy(token)
            ))
        })
}

/// Parses P5 (binary) or P2 (ASCII) data with maxval <= 255. When maxval is
/// below 255, samples are rescaled to the full 8-bit range with rounding.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => {
            return Err(Error::MalformedImage(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = parse_number(next_token(bytes, &mut pos)?)?;
    let height = parse_number(next_token(bytes, &mut pos)?)?;
    let maxval = parse_number(next_token(bytes, &mut pos)?)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::MalformedImage(format!(
            "maxval {maxval} outside the supported 1..=255"
        )));
    }
    let count = width
        .checked_mul(height)
        .filter(|_| width > 0 && height > 0)
        .ok_or_else(|| Error::MalformedImage(format!("bad dimensions {width}x{height}")))?;

    let raw: Vec<usize> = if binary {
        // exactly one whitespace byte separates the header from the raster
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::MalformedImage("missing raster separator".into()));
        }
        pos += 1;
        let raster = &bytes[pos..];
        if raster.len() < count {
            return Err(Error::MalformedImage(format!(
                "raster holds {} bytes, needs {count}",
                raster.len()
            )));
        }
        raster[..count].iter().map(|&b| b as usize).collect()
    } else {
        let mut vals = Vec::with_capacity(count);
        for _ in 0..count {
            vals.push(parse_number(next_token(bytes, &mut pos)?)?);
        }
        vals
    };

    let pixels = raw
        .into_iter()
        .map(|v| {
            if v > maxval {
                return Err(Error::MalformedImage(format!(
                    "sample {v} exceeds maxval {maxval}"
                )));
            }
            // rescale to [0, 255]; identity when maxval == 255
            Ok(((v * 255 + maxval / 2) / maxval) as u8)
        })
        .collect::<Result<_>>()?;
    GrayImage::new(width, height, pixels)
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    parse_pgm(&fs::read(path)?)
}

/// Serializes as binary P5, maxval 255.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

/// Writes via a sibling temp file and rename, so a crash mid-write never
/// leaves a truncated image at the destination.
pub fn write_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParams(format!("not a writable path: {}", path.display())))?;
    let tmp = path.with_file_name(format!("{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, encode_pgm(img))?;
    fs::rename(&tmp, path)?;
    Ok(())
}
