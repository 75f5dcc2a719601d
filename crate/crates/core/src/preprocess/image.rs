use rand::Rng as _;

use crate::datagen::rng_from_seed;
use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape("image dimensions must be positive".into()));
        }
        if width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::Shape(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Intensities of the `size x size` window with top-left corner `(x, y)`,
    /// row-major.
    pub(crate) fn window(&self, x: usize, y: usize, size: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(size * size);
        for row in y..y + size {
            let start = row * self.width + x;
            out.extend(self.pixels[start..start + size].iter().map(|&p| f64::from(p)));
        }
        out
    }

    /// Decodes binary (`P5`) or ASCII (`P2`) PGM. Sample values are rescaled
    /// to `0..=255` when the declared maximum differs from 255.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let magic = next_token(bytes, &mut pos)?;
        let binary = match magic.as_slice() {
            b"P5" => true,
            b"P2" => false,
            _ => return Err(Error::Parse("not a P2/P5 PGM file".into())),
        };
        let width = parse_header_int(bytes, &mut pos, "width")?;
        let height = parse_header_int(bytes, &mut pos, "height")?;
        let maxval = parse_header_int(bytes, &mut pos, "maxval")?;
        if maxval == 0 || maxval > 65535 {
            return Err(Error::Parse(format!("invalid PGM maxval {maxval}")));
        }
        let count = width
            .checked_mul(height)
            .ok_or_else(|| Error::Parse("PGM dimensions overflow".into()))?;
        let scale = |v: usize| -> Result<u8> {
            if v > maxval {
                return Err(Error::Parse(format!("sample {v} exceeds maxval {maxval}")));
            }
            Ok(if maxval == 255 { v as u8 } else { ((v * 255 + maxval / 2) / maxval) as u8 })
        };
        let mut pixels = Vec::with_capacity(count);
        if binary {
            // exactly one whitespace byte separates the header from the raster
            pos += 1;
            let bytes_per = if maxval < 256 { 1 } else { 2 };
            let raster = bytes
                .get(pos..pos + count * bytes_per)
                .ok_or_else(|| Error::Parse("truncated PGM raster".into()))?;
            for chunk in raster.chunks_exact(bytes_per) {
                let v = if bytes_per == 1 {
                    usize::from(chunk[0])
                } else {
                    usize::from(chunk[0]) << 8 | usize::from(chunk[1])
                };
                pixels.push(scale(v)?);
            }
        } else {
            for _ in 0..count {
                let v = parse_header_int(bytes, &mut pos, "sample")?;
                pixels.push(scale(v)?);
            }
        }
        Self::new(width, height, pixels).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_pgm_binary(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn to_pgm_ascii(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.pixels.chunks_exact(self.width) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<Vec<u8>> {
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
        return Err(Error::Parse("unexpected end of PGM data".into()));
    }
    Ok(bytes[start..*pos].to_vec())
}

fn parse_header_int(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    std::str::from_utf8(&tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("invalid PGM {what}")))
}

/// Synthetic two-texture test image: both halves are i.i.d. uniform noise of
/// the same amplitude (81 grey levels), the left half over `24..=104` and the
/// right half over `152..=232`, so their window features form two clusters
/// of equal shape.
pub fn two_texture_image(width: usize, height: usize, seed: u64) -> Result<GrayImage> {
    let mut rng = rng_from_seed(seed);
    GrayImage::from_fn(width, height, |x, _| {
        let noise: u8 = rng.random_range(0..=80);
        if x < width / 2 {
            24 + noise
        } else {
            152 + noise
        }
    })
}
