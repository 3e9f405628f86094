//! Pixel renders of orbit classes and of the exceptional sets, and a
//! binary PPM reader/writer.

use crate::error::{Error, Result};
use crate::exceptional::ExceptionalSets;
use crate::expoly::ExpPoly;
use crate::orbit::{ClassifyParams, OrbitClass, OrbitClassifier, OrbitTag};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub center: Complex64,
    pub half_width: f64,
    pub half_height: f64,
    pub px_w: usize,
    pub px_h: usize,
}

impl Viewport {
    /// Square viewport `|Re z - c|, |Im z - c| <= half` with `px` pixels a side.
    pub fn square(center: Complex64, half: f64, px: usize) -> Self {
        Viewport { center, half_width: half, half_height: half, px_w: px, px_h: px }
    }

    pub fn validate(&self) -> Result<()> {
        if self.px_w == 0 || self.px_h == 0 {
            return Err(Error::InvalidParam("viewport needs at least one pixel".into()));
        }
        if !(self.half_width > 0.0 && self.half_height > 0.0) {
            return Err(Error::InvalidParam("viewport half extents must be positive".into()));
        }
        let world = self.half_width / self.half_height;
        let pixels = self.px_w as f64 / self.px_h as f64;
        if (world - pixels).abs() > 1e-9 * pixels {
            return Err(Error::InvalidParam(format!("aspect {world} of the viewport differs from pixel aspect {pixels}")));
        }
        Ok(())
    }

    /// Center of pixel `(i, j)`, row `j = 0` at the top. Offsets are odd
    /// multiples of half a pixel, so mirrored pixels map to exactly
    /// mirrored points.
    pub fn pixel_center(&self, i: usize, j: usize) -> Complex64 {
        let (w, h) = (self.px_w as f64, self.px_h as f64);
        let x = (2.0 * i as f64 + 1.0 - w) * self.half_width / w;
        let y = (h - 1.0 - 2.0 * j as f64) * self.half_height / h;
        Complex64::new(self.center.re + x, self.center.im + y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    pub px_w: usize,
    pub px_h: usize,
    /// RGB triples, row-major, top row first.
    pub data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(px_w: usize, px_h: usize) -> Self {
        ImageBuffer { px_w, px_h, data: vec![0; 3 * px_w * px_h] }
    }

    pub fn pixel(&self, i: usize, j: usize) -> [u8; 3] {
        let k = 3 * (j * self.px_w + i);
        [self.data[k], self.data[k + 1], self.data[k + 2]]
    }

    pub fn rotated_180(&self) -> ImageBuffer {
        let mut out = ImageBuffer::new(self.px_w, self.px_h);
        for j in 0..self.px_h {
            for i in 0..self.px_w {
                let p = self.pixel(self.px_w - 1 - i, self.px_h - 1 - j);
                let k = 3 * (j * self.px_w + i);
                out.data[k..k + 3].copy_from_slice(&p);
            }
        }
        out
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> ImageBuffer {
        let mut out = ImageBuffer::new(self.px_w, self.px_h);
        for j in 0..self.px_h {
            for i in 0..self.px_w {
                let p = self.pixel(self.px_w - 1 - i, j);
                let k = 3 * (j * self.px_w + i);
                out.data[k..k + 3].copy_from_slice(&p);
            }
        }
        out
    }

    /// Top-bottom mirror image.
    pub fn flipped(&self) -> ImageBuffer {
        let mut out = ImageBuffer::new(self.px_w, self.px_h);
        let row = 3 * self.px_w;
        for j in 0..self.px_h {
            let src = (self.px_h - 1 - j) * row;
            out.data[j * row..(j + 1) * row].copy_from_slice(&self.data[src..src + row]);
        }
        out
    }

    /// RGBA copy with opaque alpha.
    pub fn to_rgba(&self) -> Vec<u8> {
        self.data.chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub nonescape: [u8; 3],
    pub undetermined: [u8; 3],
    /// Escape after one step; later escapes fade toward `escape_late`.
    pub escape_early: [u8; 3],
    pub escape_late: [u8; 3],
    /// Step count at which the fade saturates.
    pub escape_bands: usize,
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            nonescape: [0, 0, 0],
            undetermined: [220, 30, 30],
            escape_early: [255, 255, 255],
            escape_late: [90, 110, 190],
            escape_bands: 12,
        }
    }
}

impl Palette {
    pub fn color(&self, c: &OrbitClass) -> [u8; 3] {
        match c.tag {
            OrbitTag::NonEscapeObserved => self.nonescape,
            OrbitTag::Undetermined => self.undetermined,
            OrbitTag::EscapeCertified => {
                let t = (c.steps.saturating_sub(1).min(self.escape_bands) as f64) / self.escape_bands.max(1) as f64;
                std::array::from_fn(|k| {
                    let (a, b) = (self.escape_early[k] as f64, self.escape_late[k] as f64);
                    (a + (b - a) * t).round() as u8
                })
            }
        }
    }
}

pub const E1_GREY: [u8; 3] = [96, 96, 96];
pub const E2_GREY: [u8; 3] = [192, 192, 192];
pub const WHITE: [u8; 3] = [255, 255, 255];

fn render_rows<F: Fn(Complex64) -> [u8; 3] + Sync>(v: &Viewport, color: F) -> ImageBuffer {
    let mut img = ImageBuffer::new(v.px_w, v.px_h);
    let row_len = 3 * v.px_w;
    let fill = |j: usize, row: &mut [u8]| {
        for i in 0..v.px_w {
            row[3 * i..3 * i + 3].copy_from_slice(&color(v.pixel_center(i, j)));
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        img.data.par_chunks_mut(row_len).enumerate().for_each(|(j, row)| fill(j, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        img.data.chunks_mut(row_len).enumerate().for_each(|(j, row)| fill(j, row));
    }
    img
}

/// Classifies every pixel center.
pub fn render_classification(f: &ExpPoly, v: &Viewport, p: ClassifyParams, palette: &Palette) -> Result<ImageBuffer> {
    v.validate()?;
    let classifier = OrbitClassifier::new(f, p)?;
    Ok(render_rows(v, |z| palette.color(&classifier.classify(z))))
}

/// Dark grey in `E_1`, light grey in `E_2` only, white elsewhere.
pub fn render_exceptional(f: &ExpPoly, v: &Viewport) -> Result<ImageBuffer> {
    v.validate()?;
    if f.degree() < 3 {
        return Err(Error::RequiresD3(f.degree()));
    }
    let sets = ExceptionalSets::new(f);
    Ok(render_rows(v, |z| {
        if sets.contains(z, 1) {
            E1_GREY
        } else if sets.contains(z, 2) {
            E2_GREY
        } else {
            WHITE
        }
    }))
}

pub fn encode_ppm(img: &ImageBuffer) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.px_w, img.px_h).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn write_ppm(img: &ImageBuffer, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode_ppm(img))?;
    Ok(())
}

/// Parses binary PPM with maxval 255; `#` comments are allowed in the header.
pub fn decode_ppm(bytes: &[u8]) -> Result<ImageBuffer> {
    let bad = |m: &str| Error::Io(format!("bad PPM: {m}"));
    let mut pos = 0;
    let mut fields = Vec::new();
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
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header"))?.to_string());
    }
    if fields[0] != "P6" {
        return Err(bad("magic"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("number"));
    let (w, h, max) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if max != 255 {
        return Err(bad("maxval"));
    }
    pos += 1;
    let data = bytes.get(pos..).ok_or_else(|| bad("payload"))?;
    if data.len() != 3 * w * h {
        return Err(bad("payload length"));
    }
    Ok(ImageBuffer { px_w: w, px_h: h, data: data.to_vec() })
}

pub fn read_ppm(path: &Path) -> Result<ImageBuffer> {
    decode_ppm(&std::fs::read(path)?)
}
