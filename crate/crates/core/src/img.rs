//! Float image buffers and image file I/O.
//!
//! All processing happens on row-major `f64` buffers with values in [0, 1];
//! 8- and 16-bit sources are normalized on load so downstream scores do not
//! depend on source bit depth. PNG is the interchange format, ASCII PPM the
//! dependency-free one used by tests.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{CoreError, Result};

/// Row-major RGB image with channels in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct ImageRgb {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f64; 3]>,
}

impl ImageRgb {
    pub fn new(width: usize, height: usize) -> Self {
        ImageRgb {
            width,
            height,
            data: vec![[0.0; 3]; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, color: [f64; 3]) -> Self {
        ImageRgb {
            width,
            height,
            data: vec![color; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: [f64; 3]) {
        self.data[y * self.width + x] = px;
    }

    pub fn same_shape(&self, other: &ImageRgb) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Row-major single-channel image with values in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        GrayImage {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.values[y * self.width + x] = v;
    }
}

/// Separable Gaussian blur with kernel radius ceil(3*sigma) and replicate
/// borders. `sigma <= 0` returns the input unchanged.
pub fn gaussian_blur(img: &ImageRgb, sigma: f64) -> ImageRgb {
    if sigma <= 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    let mut sum = 0.0;
    for i in -radius..=radius {
        let w = (-(i as f64).powi(2) / (2.0 * sigma * sigma)).exp();
        kernel.push(w);
        sum += w;
    }
    for w in &mut kernel {
        *w /= sum;
    }

    let (w, h) = (img.width as i64, img.height as i64);
    let clamp = |v: i64, hi: i64| v.max(0).min(hi - 1);

    // Horizontal pass.
    let mut tmp = ImageRgb::new(img.width, img.height);
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (ki, kw) in kernel.iter().enumerate() {
                let sx = clamp(x + ki as i64 - radius, w);
                let px = img.get(sx as usize, y as usize);
                for c in 0..3 {
                    acc[c] += kw * px[c];
                }
            }
            tmp.set(x as usize, y as usize, acc);
        }
    }
    // Vertical pass.
    let mut out = ImageRgb::new(img.width, img.height);
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (ki, kw) in kernel.iter().enumerate() {
                let sy = clamp(y + ki as i64 - radius, h);
                let px = tmp.get(x as usize, sy as usize);
                for c in 0..3 {
                    acc[c] += kw * px[c];
                }
            }
            out.set(x as usize, y as usize, acc);
        }
    }
    out
}

#[inline]
fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes an 8-bit RGB PNG.
pub fn write_png(path: &Path, img: &ImageRgb) -> Result<()> {
    let mut buf = image::RgbImage::new(img.width as u32, img.height as u32);
    for y in 0..img.height {
        for x in 0..img.width {
            let px = img.get(x, y);
            buf.put_pixel(
                x as u32,
                y as u32,
                image::Rgb([to_u8(px[0]), to_u8(px[1]), to_u8(px[2])]),
            );
        }
    }
    buf.save(path)
        .map_err(|e| CoreError::io(path, std::io::Error::other(e)))
}

/// Reads an 8- or 16-bit PNG, normalizing to [0, 1].
pub fn read_png(path: &Path) -> Result<ImageRgb> {
    let dynimg = image::open(path).map_err(|e| CoreError::io(path, std::io::Error::other(e)))?;
    Ok(match dynimg {
        image::DynamicImage::ImageRgb16(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let mut img = ImageRgb::new(w, h);
            for (x, y, px) in buf.enumerate_pixels() {
                img.set(
                    x as usize,
                    y as usize,
                    [
                        px[0] as f64 / 65535.0,
                        px[1] as f64 / 65535.0,
                        px[2] as f64 / 65535.0,
                    ],
                );
            }
            img
        }
        other => {
            let buf = other.into_rgb8();
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            let mut img = ImageRgb::new(w, h);
            for (x, y, px) in buf.enumerate_pixels() {
                img.set(
                    x as usize,
                    y as usize,
                    [
                        px[0] as f64 / 255.0,
                        px[1] as f64 / 255.0,
                        px[2] as f64 / 255.0,
                    ],
                );
            }
            img
        }
    })
}

/// Writes an ASCII PPM (P3, 8-bit).
pub fn write_ppm(path: &Path, img: &ImageRgb) -> Result<()> {
    let file = File::create(path).map_err(|e| CoreError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(out, "P3")?;
        writeln!(out, "{} {}", img.width, img.height)?;
        writeln!(out, "255")?;
        for px in &img.data {
            writeln!(out, "{} {} {}", to_u8(px[0]), to_u8(px[1]), to_u8(px[2]))?;
        }
        Ok(())
    };
    emit().map_err(|e| CoreError::io(path, e))
}

/// Reads an ASCII PPM (P3).
pub fn read_ppm(path: &Path) -> Result<ImageRgb> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CoreError::io(path, e))?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace());
    let magic = tokens.next().unwrap_or("");
    if magic != "P3" {
        return Err(CoreError::Domain(format!(
            "{}: expected P3 PPM, got {magic:?}",
            path.display()
        )));
    }
    let mut next_num = |what: &str| -> Result<f64> {
        tokens
            .next()
            .ok_or_else(|| CoreError::Domain(format!("{}: truncated PPM ({what})", path.display())))?
            .parse::<f64>()
            .map_err(|e| CoreError::Domain(format!("{}: bad PPM {what}: {e}", path.display())))
    };
    let width = next_num("width")? as usize;
    let height = next_num("height")? as usize;
    let maxval = next_num("maxval")?;
    if width == 0 || height == 0 || maxval <= 0.0 {
        return Err(CoreError::Domain(format!(
            "{}: invalid PPM dimensions",
            path.display()
        )));
    }
    let mut img = ImageRgb::new(width, height);
    for i in 0..width * height {
        let r = next_num("pixel")? / maxval;
        let g = next_num("pixel")? / maxval;
        let b = next_num("pixel")? / maxval;
        img.data[i] = [r, g, b];
    }
    Ok(img)
}

/// Loads a PNG or PPM image based on its file extension.
pub fn read_image(path: &Path) -> Result<ImageRgb> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("ppm") => read_ppm(path),
        _ => read_png(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blur_zero_sigma_is_identity() {
        let mut img = ImageRgb::new(8, 8);
        for (i, px) in img.data.iter_mut().enumerate() {
            *px = [(i % 7) as f64 / 7.0; 3];
        }
        assert_eq!(gaussian_blur(&img, 0.0), img);
    }

    #[test]
    fn blur_preserves_constant_images() {
        let img = ImageRgb::filled(16, 16, [0.25, 0.5, 0.75]);
        let blurred = gaussian_blur(&img, 2.0);
        for px in &blurred.data {
            for c in 0..3 {
                assert!((px[c] - img.data[0][c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ppm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ppm");
        let mut img = ImageRgb::new(5, 3);
        for (i, px) in img.data.iter_mut().enumerate() {
            *px = [
                (i as f64 / 14.0 * 255.0).round() / 255.0,
                ((14 - i) as f64 / 14.0 * 255.0).round() / 255.0,
                0.0,
            ];
        }
        write_ppm(&path, &img).unwrap();
        let back = read_ppm(&path).unwrap();
        assert_eq!(back.width, 5);
        assert_eq!(back.height, 3);
        for (a, b) in img.data.iter().zip(&back.data) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1.0 / 255.0 / 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.png");
        let mut img = ImageRgb::new(4, 4);
        for (i, px) in img.data.iter_mut().enumerate() {
            *px = [(i as f64 / 15.0 * 255.0).round() / 255.0, 0.5, 1.0];
        }
        write_png(&path, &img).unwrap();
        let back = read_png(&path).unwrap();
        for (a, b) in img.data.iter().zip(&back.data) {
            assert!((a[0] - b[0]).abs() < 1e-9);
        }
    }
}
