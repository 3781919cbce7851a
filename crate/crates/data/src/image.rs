use crate::error::{DataError, Result};

/// 8-bit single-channel image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(DataError::Config(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// BT.601 luma, rounded half up: `(299 R + 587 G + 114 B + 500) / 1000`.
pub fn grayscale_pixel(r: u8, g: u8, b: u8) -> u8 {
    let v = (299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000;
    v.min(255) as u8
}

/// Converts a planar `3 x H x W` RGB buffer to `H x W` gray.
pub fn grayscale(rgb: &[u8], width: usize, height: usize) -> Result<GrayImage> {
    let plane = width * height;
    if rgb.len() != 3 * plane {
        return Err(DataError::Config(format!(
            "planar RGB {width}x{height} needs {} bytes, got {}",
            3 * plane,
            rgb.len()
        )));
    }
    let (r, rest) = rgb.split_at(plane);
    let (g, b) = rest.split_at(plane);
    let pixels = r.iter().zip(g).zip(b).map(|((&r, &g), &b)| grayscale_pixel(r, g, b)).collect();
    GrayImage::new(width, height, pixels)
}

/// Source coordinate and blend weight along one axis (half-pixel centres,
/// clamped to the border).
fn sample_axis(dst: usize, src_len: usize, dst_len: usize) -> (usize, usize, f64) {
    let scale = src_len as f64 / dst_len as f64;
    let s = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (src_len - 1) as f64);
    let lo = s.floor() as usize;
    let hi = (lo + 1).min(src_len - 1);
    (lo, hi, s - lo as f64)
}

/// Bilinear resize; output is rounded half up.
pub fn resize(image: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(DataError::Config(format!("resize target {width}x{height} has a zero dimension")));
    }
    if image.width == 0 || image.height == 0 {
        return Err(DataError::Config("cannot resize an empty image".into()));
    }
    if width == image.width && height == image.height {
        return Ok(image.clone());
    }
    let cols: Vec<_> = (0..width).map(|x| sample_axis(x, image.width, width)).collect();
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let (y0, y1, wy) = sample_axis(y, image.height, height);
        for &(x0, x1, wx) in &cols {
            let top = image.get(x0, y0) as f64 * (1.0 - wx) + image.get(x1, y0) as f64 * wx;
            let bottom = image.get(x0, y1) as f64 * (1.0 - wx) + image.get(x1, y1) as f64 * wx;
            let v = top * (1.0 - wy) + bottom * wy;
            pixels.push((v + 0.5).floor().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(width, height, pixels)
}
