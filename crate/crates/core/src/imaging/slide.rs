use std::path::Path;

use image::{GrayImage, ImageFormat};

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlideImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl SlideImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
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

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Paints the half-open rectangle `[x0, x1) × [y0, y1)`, clipped to the image.
    pub fn fill_rect(&mut self, x0: usize, y0: usize, x1: usize, y1: usize, value: u8) {
        for y in y0..y1.min(self.height) {
            for x in x0..x1.min(self.width) {
                self.set(x, y, value);
            }
        }
    }

    /// Reads any grayscale-convertible image the `image` crate can decode
    /// (plain/binary PGM, PNG).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let luma = image::load_from_memory(bytes)?.into_luma8();
        let (w, h) = luma.dimensions();
        Self::new(w as usize, h as usize, luma.into_raw())
    }

    /// Writes a binary (P5) portable graymap.
    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_raw(self.width as u32, self.height as u32, self.pixels.clone())
            .expect("dimensions checked at construction")
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.to_gray_image()
            .save_with_format(path, ImageFormat::Png)
            .map_err(Error::from)
    }
}

/// Inverts (`p → 255 − p`) and resizes to `target_w × target_h` by nearest-neighbor sampling.
pub fn preprocess(image: &SlideImage, target_w: usize, target_h: usize) -> Result<SlideImage> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::InvalidArgument(format!(
            "target size must be positive, got {target_w}x{target_h}"
        )));
    }
    let (sw, sh) = (image.width, image.height);
    let mut pixels = Vec::with_capacity(target_w * target_h);
    for y in 0..target_h {
        let sy = ((2 * y + 1) * sh / (2 * target_h)).min(sh - 1);
        for x in 0..target_w {
            let sx = ((2 * x + 1) * sw / (2 * target_w)).min(sw - 1);
            pixels.push(255 - image.get(sx, sy));
        }
    }
    SlideImage::new(target_w, target_h, pixels)
}
