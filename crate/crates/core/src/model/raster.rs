use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};

use crate::error::{Error, Result};

/// An 8-bit image, either single-channel (holographic) or RGB (optical).
///
/// Samples are stored row-major and interleaved by channel.
#[derive(Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for Raster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Raster")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!("dimensions must be positive, got {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidRaster(format!("channels must be 1 or 3, got {channels}")));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::InvalidRaster("dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::InvalidRaster(format!("expected {expected} samples, got {}", data.len())));
        }
        Ok(Raster { width, height, channels, data })
    }

    /// All-black raster.
    pub fn zeros(width: usize, height: usize, channels: usize) -> Result<Self> {
        let n = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::InvalidRaster("dimensions overflow".into()))?;
        Raster::new(width, height, channels, vec![0; n])
    }

    pub fn filled(width: usize, height: usize, pixel: &[u8]) -> Result<Self> {
        let channels = pixel.len();
        let mut r = Raster::zeros(width, height, channels)?;
        for px in r.data.chunks_exact_mut(channels) {
            px.copy_from_slice(pixel);
        }
        Ok(r)
    }

    /// Builds a raster by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut r = Raster::zeros(width, height, channels)?;
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                let i = (y * width + x) * channels;
                r.data[i..i + channels].copy_from_slice(&v[..channels]);
            }
        }
        Ok(r)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [u8] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, u8> {
        self.data.chunks_exact(self.width * self.channels)
    }

    /// Copies out the `w`×`h` region whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Raster> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::InvalidRaster(format!("crop {w}x{h}+{x0}+{y0} exceeds {}x{}", self.width, self.height)));
        }
        let row_len = w * self.channels;
        let mut data = Vec::with_capacity(row_len * h);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * self.channels;
            data.extend_from_slice(&self.data[start..start + row_len]);
        }
        Raster::new(w, h, self.channels, data)
    }

    /// Bilinear sample at continuous pixel coordinates, where integer
    /// coordinates address pixel centres. Coordinates are clamped to the
    /// image so callers decide the out-of-bounds policy.
    #[inline]
    pub fn sample_bilinear(&self, x: f64, y: f64, out: &mut [f64]) {
        let xc = x.clamp(0.0, (self.width - 1) as f64);
        let yc = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = xc.floor() as usize;
        let y0 = yc.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = xc - x0 as f64;
        let fy = yc - y0 as f64;
        let c = self.channels;
        let p00 = (y0 * self.width + x0) * c;
        let p10 = (y0 * self.width + x1) * c;
        let p01 = (y1 * self.width + x0) * c;
        let p11 = (y1 * self.width + x1) * c;
        for (k, o) in out.iter_mut().enumerate().take(c) {
            let top = self.data[p00 + k] as f64 * (1.0 - fx) + self.data[p10 + k] as f64 * fx;
            let bot = self.data[p01 + k] as f64 * (1.0 - fx) + self.data[p11 + k] as f64 * fx;
            *o = top * (1.0 - fy) + bot * fy;
        }
    }

    pub fn mean_intensity(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|&v| v as u64).sum::<u64>() as f64 / self.data.len() as f64
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Raster> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|source| Error::Image { path: path.to_path_buf(), source })?;
        Ok(Raster::from_dynamic(img))
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let w = self.width as u32;
        let h = self.height as u32;
        let res = if self.channels == 1 {
            GrayImage::from_raw(w, h, self.data.clone()).expect("raster invariant").save(path)
        } else {
            RgbImage::from_raw(w, h, self.data.clone()).expect("raster invariant").save(path)
        };
        res.map_err(|source| Error::Image { path: path.to_path_buf(), source })
    }

    fn from_dynamic(img: DynamicImage) -> Raster {
        let grey = matches!(
            img.color(),
            image::ColorType::L8 | image::ColorType::L16 | image::ColorType::La8 | image::ColorType::La16
        );
        if grey {
            let g = img.into_luma8();
            let (w, h) = g.dimensions();
            Raster::new(w as usize, h as usize, 1, g.into_raw()).expect("decoded image")
        } else {
            let rgb = img.into_rgb8();
            let (w, h) = rgb.dimensions();
            Raster::new(w as usize, h as usize, 3, rgb.into_raw()).expect("decoded image")
        }
    }
}
