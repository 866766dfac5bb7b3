use log::warn;

use crate::error::{Error, Result};
use crate::model::{ClassId, ImageRecord, Raster};

pub const DEFAULT_CROP_SIZE: usize = 112;

#[derive(Debug, Clone, PartialEq)]
pub struct Crop {
    pub annotation_index: usize,
    pub class_id: ClassId,
    pub raster: Raster,
}

impl Crop {
    /// `<parent>_a<index>_<class>`
    pub fn stem(&self, parent: &str, class_name: &str) -> String {
        format!("{parent}_a{}_{class_name}", self.annotation_index)
    }
}

#[derive(Debug, Clone, Default)]
pub struct CropOutcome {
    pub crops: Vec<Crop>,
    /// Annotation indices whose region was empty after clipping.
    pub skipped: Vec<usize>,
}

/// Cuts one square classification sample per annotation: the box region,
/// clipped to the image, resampled bilinearly to `out_size`×`out_size`.
pub fn extract_crops(record: &ImageRecord, raster: &Raster, out_size: usize) -> Result<CropOutcome> {
    if out_size == 0 {
        return Err(Error::InvalidArgument("crop size must be positive".into()));
    }
    if let Some(index) = record.annotations.iter().position(|a| a.class_id.is_none()) {
        return Err(Error::UnknownClass { index });
    }
    let (w, h) = (raster.width(), raster.height());
    let mut out = CropOutcome::default();
    for (i, a) in record.annotations.iter().enumerate() {
        let pb = a.bbox.to_pixel(w, h);
        let Some(region) = pb.clip_to(w as f64, h as f64) else {
            warn!("{}: annotation {i} lies outside the image, skipped", record.image_path.display());
            out.skipped.push(i);
            continue;
        };
        let (x0, y0, _, _) = region.corners();
        let sx = region.w / out_size as f64;
        let sy = region.h / out_size as f64;
        let ch = raster.channels();
        let mut data = Vec::with_capacity(out_size * out_size * ch);
        let mut buf = [0.0; 3];
        for j in 0..out_size {
            let y = y0 + (j as f64 + 0.5) * sy - 0.5;
            for i in 0..out_size {
                let x = x0 + (i as f64 + 0.5) * sx - 0.5;
                raster.sample_bilinear(x, y, &mut buf);
                data.extend(buf[..ch].iter().map(|v| v.round().clamp(0.0, 255.0) as u8));
            }
        }
        out.crops.push(Crop {
            annotation_index: i,
            class_id: a.class_id.expect("checked above"),
            raster: Raster::new(out_size, out_size, ch, data)?,
        });
    }
    Ok(out)
}
