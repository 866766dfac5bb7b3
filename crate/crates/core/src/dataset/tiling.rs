use crate::error::{Error, Result};
use crate::model::{Annotation, BBox, CoordSpace, ImageRecord, Raster};

pub const DEFAULT_TILE_SIZE: usize = 640;
pub const DEFAULT_KEEP_FRACTION: f64 = 0.5;
pub const MIN_TILE_SIZE: usize = 32;

/// A grid cell cut from a parent image. Annotations are normalized to the
/// tile's own extent.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub parent: String,
    pub row: usize,
    pub col: usize,
    /// Top-left corner in parent pixels.
    pub origin: (usize, usize),
    pub raster: Raster,
    pub annotations: Vec<Annotation>,
}

impl Tile {
    pub fn width(&self) -> usize {
        self.raster.width()
    }

    pub fn height(&self) -> usize {
        self.raster.height()
    }

    /// `<parent>_r<row>_c<col>`
    pub fn stem(&self) -> String {
        format!("{}_r{}_c{}", self.parent, self.row, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct TilingOutcome {
    pub tiles: Vec<Tile>,
    pub rows: usize,
    pub cols: usize,
    /// Parent annotations that reached `keep_fraction` in no tile.
    pub damaged: usize,
}

/// Cuts `raster` into a non-overlapping grid anchored at the origin. Edge
/// tiles are truncated, never padded. An annotation goes to every tile that
/// holds at least `keep_fraction` of its area, clipped to that tile.
pub fn tile_image(
    record: &ImageRecord,
    raster: &Raster,
    tile_size: usize,
    keep_fraction: f64,
) -> Result<TilingOutcome> {
    tile_raster(&record.item_id(), raster, &record.annotations, tile_size, keep_fraction)
}

pub fn tile_raster(
    parent: &str,
    raster: &Raster,
    annotations: &[Annotation],
    tile_size: usize,
    keep_fraction: f64,
) -> Result<TilingOutcome> {
    if tile_size < MIN_TILE_SIZE {
        return Err(Error::InvalidArgument(format!("tile size {tile_size} is below the minimum of {MIN_TILE_SIZE}")));
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("keep fraction {keep_fraction} outside (0,1]")));
    }
    let (w, h) = (raster.width(), raster.height());
    let cols = w.div_ceil(tile_size);
    let rows = h.div_ceil(tile_size);

    let pixel_boxes: Vec<BBox> = annotations.iter().map(|a| a.bbox.to_pixel(w, h)).collect();
    let mut per_tile: Vec<Vec<Annotation>> = vec![Vec::new(); rows * cols];
    let mut damaged = 0;
    let ts = tile_size as f64;
    for (ann, pb) in annotations.iter().zip(&pixel_boxes) {
        let (x0, y0, x1, y1) = pb.corners();
        let area = pb.area();
        let c_lo = (x0.max(0.0) / ts).floor() as usize;
        let r_lo = (y0.max(0.0) / ts).floor() as usize;
        let c_hi = ((x1.min(w as f64) / ts).ceil() as usize).min(cols);
        let r_hi = ((y1.min(h as f64) / ts).ceil() as usize).min(rows);
        let mut kept = false;
        for r in r_lo..r_hi {
            for c in c_lo..c_hi {
                let tx0 = (c * tile_size) as f64;
                let ty0 = (r * tile_size) as f64;
                let tw = (tile_size.min(w - c * tile_size)) as f64;
                let th = (tile_size.min(h - r * tile_size)) as f64;
                let cell = BBox::from_corners(tx0, ty0, tx0 + tw, ty0 + th, CoordSpace::Pixel)?;
                let inter = pb.intersection_area(&cell);
                if inter <= 0.0 || inter / area < keep_fraction {
                    continue;
                }
                let local = BBox { cx: pb.cx - tx0, cy: pb.cy - ty0, ..*pb };
                let Some(clipped) = local.clip_to(tw, th) else { continue };
                let n = clipped.to_normalized(tw as usize, th as usize);
                per_tile[r * cols + c].push(ann.with_box(n));
                kept = true;
            }
        }
        if !kept {
            damaged += 1;
        }
    }

    let mut tiles = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let x0 = c * tile_size;
            let y0 = r * tile_size;
            let tw = tile_size.min(w - x0);
            let th = tile_size.min(h - y0);
            tiles.push(Tile {
                parent: parent.to_string(),
                row: r,
                col: c,
                origin: (x0, y0),
                raster: raster.crop(x0, y0, tw, th)?,
                annotations: std::mem::take(&mut per_tile[r * cols + c]),
            });
        }
    }
    Ok(TilingOutcome { tiles, rows, cols, damaged })
}
