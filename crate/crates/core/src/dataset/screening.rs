use log::info;

use super::tiling::Tile;
use crate::error::{Error, Result};
use crate::model::Raster;

/// Tiles at or above this fraction of pure-black pixels are excluded.
pub const DEFAULT_BLACK_THRESHOLD: f64 = 0.20;

/// Fraction of pixels whose every channel is exactly zero.
pub fn black_fraction(r: &Raster) -> f64 {
    let ch = r.channels();
    let black = r.data().chunks_exact(ch).filter(|px| px.iter().all(|&v| v == 0)).count();
    black as f64 / r.pixel_count() as f64
}

#[derive(Debug, Clone, Default)]
pub struct ScreenOutcome {
    pub kept: Vec<Tile>,
    pub excluded: Vec<Tile>,
}

/// Partitions tiles on `black_fraction >= threshold`.
pub fn screen_tiles(tiles: Vec<Tile>, threshold: f64) -> Result<ScreenOutcome> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("black threshold {threshold} outside (0,1]")));
    }
    let (excluded, kept): (Vec<_>, Vec<_>) = tiles.into_iter().partition(|t| black_fraction(&t.raster) >= threshold);
    info!("screening: kept {}, excluded {}", kept.len(), excluded.len());
    Ok(ScreenOutcome { kept, excluded })
}
