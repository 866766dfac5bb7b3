//! Point-based similarity registration and the warps built on it.
//!
//! Image coordinates are continuous with the origin at the top-left corner
//! of the top-left pixel; pixel `(i, j)` covers `[i, i+1) × [j, j+1)`.

use std::path::Path;

use log::warn;
use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, LineError, Result};
use crate::model::{BBox, CoordSpace, Raster, SimilarityTransform};

/// Default output budget for [`warp_image`]: 400 megapixels.
pub const DEFAULT_MAX_PIXELS: usize = 400_000_000;

/// Singular-value ratio below which a point configuration counts as collinear.
pub const DEGENERACY_RATIO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub src: [f64; 2],
    pub dst: [f64; 2],
}

impl PointPair {
    pub fn new(src: [f64; 2], dst: [f64; 2]) -> Self {
        PointPair { src, dst }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationReport {
    pub transform: SimilarityTransform,
    /// Root-mean-square mapping error, in destination pixels.
    pub rms_residual: f64,
    pub n_points: usize,
    /// Source points are (numerically) collinear; the rotation is then fixed
    /// by a single direction.
    pub degenerate: bool,
}

/// Least-squares similarity `(c, R, t)` minimizing `Σ‖c·R·srcᵢ + t − dstᵢ‖²`.
///
/// Works in six steps: centroids, demeaning, set norms, normalization of the
/// demeaned sets, rotation from the SVD of their cross-covariance (with the
/// determinant sign fixed so `R` is a proper rotation), then assembly of
/// scale, rotation and translation.
pub fn estimate_similarity(pairs: &[PointPair]) -> Result<RegistrationReport> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    for (i, p) in pairs.iter().enumerate() {
        if !p.src.iter().chain(&p.dst).all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!("point pair {i} is not finite")));
        }
    }

    let inv_n = 1.0 / n as f64;
    let src_centroid = pairs.iter().map(|p| Vector2::from(p.src)).sum::<Vector2<f64>>() * inv_n;
    let dst_centroid = pairs.iter().map(|p| Vector2::from(p.dst)).sum::<Vector2<f64>>() * inv_n;

    let src_demeaned: Vec<Vector2<f64>> = pairs.iter().map(|p| Vector2::from(p.src) - src_centroid).collect();
    let dst_demeaned: Vec<Vector2<f64>> = pairs.iter().map(|p| Vector2::from(p.dst) - dst_centroid).collect();

    let src_norm = src_demeaned.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
    let dst_norm = dst_demeaned.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
    let magnitude = src_centroid.norm().max(1.0);
    if src_norm <= 1e-12 * magnitude {
        return Err(Error::CoincidentPoints);
    }
    if dst_norm == 0.0 {
        // Everything lands on one point: the optimum collapses the source.
        return Err(Error::InvalidArgument("all destination points coincide".into()));
    }

    let mut cov = Matrix2::zeros();
    for (s, d) in src_demeaned.iter().zip(&dst_demeaned) {
        cov += (d / dst_norm) * (s / src_norm).transpose();
    }

    let svd = cov.svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    let sigma = svd.singular_values;
    let reflect = (u.determinant() * v_t.determinant()) < 0.0;
    // A reflection is undone on the weakest singular direction.
    let weak = if sigma[0] < sigma[1] { 0 } else { 1 };
    let mut sign = Vector2::new(1.0, 1.0);
    if reflect {
        sign[weak] = -1.0;
    }
    let rotation = u * Matrix2::from_diagonal(&sign) * v_t;
    let trace = sigma.component_mul(&sign).sum();
    let scale = trace * dst_norm / src_norm;
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::InvalidArgument("point sets admit no positive-scale similarity".into()));
    }
    let translation = dst_centroid - scale * rotation * src_centroid;

    let (s_max, s_min) = (sigma[0].max(sigma[1]), sigma[0].min(sigma[1]));
    let degenerate = s_min < DEGENERACY_RATIO * s_max;
    if degenerate {
        warn!("registration points are collinear; rotation is weakly constrained");
    }

    let transform = SimilarityTransform::new(
        scale,
        [[rotation[(0, 0)], rotation[(0, 1)]], [rotation[(1, 0)], rotation[(1, 1)]]],
        [translation.x, translation.y],
    )?;
    let rms_residual = residual_rms(&transform, pairs);
    Ok(RegistrationReport { transform, rms_residual, n_points: n, degenerate })
}

pub fn residual_rms(t: &SimilarityTransform, pairs: &[PointPair]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let sq: f64 = pairs
        .iter()
        .map(|p| {
            let q = t.apply(p.src);
            (q[0] - p.dst[0]).powi(2) + (q[1] - p.dst[1]).powi(2)
        })
        .sum();
    (sq / pairs.len() as f64).sqrt()
}

pub fn apply_to_point(t: &SimilarityTransform, p: [f64; 2]) -> [f64; 2] {
    t.apply(p)
}

pub fn invert(t: &SimilarityTransform) -> SimilarityTransform {
    t.invert()
}

/// Maps a pixel-space box through `t` and returns the axis-aligned hull of
/// its four transformed corners.
pub fn map_bbox(t: &SimilarityTransform, b: &BBox) -> Result<BBox> {
    if b.space != CoordSpace::Pixel {
        return Err(Error::InvalidBox("map_bbox expects a pixel-space box".into()));
    }
    let (x0, y0, x1, y1) = b.corners();
    let corners = [[x0, y0], [x1, y0], [x0, y1], [x1, y1]].map(|c| t.apply(c));
    let (mut lx, mut ly, mut hx, mut hy) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for [x, y] in corners {
        lx = lx.min(x);
        ly = ly.min(y);
        hx = hx.max(x);
        hy = hy.max(y);
    }
    BBox::from_corners(lx, ly, hx, hy, CoordSpace::Pixel)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Nearest,
    #[default]
    Bilinear,
}

/// Resamples `src` into an `out_width`×`out_height` frame: output pixel
/// centre `q` takes the value of `src` at `t⁻¹(q)`. Samples falling outside
/// `src` are exactly black.
pub fn warp_image(
    src: &Raster,
    t: &SimilarityTransform,
    out_width: usize,
    out_height: usize,
    interpolation: Interpolation,
) -> Result<Raster> {
    warp_image_budgeted(src, t, out_width, out_height, interpolation, DEFAULT_MAX_PIXELS)
}

pub fn warp_image_budgeted(
    src: &Raster,
    t: &SimilarityTransform,
    out_width: usize,
    out_height: usize,
    interpolation: Interpolation,
    max_pixels: usize,
) -> Result<Raster> {
    let budget_err = || Error::PixelBudget { width: out_width, height: out_height, budget: max_pixels };
    let pixels = out_width.checked_mul(out_height).ok_or_else(budget_err)?;
    if pixels > max_pixels {
        return Err(budget_err());
    }
    let mut out = Raster::zeros(out_width, out_height, src.channels())?;
    let inv = t.invert();
    let s = inv.scale();
    let [[a, b], [c, d]] = inv.rotation();
    // Per output step along x the source point moves by (dx_x, dx_y).
    let (dx_x, dx_y) = (s * a, s * c);
    let ch = src.channels();
    let (sw, sh) = (src.width() as f64, src.height() as f64);
    let row_len = out_width * ch;

    out.data_mut().par_chunks_exact_mut(row_len).enumerate().for_each(|(y, row)| {
        let yc = y as f64 + 0.5;
        let base_x = inv.translation()[0] + s * b * yc;
        let base_y = inv.translation()[1] + s * d * yc;
        let mut buf = [0.0f64; 3];
        for x in 0..out_width {
            let xc = x as f64 + 0.5;
            let px = base_x + dx_x * xc;
            let py = base_y + dx_y * xc;
            if !(px >= 0.0 && py >= 0.0 && px < sw && py < sh) {
                continue;
            }
            let dst = &mut row[x * ch..(x + 1) * ch];
            match interpolation {
                Interpolation::Nearest => {
                    dst.copy_from_slice(src.pixel(px as usize, py as usize));
                }
                Interpolation::Bilinear => {
                    src.sample_bilinear(px - 0.5, py - 0.5, &mut buf);
                    for k in 0..ch {
                        dst[k] = buf[k].round().clamp(0.0, 255.0) as u8;
                    }
                }
            }
        }
    });
    Ok(out)
}

#[derive(Debug, Deserialize, Serialize)]
struct PairRow {
    x_src: f64,
    y_src: f64,
    x_dst: f64,
    y_dst: f64,
}

/// Reads a `x_src,y_src,x_dst,y_dst` CSV file of point correspondences.
pub fn read_point_pairs(path: impl AsRef<Path>) -> Result<Vec<PointPair>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_point_pairs(&text).map_err(|e| match e {
        Error::MalformedLabels(lines) => Error::Parse {
            path: path.to_path_buf(),
            message: lines.iter().map(|l| format!("line {}: {}", l.line, l.message)).collect::<Vec<_>>().join("; "),
        },
        other => other,
    })
}

pub fn parse_point_pairs(text: &str) -> Result<Vec<PointPair>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["x_src", "y_src", "x_dst", "y_dst"] {
        return Err(Error::InvalidArgument(format!(
            "point file header must be x_src,y_src,x_dst,y_dst, found {:?}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut pairs = Vec::new();
    let mut errors = Vec::new();
    for row in reader.deserialize::<PairRow>() {
        match row {
            Ok(r) => pairs.push(PointPair::new([r.x_src, r.y_src], [r.x_dst, r.y_dst])),
            Err(e) => {
                errors.push(LineError { line: e.position().map_or(0, |p| p.line() as usize), message: e.to_string() })
            }
        }
    }
    if errors.is_empty() {
        Ok(pairs)
    } else {
        Err(Error::MalformedLabels(errors))
    }
}

pub fn write_point_pairs(path: impl AsRef<Path>, pairs: &[PointPair]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    for p in pairs {
        w.serialize(PairRow { x_src: p.src[0], y_src: p.src[1], x_dst: p.dst[0], y_dst: p.dst[1] })
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
