//! Seeded augmentation for detection and classification samples.
//!
//! Each `(seed, draw_index)` pair selects an independent ChaCha stream, so a
//! draw is reproducible regardless of which worker produces it or in which
//! order. Operations run in a fixed order: rotate, flip, translate, resized
//! crop, intensity jitter. The geometric stages are composed and resampled
//! once; a sample that leaves the frame at any stage is black.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Annotation, BBox, CoordSpace, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jitter {
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
    /// Fraction of a full hue turn.
    pub hue: f64,
}

impl Jitter {
    pub fn is_off(&self) -> bool {
        self.brightness == 0.0 && self.contrast == 0.0 && self.saturation == 0.0 && self.hue == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentationPolicy {
    /// Degrees; the angle is drawn uniformly in `±max_rotation`.
    pub max_rotation: f64,
    pub hflip_p: f64,
    pub vflip_p: f64,
    /// Fraction of each dimension.
    pub translate_max: f64,
    /// Range of the retained content fraction for the resized crop; `None`
    /// disables the crop.
    pub crop_keep_range: Option<(f64, f64)>,
    pub jitter: Jitter,
    pub mixup_p: f64,
    pub mixup_lambda_range: (f64, f64),
    pub seed: u64,
}

impl AugmentationPolicy {
    /// No-op policy.
    pub fn identity(seed: u64) -> Self {
        AugmentationPolicy {
            max_rotation: 0.0,
            hflip_p: 0.0,
            vflip_p: 0.0,
            translate_max: 0.0,
            crop_keep_range: None,
            jitter: Jitter::default(),
            mixup_p: 0.0,
            mixup_lambda_range: (0.3, 0.7),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("augmentation policy: {what}")));
        for (name, p) in [("hflip_p", self.hflip_p), ("vflip_p", self.vflip_p), ("mixup_p", self.mixup_p)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name}={p} outside [0,1]"));
            }
        }
        if !(self.max_rotation.is_finite() && self.max_rotation >= 0.0) {
            return bad("max_rotation must be a non-negative number of degrees");
        }
        if !(0.0..=1.0).contains(&self.translate_max) {
            return bad("translate_max outside [0,1]");
        }
        if let Some((lo, hi)) = self.crop_keep_range {
            if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
                return bad("crop_keep_range must satisfy 0 < lo <= hi <= 1");
            }
        }
        let j = self.jitter;
        for (name, v) in [("brightness", j.brightness), ("contrast", j.contrast), ("saturation", j.saturation)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(&format!("{name} jitter outside [0,1]"));
            }
        }
        if !(0.0..=0.5).contains(&j.hue) {
            return bad("hue jitter outside [0,0.5]");
        }
        let (lo, hi) = self.mixup_lambda_range;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return bad("mixup_lambda_range must satisfy 0 <= lo <= hi <= 1");
        }
        Ok(())
    }
}

/// Detection training suite: rotation up to 45°, vertical flip at 0.5,
/// mixup at 0.10.
pub fn detection_policy_default() -> AugmentationPolicy {
    AugmentationPolicy { max_rotation: 45.0, vflip_p: 0.5, mixup_p: 0.10, ..AugmentationPolicy::identity(0) }
}

/// Classification suite: rotation up to 40°, horizontal flip at 0.5,
/// translation up to 20%, resized crop keeping 80–100%, colour jitter.
pub fn classification_policy_default() -> AugmentationPolicy {
    AugmentationPolicy {
        max_rotation: 40.0,
        hflip_p: 0.5,
        translate_max: 0.20,
        crop_keep_range: Some((0.80, 1.00)),
        jitter: Jitter { brightness: 0.20, contrast: 0.20, saturation: 0.20, hue: 0.10 },
        ..AugmentationPolicy::identity(0)
    }
}

/// Concrete parameters of one draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentParams {
    /// Radians.
    pub rotation: f64,
    pub hflip: bool,
    pub vflip: bool,
    /// Fractions of width and height.
    pub translate: (f64, f64),
    /// Retained content fraction and the window origin as fractions of the
    /// free margin.
    pub crop: Option<(f64, f64, f64)>,
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
    pub hue_shift: f64,
    pub mixup_lambda: Option<f64>,
}

fn symmetric(rng: &mut ChaCha8Rng, half_width: f64) -> f64 {
    let u: f64 = rng.gen();
    if half_width == 0.0 {
        0.0
    } else {
        (2.0 * u - 1.0) * half_width
    }
}

/// Draws the parameters for `(policy.seed, draw_index)`. The same number of
/// variates is consumed whatever the policy, so enabling one operation never
/// shifts another's draws.
pub fn draw_params(policy: &AugmentationPolicy, draw_index: u64) -> AugmentParams {
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    rng.set_stream(draw_index);
    let rotation = symmetric(&mut rng, policy.max_rotation).to_radians();
    let hflip = rng.gen::<f64>() < policy.hflip_p;
    let vflip = rng.gen::<f64>() < policy.vflip_p;
    let translate = (symmetric(&mut rng, policy.translate_max), symmetric(&mut rng, policy.translate_max));
    let (uk, ux, uy): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let crop = policy.crop_keep_range.map(|(lo, hi)| (lo + (hi - lo) * uk, ux, uy));
    let j = policy.jitter;
    let brightness = 1.0 + symmetric(&mut rng, j.brightness);
    let contrast = 1.0 + symmetric(&mut rng, j.contrast);
    let saturation = 1.0 + symmetric(&mut rng, j.saturation);
    let hue_shift = symmetric(&mut rng, j.hue);
    let trigger = rng.gen::<f64>() < policy.mixup_p;
    let u: f64 = rng.gen();
    let (lo, hi) = policy.mixup_lambda_range;
    let mixup_lambda = trigger.then_some(lo + (hi - lo) * u);
    AugmentParams { rotation, hflip, vflip, translate, crop, brightness, contrast, saturation, hue_shift, mixup_lambda }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Affine {
    m: [[f64; 2]; 2],
    t: [f64; 2],
}

impl Affine {
    fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [self.m[0][0] * p[0] + self.m[0][1] * p[1] + self.t[0], self.m[1][0] * p[0] + self.m[1][1] * p[1] + self.t[1]]
    }

    fn inverse(&self) -> Affine {
        let [[a, b], [c, d]] = self.m;
        let det = a * d - b * c;
        let m = [[d / det, -b / det], [-c / det, a / det]];
        let t = [-(m[0][0] * self.t[0] + m[0][1] * self.t[1]), -(m[1][0] * self.t[0] + m[1][1] * self.t[1])];
        Affine { m, t }
    }
}

/// Forward geometric stages of a draw, in application order.
fn stages(p: &AugmentParams, w: f64, h: f64) -> Vec<Affine> {
    let mut out = Vec::new();
    if p.rotation != 0.0 {
        let (s, c) = p.rotation.sin_cos();
        let (cx, cy) = (w / 2.0, h / 2.0);
        out.push(Affine { m: [[c, -s], [s, c]], t: [cx - c * cx + s * cy, cy - s * cx - c * cy] });
    }
    if p.hflip || p.vflip {
        let (sx, tx) = if p.hflip { (-1.0, w) } else { (1.0, 0.0) };
        let (sy, ty) = if p.vflip { (-1.0, h) } else { (1.0, 0.0) };
        out.push(Affine { m: [[sx, 0.0], [0.0, sy]], t: [tx, ty] });
    }
    if p.translate != (0.0, 0.0) {
        out.push(Affine { m: [[1.0, 0.0], [0.0, 1.0]], t: [p.translate.0 * w, p.translate.1 * h] });
    }
    if let Some((keep, ux, uy)) = p.crop {
        let side = keep.sqrt();
        if side < 1.0 {
            let (ox, oy) = (ux * (1.0 - side) * w, uy * (1.0 - side) * h);
            let inv = 1.0 / side;
            out.push(Affine { m: [[inv, 0.0], [0.0, inv]], t: [-ox * inv, -oy * inv] });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Augmented {
    pub raster: Raster,
    pub annotations: Vec<Annotation>,
    /// Annotations that left the frame entirely.
    pub dropped: usize,
    pub params: AugmentParams,
}

/// Applies draw `draw_index` of `policy` to a raster and its normalized
/// annotations. Mixup is not applied here since it needs a partner image;
/// the drawn λ is reported in `params.mixup_lambda` for the caller.
pub fn augment(r: &Raster, anns: &[Annotation], policy: &AugmentationPolicy, draw_index: u64) -> Result<Augmented> {
    policy.validate()?;
    let params = draw_params(policy, draw_index);
    augment_with(r, anns, &params)
}

pub fn augment_with(r: &Raster, anns: &[Annotation], params: &AugmentParams) -> Result<Augmented> {
    if let Some(i) = anns.iter().position(|a| a.bbox.space != CoordSpace::Normalized) {
        return Err(Error::NotNormalized { index: i });
    }
    let (w, h) = (r.width() as f64, r.height() as f64);
    let fwd = stages(params, w, h);

    let mut raster = if fwd.is_empty() { r.clone() } else { resample(r, &fwd) };

    let mut annotations = Vec::with_capacity(anns.len());
    let mut dropped = 0;
    'ann: for a in anns {
        let mut b = a.bbox.to_pixel(r.width(), r.height());
        for st in &fwd {
            let (x0, y0, x1, y1) = b.corners();
            let pts = [[x0, y0], [x1, y0], [x0, y1], [x1, y1]].map(|p| st.apply(p));
            let lx = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hx = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            let ly = pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
            let hy = pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
            let hull = BBox::from_corners(lx, ly, hx, hy, CoordSpace::Pixel)?;
            match hull.clip_to(w, h) {
                Some(c) => b = c,
                None => {
                    dropped += 1;
                    continue 'ann;
                }
            }
        }
        annotations.push(a.with_box(b.to_normalized(r.width(), r.height())));
    }

    jitter(&mut raster, params);
    Ok(Augmented { raster, annotations, dropped, params: *params })
}

fn resample(src: &Raster, fwd: &[Affine]) -> Raster {
    let inverses: Vec<Affine> = fwd.iter().rev().map(Affine::inverse).collect();
    let (w, h, ch) = (src.width(), src.height(), src.channels());
    let (wf, hf) = (w as f64, h as f64);
    let inside = |p: [f64; 2]| p[0] >= 0.0 && p[1] >= 0.0 && p[0] < wf && p[1] < hf;
    let mut out = Raster::zeros(w, h, ch).expect("same shape as source");
    let mut buf = [0.0; 3];
    for y in 0..h {
        'px: for x in 0..w {
            let mut p = [x as f64 + 0.5, y as f64 + 0.5];
            for inv in &inverses {
                p = inv.apply(p);
                if !inside(p) {
                    continue 'px;
                }
            }
            src.sample_bilinear(p[0] - 0.5, p[1] - 0.5, &mut buf);
            for (o, v) in out.pixel_mut(x, y).iter_mut().zip(&buf) {
                *o = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    out
}

fn luma(px: &[f64]) -> f64 {
    0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]
}

fn jitter(r: &mut Raster, p: &AugmentParams) {
    let colour = r.channels() == 3;
    let grey_only = p.brightness == 1.0 && p.contrast == 1.0;
    if grey_only && (!colour || (p.saturation == 1.0 && p.hue_shift == 0.0)) {
        return;
    }
    let ch = r.channels();
    let mut vals: Vec<f64> = r.data().iter().map(|&v| v as f64).collect();
    for v in &mut vals {
        *v = (*v * p.brightness).clamp(0.0, 255.0);
    }
    if p.contrast != 1.0 {
        let mean = if colour {
            vals.chunks_exact(3).map(luma).sum::<f64>() / (vals.len() / 3) as f64
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        for v in &mut vals {
            *v = ((*v - mean) * p.contrast + mean).clamp(0.0, 255.0);
        }
    }
    if colour {
        for px in vals.chunks_exact_mut(ch) {
            if p.saturation != 1.0 {
                let g = luma(px);
                for v in px.iter_mut() {
                    *v = (g + (*v - g) * p.saturation).clamp(0.0, 255.0);
                }
            }
            if p.hue_shift != 0.0 {
                let (hh, s, v) = rgb_to_hsv(px[0] / 255.0, px[1] / 255.0, px[2] / 255.0);
                let (r2, g2, b2) = hsv_to_rgb((hh + p.hue_shift).rem_euclid(1.0), s, v);
                px.copy_from_slice(&[r2 * 255.0, g2 * 255.0, b2 * 255.0]);
            }
        }
    }
    for (o, v) in r.data_mut().iter_mut().zip(vals) {
        *o = v.round().clamp(0.0, 255.0) as u8;
    }
}

fn rgb_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        ((g - b) / d).rem_euclid(6.0) / 6.0
    } else if max == g {
        ((b - r) / d + 2.0) / 6.0
    } else {
        ((r - g) / d + 4.0) / 6.0
    };
    let s = if max == 0.0 { 0.0 } else { d / max };
    (h, s, max)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let h6 = h * 6.0;
    let i = h6.floor();
    let f = h6 - i;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match i as i64 % 6 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    }
}

/// Pixel-wise blend `round(λ·a + (1−λ)·b)`.
pub fn mixup(a: &Raster, b: &Raster, lambda: f64) -> Result<Raster> {
    if (a.width(), a.height(), a.channels()) != (b.width(), b.height(), b.channels()) {
        return Err(Error::DimensionMismatch(format!(
            "mixup of {}x{}x{} with {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("mixup lambda {lambda} outside [0,1]")));
    }
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (lambda * x as f64 + (1.0 - lambda) * y as f64).round().clamp(0.0, 255.0) as u8)
        .collect();
    Raster::new(a.width(), a.height(), a.channels(), data)
}
