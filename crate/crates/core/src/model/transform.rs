use std::path::Path;

use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-9;

/// Plane similarity `p ↦ scale · rotation · p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    scale: f64,
    rotation: [[f64; 2]; 2],
    translation: [f64; 2],
}

impl SimilarityTransform {
    /// Validates that `rotation` is a proper rotation and `scale` positive.
    pub fn new(scale: f64, rotation: [[f64; 2]; 2], translation: [f64; 2]) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidTransform(format!("scale must be positive, got {scale}")));
        }
        if !translation.iter().chain(rotation.iter().flatten()).all(|v| v.is_finite()) {
            return Err(Error::InvalidTransform("non-finite entry".into()));
        }
        let [[a, b], [c, d]] = rotation;
        let rtr = [[a * a + c * c, a * b + c * d], [a * b + c * d, b * b + d * d]];
        let off = (rtr[0][0] - 1.0).abs().max((rtr[1][1] - 1.0).abs()).max(rtr[0][1].abs());
        if off > ORTHO_TOL {
            return Err(Error::InvalidTransform(format!("rotation is not orthonormal (deviation {off:e})")));
        }
        let det = a * d - b * c;
        if (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvalidTransform(format!("rotation determinant is {det}, reflections are not allowed")));
        }
        Ok(SimilarityTransform { scale, rotation, translation })
    }

    pub fn identity() -> Self {
        SimilarityTransform { scale: 1.0, rotation: [[1.0, 0.0], [0.0, 1.0]], translation: [0.0, 0.0] }
    }

    /// Counter-clockwise rotation by `angle` radians (in a y-up frame).
    pub fn from_parts(scale: f64, angle: f64, translation: [f64; 2]) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        SimilarityTransform::new(scale, [[c, -s], [s, c]], translation)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation(&self) -> [[f64; 2]; 2] {
        self.rotation
    }

    pub fn translation(&self) -> [f64; 2] {
        self.translation
    }

    /// Rotation angle in radians, in (-π, π].
    pub fn angle(&self) -> f64 {
        self.rotation[1][0].atan2(self.rotation[0][0])
    }

    #[inline]
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.rotation;
        [
            self.scale * (a * p[0] + b * p[1]) + self.translation[0],
            self.scale * (c * p[0] + d * p[1]) + self.translation[1],
        ]
    }

    /// Exact group inverse: `(1/c) Rᵀ (p − t)`.
    pub fn invert(&self) -> SimilarityTransform {
        let [[a, b], [c, d]] = self.rotation;
        let rt = [[a, c], [b, d]];
        let inv_scale = 1.0 / self.scale;
        let t = self.translation;
        let tx = -inv_scale * (rt[0][0] * t[0] + rt[0][1] * t[1]);
        let ty = -inv_scale * (rt[1][0] * t[0] + rt[1][1] * t[1]);
        SimilarityTransform { scale: inv_scale, rotation: rt, translation: [tx, ty] }
    }

    /// `self ∘ first`: applies `first`, then `self`.
    pub fn compose(&self, first: &SimilarityTransform) -> SimilarityTransform {
        let r = mat_mul(self.rotation, first.rotation);
        let t0 = self.apply(first.translation);
        SimilarityTransform { scale: self.scale * first.scale, rotation: r, translation: t0 }
    }

    /// Seven whitespace-separated numbers: `scale r00 r01 r10 r11 tx ty`,
    /// each with 12 significant digits.
    pub fn to_text(&self) -> String {
        let [[a, b], [c, d]] = self.rotation;
        let vals = [self.scale, a, b, c, d, self.translation[0], self.translation[1]];
        let mut s = vals.iter().map(|v| format!("{v:.11e}")).collect::<Vec<_>>().join(" ");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let vals: Vec<f64> = text
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidTransform(format!("bad number: {e}")))?;
        if vals.len() != 7 {
            return Err(Error::InvalidTransform(format!("expected 7 numbers, found {}", vals.len())));
        }
        let rot = [[vals[1], vals[2]], [vals[3], vals[4]]];
        // 12 significant digits leave ~1e-12 drift; re-orthonormalize from the angle.
        let angle = rot[1][0].atan2(rot[0][0]);
        let (s, c) = angle.sin_cos();
        let clean = [[c, -s], [s, c]];
        let dev = rot.iter().flatten().zip(clean.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if dev > 1e-6 {
            return Err(Error::InvalidTransform(format!(
                "rotation entries are not a proper rotation (deviation {dev:e})"
            )));
        }
        SimilarityTransform::new(vals[0], clean, [vals[5], vals[6]])
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SimilarityTransform::from_text(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn mat_mul(x: [[f64; 2]; 2], y: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}
