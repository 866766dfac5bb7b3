use std::f64::consts::PI;
use std::time::Instant;

use holoalign_core::dataset::black_fraction;
use holoalign_core::model::{Raster, SimilarityTransform};
use holoalign_core::registration::{estimate_similarity, warp_image, Interpolation, PointPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Outcome;

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

pub fn recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let (mut worst_param, mut worst_rms) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let scale = (rng.gen_range(0.25f64.ln()..=8.0f64.ln())).exp();
        let angle = PI - rng.gen_range(0.0..2.0 * PI);
        let t = [rng.gen_range(-1e4..=1e4), rng.gen_range(-1e4..=1e4)];
        let planted = SimilarityTransform::from_parts(scale, angle, t).unwrap();
        let n = rng.gen_range(4..=12);
        let mut src: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(0.0..3840.0), rng.gen_range(0.0..2160.0)]).collect();
        // Pin three corners so the set is never collinear.
        src[..3].copy_from_slice(&[[0.0, 0.0], [3840.0, 0.0], [0.0, 2160.0]]);
        let pairs: Vec<PointPair> = src.iter().map(|&s| PointPair::new(s, planted.apply(s))).collect();
        let r = estimate_similarity(&pairs).map_err(|e| e.to_string())?;
        let got = r.transform;
        let errs = [
            rel(got.scale(), scale),
            angle_diff(got.angle(), angle) / angle.abs().max(1.0),
            rel(got.translation()[0], t[0]),
            rel(got.translation()[1], t[1]),
        ];
        worst_param = errs.iter().fold(worst_param, |a, &b| a.max(b));
        worst_rms = worst_rms.max(r.rms_residual);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(worst_param < 1e-6, "parameter error {worst_param:.3e}");
    ensure!(worst_rms < 1e-9, "rms residual {worst_rms:.3e}");
    ensure!(secs < 5.0, "took {secs:.2} s");
    Ok(format!("1000 transforms, max rel error {worst_param:.1e}, max rms {worst_rms:.1e}"))
}

pub fn paper_scale() -> Outcome {
    let (sw, sh) = (3840usize, 2160usize);
    let (dw, dh) = (17500usize, 8000usize);
    let scale = 17500.0 / 3840.0;
    let angle = 0.4f64.to_radians();
    // Source centre lands 300 px right of the frame centre.
    let c = [sw as f64 / 2.0, sh as f64 / 2.0];
    let rc = [scale * (angle.cos() * c[0] - angle.sin() * c[1]), scale * (angle.sin() * c[0] + angle.cos() * c[1])];
    let planted =
        SimilarityTransform::from_parts(scale, angle, [dw as f64 / 2.0 + 300.0 - rc[0], dh as f64 / 2.0 - rc[1]])
            .unwrap();
    let src_pts =
        [[120.0, 80.0], [3700.0, 150.0], [200.0, 2000.0], [3500.0, 2100.0], [1900.0, 1000.0], [640.0, 1500.0]];
    let pairs: Vec<PointPair> = src_pts.iter().map(|&s| PointPair::new(s, planted.apply(s))).collect();
    let r = estimate_similarity(&pairs).map_err(|e| e.to_string())?;
    ensure!(rel(r.transform.scale(), scale) < 1e-6, "scale {}", r.transform.scale());
    ensure!((r.transform.angle() - angle).abs() < 1e-6, "angle {}", r.transform.angle());

    let src = Raster::from_fn(sw, sh, 1, |x, y| [1 + ((x ^ y) % 250) as u8, 0, 0]).unwrap();
    let start = Instant::now();
    let out = warp_image(&src, &r.transform, dw, dh, Interpolation::Bilinear).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "warp took {secs:.1} s");

    let frac = black_fraction(&out);
    ensure!(frac > 0.01 && frac < 0.5, "black fraction {frac}");
    // Black exactly where the inverse-mapped pixel centre leaves the source.
    let inv = r.transform.invert();
    let mut checked = 0;
    for y in (0..dh).step_by(97) {
        for x in (0..dw).step_by(89) {
            let [u, v] = inv.apply([x as f64 + 0.5, y as f64 + 0.5]);
            let margin = u.min(v).min(sw as f64 - u).min(sh as f64 - v);
            if margin.abs() < 1e-6 {
                continue;
            }
            ensure!((out.pixel(x, y)[0] == 0) == (margin < 0.0), "pixel ({x},{y}) margin {margin}");
            checked += 1;
        }
    }
    Ok(format!(
        "scale {:.6} recovered; 17500x8000 warp {secs:.1} s, black fraction {frac:.4}, {checked} pixels cross-checked",
        r.transform.scale()
    ))
}
