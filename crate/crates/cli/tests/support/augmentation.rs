use holoalign_core::augment::{
    augment, classification_policy_default, detection_policy_default, mixup, AugmentationPolicy, Jitter,
};
use holoalign_core::model::{Annotation, BBox, Raster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Outcome;

fn geometric_policy(seed: u64) -> AugmentationPolicy {
    AugmentationPolicy {
        max_rotation: 45.0,
        hflip_p: 0.5,
        vflip_p: 0.5,
        translate_max: 0.2,
        crop_keep_range: Some((0.8, 1.0)),
        jitter: Jitter::default(),
        ..AugmentationPolicy::identity(seed)
    }
}

fn determinism() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let img = Raster::from_fn(96, 80, 3, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap();
    let anns = vec![Annotation::manual(BBox::normalized(0.4, 0.5, 0.2, 0.3).unwrap(), 1)];
    let mut runs = 0;
    for policy in [detection_policy_default(), classification_policy_default(), geometric_policy(77)] {
        for draw in 0..40 {
            let a = augment(&img, &anns, &policy, draw).map_err(|e| e.to_string())?;
            let b = augment(&img, &anns, &policy, draw).map_err(|e| e.to_string())?;
            ensure!(a.raster == b.raster && a.annotations == b.annotations, "draw {draw} differs between runs");
            ensure!(a.params == b.params, "draw {draw} parameters differ");
            runs += 1;
        }
    }
    Ok(runs)
}

/// A bright 4×4 patch on black, labelled by its exact box. After each draw
/// every lit pixel must sit inside the transformed box grown by 1 px.
fn containment() -> Result<(usize, usize), String> {
    let (w, h) = (128usize, 96usize);
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let policy = geometric_policy(5);
    let (mut survived, mut lit_checked) = (0, 0);
    for draw in 0..500u64 {
        let x0 = rng.gen_range(24..w - 28);
        let y0 = rng.gen_range(24..h - 28);
        let img = Raster::from_fn(w, h, 1, |x, y| {
            let on = (x0..x0 + 4).contains(&x) && (y0..y0 + 4).contains(&y);
            [if on { 255 } else { 0 }, 0, 0]
        })
        .unwrap();
        let b = BBox::from_corners(
            x0 as f64,
            y0 as f64,
            x0 as f64 + 4.0,
            y0 as f64 + 4.0,
            holoalign_core::model::CoordSpace::Pixel,
        )
        .unwrap()
        .to_normalized(w, h);
        let out = augment(&img, &[Annotation::manual(b, 0)], &policy, draw).map_err(|e| e.to_string())?;
        let Some(a) = out.annotations.first() else { continue };
        survived += 1;
        let (bx0, by0, bx1, by1) = a.bbox.to_pixel(w, h).corners();
        for y in 0..h {
            for x in 0..w {
                if out.raster.pixel(x, y)[0] == 0 {
                    continue;
                }
                let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
                ensure!(
                    cx >= bx0 - 1.0 && cx <= bx1 + 1.0 && cy >= by0 - 1.0 && cy <= by1 + 1.0,
                    "draw {draw}: lit pixel ({x},{y}) outside box [{bx0:.2},{by0:.2},{bx1:.2},{by1:.2}]"
                );
                lit_checked += 1;
            }
        }
    }
    ensure!(survived > 400, "only {survived} of 500 patches stayed in frame");
    Ok((survived, lit_checked))
}

fn mixup_endpoints() -> Result<(), String> {
    let a = Raster::from_fn(40, 30, 3, |x, y| [x as u8, y as u8, 200]).unwrap();
    let b = Raster::from_fn(40, 30, 3, |x, y| [255 - x as u8, 9, y as u8]).unwrap();
    ensure!(mixup(&a, &b, 1.0).map_err(|e| e.to_string())? == a, "lambda 1 does not return the first image");
    ensure!(mixup(&a, &b, 0.0).map_err(|e| e.to_string())? == b, "lambda 0 does not return the second image");
    Ok(())
}

pub fn contract() -> Outcome {
    let runs = determinism()?;
    let (survived, lit) = containment()?;
    mixup_endpoints()?;
    Ok(format!(
        "{runs} repeated draws identical; {survived}/500 patches stayed in frame, all {lit} lit pixels inside their box; mixup endpoints exact"
    ))
}
