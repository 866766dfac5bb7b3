use holoalign_core::dataset::{
    class_weights, expand_unclipped, screen_tiles, split_dataset, ExpansionMode, SplitItem, Tile, DEFAULT_RATIOS,
};
use holoalign_core::model::{BBox, Raster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Outcome;

pub fn screening_boundary() -> Outcome {
    let tiles: Vec<Tile> = [1999usize, 2000, 2001]
        .iter()
        .map(|&black| {
            let mut r = Raster::filled(100, 100, &[90, 120, 40]).unwrap();
            r.data_mut()[..black * 3].fill(0);
            Tile { parent: format!("b{black}"), row: 0, col: 0, origin: (0, 0), raster: r, annotations: Vec::new() }
        })
        .collect();
    let out = screen_tiles(tiles, 0.20).map_err(|e| e.to_string())?;
    let kept: Vec<&str> = out.kept.iter().map(|t| t.parent.as_str()).collect();
    let excluded: Vec<&str> = out.excluded.iter().map(|t| t.parent.as_str()).collect();
    ensure!(kept == ["b1999"], "kept {kept:?}");
    ensure!(excluded == ["b2000", "b2001"], "excluded {excluded:?}");
    Ok("0.1999 kept, 0.2000 and 0.2001 excluded".into())
}

pub fn expansion_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for factor in [1.25, 1.50] {
        for _ in 0..1000 {
            let b = BBox::pixel(
                rng.gen_range(0.0..17500.0),
                rng.gen_range(0.0..8000.0),
                rng.gen_range(1.0..400.0),
                rng.gen_range(1.0..400.0),
            )
            .unwrap();
            let g = expand_unclipped(&b, factor, ExpansionMode::Area).map_err(|e| e.to_string())?;
            let err = (g.area() / b.area() - factor).abs();
            worst = worst.max(err);
            ensure!(err <= 1e-9, "area ratio off by {err:e} for {b:?}");
            ensure!(g.cx == b.cx && g.cy == b.cy, "centre moved for {b:?}");
        }
    }
    Ok(format!("2000 boxes, max area-ratio error {worst:.1e}, centres fixed"))
}

pub fn split_contract() -> Outcome {
    let counts = [790usize, 766, 1288, 1692];
    let mut items = Vec::new();
    for (c, &n) in counts.iter().enumerate() {
        items.extend((0..n).map(|i| SplitItem::single(format!("c{c}_{i:04}"), c)));
    }
    let mut worst_size = 0i64;
    let mut worst_frac = 0.0f64;
    for seed in 0..20 {
        let out = split_dataset(&items, DEFAULT_RATIOS, seed).map_err(|e| e.to_string())?;
        let sizes = out.assignment.sizes();
        for (got, want) in sizes.iter().zip([3175i64, 680, 681]) {
            worst_size = worst_size.max((*got as i64 - want).abs());
        }
        for (c, per) in &out.class_counts {
            for (k, &n) in per.iter().enumerate() {
                let frac = n as f64 / counts[*c] as f64;
                worst_frac = worst_frac.max((frac - DEFAULT_RATIOS[k]).abs());
            }
        }
    }
    ensure!(worst_size <= 1, "split sizes off by {worst_size}");
    ensure!(worst_frac <= 0.02, "per-class fraction off by {worst_frac:.4}");
    Ok(format!("20 seeds, sizes within {worst_size} of 3175/680/681, class fractions within {worst_frac:.4}"))
}

pub fn class_weights_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let k = rng.gen_range(1..12);
        let counts: Vec<usize> = (0..k).map(|_| rng.gen_range(1..200_000)).collect();
        let w = class_weights(&counts).map_err(|e| e.to_string())?.weights;
        let target = counts.iter().sum::<usize>() as f64 / k as f64;
        for (wc, &n) in w.iter().zip(&counts) {
            ensure!((wc * n as f64 - target).abs() <= 1e-9 * target, "w*n = {} vs {target}", wc * n as f64);
        }
    }
    let w = class_weights(&[790, 766, 1288, 1692]).map_err(|e| e.to_string())?.weights;
    let want = [1.43544, 1.48042, 0.88043, 0.67021];
    for (got, want) in w.iter().zip(want) {
        ensure!((got - want).abs() <= 1e-5, "weight {got} vs {want}");
    }
    Ok(format!("1000 random vectors; optical weights {:.5?}", w))
}
