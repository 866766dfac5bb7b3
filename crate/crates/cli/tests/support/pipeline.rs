use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use holoalign_cli::run;
use holoalign_core::dataset::SplitAssignment;
use holoalign_core::model::{
    emit_label_file, parse_label_file, save_manifest, Annotation, BBox, CoordSpace, DatasetManifest, ImageRecord,
    LabelSource, Modality, Raster, SimilarityTransform,
};
use holoalign_core::registration::{warp_image, write_point_pairs, Interpolation, PointPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Outcome;

const SEED: &str = "7";

fn cli(root: &Path, jobs: &str, args: &[&str]) -> Result<(), String> {
    let mut argv: Vec<String> = vec!["holoalign".into(), "--seed".into(), SEED.into(), "--jobs".into(), jobs.into()];
    argv.extend(args.iter().map(|a| match a.strip_prefix('@') {
        Some(rel) => root.join(rel).to_string_lossy().into_owned(),
        None => a.to_string(),
    }));
    let code = run(&argv);
    ensure!(code == 0, "`{}` exited {code}", args.join(" "));
    Ok(())
}

/// Optical slide with labelled discs, its greyscale holographic
/// counterpart under a planted similarity, and matching control points.
fn fixture(root: &Path) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let (w, h) = (900usize, 700usize);
    let mut discs = Vec::new();
    while discs.len() < 24 {
        let r = rng.gen_range(10.0..22.0);
        let c = [rng.gen_range(30.0..w as f64 - 30.0), rng.gen_range(30.0..h as f64 - 30.0)];
        if discs.iter().all(|&(d, rr, _): &([f64; 2], f64, usize)| (d[0] - c[0]).hypot(d[1] - c[1]) > r + rr + 4.0) {
            discs.push((c, r, rng.gen_range(0..4)));
        }
    }
    let palette = [[200u8, 60, 60], [60, 200, 60], [60, 60, 200], [220, 200, 40]];
    let optical = Raster::from_fn(w, h, 3, |x, y| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        for &(c, r, k) in &discs {
            if (px - c[0]).hypot(py - c[1]) <= r {
                return palette[k];
            }
        }
        let t = ((x * 7 + y * 3) % 40) as u8;
        [90 + t, 100 + t, 110 + t]
    })
    .unwrap();
    optical.save_png(root.join("optical.png")).map_err(|e| e.to_string())?;
    let anns: Vec<Annotation> = discs
        .iter()
        .map(|&(c, r, k)| Annotation::manual(BBox::pixel(c[0], c[1], 2.0 * r, 2.0 * r).unwrap().to_normalized(w, h), k))
        .collect();
    std::fs::write(root.join("optical.txt"), emit_label_file(&anns).unwrap()).map_err(|e| e.to_string())?;

    let grey = Raster::from_fn(w, h, 1, |x, y| {
        let p = optical.pixel(x, y);
        [((p[0] as u32 * 3 + p[1] as u32 * 6 + p[2] as u32) / 10) as u8, 0, 0]
    })
    .unwrap();
    let (hw, hh) = (560usize, 440usize);
    let planted = SimilarityTransform::from_parts(1.5, 2f64.to_radians(), [12.0, -6.0]).unwrap();
    let holo = warp_image(&grey, &planted.invert(), hw, hh, Interpolation::Bilinear).map_err(|e| e.to_string())?;
    holo.save_png(root.join("holo.png")).map_err(|e| e.to_string())?;
    let pairs: Vec<PointPair> = (0..10)
        .map(|_| {
            let s = [rng.gen_range(20.0..hw as f64 - 20.0), rng.gen_range(20.0..hh as f64 - 20.0)];
            let d = planted.apply(s);
            PointPair::new(s, [d[0] + rng.gen_range(-0.3..0.3), d[1] + rng.gen_range(-0.3..0.3)])
        })
        .collect();
    write_point_pairs(root.join("pairs.csv"), &pairs).map_err(|e| e.to_string())
}

fn stems_in(list: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(list).map_err(|e| e.to_string())?;
    Ok(text.lines().filter_map(|l| l.split('\t').next()).map(|n| n.trim_end_matches(".png").to_string()).collect())
}

fn copy(from: PathBuf, to: PathBuf) -> Result<(), String> {
    std::fs::copy(&from, &to).map(|_| ()).map_err(|e| format!("{}: {e}", from.display()))
}

fn pipeline(root: &Path, jobs: &str) -> Result<(), String> {
    fixture(root)?;
    cli(root, jobs, &["register", "--points", "@pairs.csv", "--out", "@reg/transform.txt"])?;
    cli(
        root,
        jobs,
        &[
            "warp",
            "--image",
            "@holo.png",
            "--transform",
            "@reg/transform.txt",
            "--like",
            "@optical.png",
            "--out",
            "@aligned/holo.png",
        ],
    )?;
    cli(root, jobs, &["propagate", "--labels", "@optical.txt", "--out", "@aligned/holo.txt"])?;
    cli(
        root,
        jobs,
        &[
            "tile",
            "--image",
            "@aligned/holo.png",
            "--labels",
            "@aligned/holo.txt",
            "--out-dir",
            "@tiles",
            "--tile-size",
            "256",
        ],
    )?;
    cli(root, jobs, &["screen", "--dir", "@tiles", "--out-dir", "@screen"])?;

    let kept = stems_in(&root.join("screen/kept.txt"))?;
    ensure!(!kept.is_empty(), "screening kept nothing");
    for dir in ["train", "gt", "det"] {
        std::fs::create_dir_all(root.join(dir)).map_err(|e| e.to_string())?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for s in &kept {
        copy(root.join(format!("tiles/{s}.png")), root.join(format!("train/{s}.png")))?;
        copy(root.join(format!("tiles/{s}.txt")), root.join(format!("gt/{s}.txt")))?;
        let (from, to) = (format!("@tiles/{s}.txt"), format!("@train/{s}.txt"));
        cli(root, jobs, &["expand", "--labels", &from, "--out", &to, "--factor", "1.25"])?;

        let gt_text = std::fs::read_to_string(root.join(format!("gt/{s}.txt"))).map_err(|e| e.to_string())?;
        let gt = parse_label_file(&gt_text, CoordSpace::Normalized, LabelSource::Manual).map_err(|e| e.to_string())?;
        let mut dets: Vec<Annotation> = gt
            .iter()
            .map(|a| {
                let b = BBox { cx: a.bbox.cx + rng.gen_range(-0.01..0.01), ..a.bbox };
                let b = b.clip_to(1.0, 1.0).unwrap_or(a.bbox);
                Annotation::auto(b, a.class_id, Some(rng.gen_range(0.3..1.0)))
            })
            .collect();
        dets.push(Annotation::auto(
            BBox::normalized(0.5, 0.5, 0.05, 0.05).unwrap(),
            Some(rng.gen_range(0..4)),
            Some(0.4),
        ));
        std::fs::write(root.join(format!("det/{s}.txt")), emit_label_file(&dets).unwrap())
            .map_err(|e| e.to_string())?;
    }
    cli(root, jobs, &["split", "--labels-dir", "@train", "--out", "@split.txt"])?;
    cli(root, jobs, &["augment", "--dir", "@train", "--out-dir", "@aug", "--draws", "2"])?;
    cli(root, jobs, &["evaluate", "--gt-dir", "@gt", "--det-dir", "@det", "--out-dir", "@eval"])?;

    let split = SplitAssignment::load(root.join("split.txt")).map_err(|e| e.to_string())?;
    let mut m = DatasetManifest::new(["T1", "T2", "T5", "T9"].map(String::from).to_vec());
    for s in &kept {
        let mut rec = ImageRecord::new(format!("train/{s}.png"), Modality::Holographic);
        rec.aligned = true;
        let text = std::fs::read_to_string(root.join(format!("train/{s}.txt"))).map_err(|e| e.to_string())?;
        rec.annotations =
            parse_label_file(&text, CoordSpace::Normalized, LabelSource::Manual).map_err(|e| e.to_string())?;
        m.records.push(rec);
    }
    m.splits = split.0.clone();
    save_manifest(&m, root.join("manifest.json")).map_err(|e| e.to_string())?;
    cli(root, jobs, &["report", "tables", "--manifest", "@manifest.json", "--out-dir", "@report"])?;
    cli(
        root,
        jobs,
        &[
            "--summary",
            "@report/factors.json",
            "report",
            "factors",
            "--pair",
            "5590:77268",
            "--manifest",
            "@manifest.json",
        ],
    )?;
    cli(
        root,
        jobs,
        &["--summary", "@report/compare.json", "report", "compare", "--before", "0.462", "--after", "0.913"],
    )?;
    Ok(())
}

fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

pub fn end_to_end() -> Outcome {
    let start = Instant::now();
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    pipeline(a.path(), "1")?;
    pipeline(b.path(), "3")?;
    let secs = start.elapsed().as_secs_f64();

    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    ensure!(sa.keys().eq(sb.keys()), "runs produced different file sets");
    if let Some((path, _)) = sa.iter().find(|(p, bytes)| sb[*p] != **bytes) {
        return Err(format!("{} differs between runs", path.display()));
    }
    let reg: serde_json::Value =
        serde_json::from_slice(&sa[Path::new("reg/transform.summary.json")]).map_err(|e| e.to_string())?;
    let scale = reg["stats"]["scale"].as_f64().unwrap_or_default();
    ensure!((scale - 1.5).abs() < 1e-3, "registered scale {scale}");
    let screen: serde_json::Value =
        serde_json::from_slice(&sa[Path::new("screen/summary.json")]).map_err(|e| e.to_string())?;
    let excluded = screen["stats"]["excluded"].as_u64().unwrap_or_default();
    ensure!(excluded > 0, "no tile was screened out");
    let eval: serde_json::Value =
        serde_json::from_slice(&sa[Path::new("eval/summary.json")]).map_err(|e| e.to_string())?;
    let map = eval["stats"]["map50"].as_f64().unwrap_or_default();
    ensure!(secs < 300.0, "two runs took {secs:.1} s");
    Ok(format!(
        "two runs (1 and 3 jobs) byte-identical over {} files; scale {scale:.4}, {excluded} tiles screened out, mAP50 {map:.3}",
        sa.len()
    ))
}
