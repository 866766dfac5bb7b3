use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use holoalign_core::augment::{augment, mixup, AugmentationPolicy};
use holoalign_core::dataset::{
    assign_classes_from_image, black_fraction, class_weights, count_instances, expand_bbox, extract_crops,
    merge_labels, screen_tiles, split_dataset, tile_raster, SplitItem, Tile,
};
use holoalign_core::eval::{
    classification_metrics, detections_from_annotations, evaluate_detections, ground_truth_from_annotations, EvalResult,
};
use holoalign_core::model::{
    load_manifest, Annotation, ClassId, ImageRecord, LabelSource, Modality, Raster, SimilarityTransform,
};
use holoalign_core::registration::{estimate_similarity, map_bbox, read_point_pairs, warp_image_budgeted};
use holoalign_core::report::{compare_runs, compare_scores, expansion_factor, table_instances, table_splits};
use holoalign_core::Error;
use log::{info, warn};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::io::{
    ensure_dir, ensure_parent, list_files, parse_size, read_labels, read_text, stem, write_labels, write_summary,
    write_text,
};
use crate::{
    AugmentArgs, Cli, Command, CropsArgs, EvaluateArgs, ExpandArgs, MergeArgs, PolicyArg, PropagateArgs, RegisterArgs,
    ReportCommand, ScreenArgs, SourceArg, SplitArgs, TileArgs, WarpArgs, WeightsArgs,
};

type Outcome = Result<(Value, Option<PathBuf>), CliError>;

fn source(s: SourceArg) -> LabelSource {
    match s {
        SourceArg::Manual => LabelSource::Manual,
        SourceArg::Auto => LabelSource::Auto,
    }
}

fn sibling_summary(out: &Path) -> Option<PathBuf> {
    Some(out.with_extension("summary.json"))
}

fn dir_summary(dir: &Path) -> Option<PathBuf> {
    Some(dir.join("summary.json"))
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.detection_policy.seed = seed;
        cfg.classification_policy.seed = seed;
    }
    apply_overrides(&mut cfg, &cli.command);
    cfg.validate()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("jobs: {e}")))?;

    let name = command_name(&cli.command);
    let (stats, default_summary) = pool.install(|| dispatch(&cli.command, &cfg))?;
    if let Some(path) = cli.summary.or(default_summary) {
        write_summary(&path, name, &cfg, stats)?;
        info!("summary written to {}", path.display());
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Register(_) => "register",
        Command::Warp(_) => "warp",
        Command::Propagate(_) => "propagate",
        Command::Tile(_) => "tile",
        Command::Crops(_) => "crops",
        Command::Screen(_) => "screen",
        Command::Expand(_) => "expand",
        Command::Merge(_) => "merge",
        Command::Split(_) => "split",
        Command::Weights(_) => "weights",
        Command::Augment(_) => "augment",
        Command::Evaluate(_) => "evaluate",
        Command::Report(ReportCommand::Factors { .. }) => "report factors",
        Command::Report(ReportCommand::Tables { .. }) => "report tables",
        Command::Report(ReportCommand::Compare { .. }) => "report compare",
    }
}

/// Flags win over the config file.
fn apply_overrides(cfg: &mut PipelineConfig, c: &Command) {
    match c {
        Command::Warp(a) => {
            if let Some(i) = a.interpolation {
                cfg.interpolation = i.into();
            }
        }
        Command::Propagate(a) => {
            if let Some(f) = a.expansion_factor {
                cfg.expansion_factor = f;
            }
            if let Some(m) = a.expansion_mode {
                cfg.expansion_mode = m.into();
            }
        }
        Command::Tile(a) => {
            if let Some(t) = a.tile_size {
                cfg.tile_size = t;
            }
            if let Some(k) = a.keep_fraction {
                cfg.keep_fraction = k;
            }
        }
        Command::Crops(a) => {
            if let Some(s) = a.crop_size {
                cfg.crop_size = s;
            }
        }
        Command::Screen(a) => {
            if let Some(t) = a.threshold {
                cfg.black_threshold = t;
            }
        }
        Command::Expand(a) => {
            if let Some(f) = a.factor {
                cfg.expansion_factor = f;
            }
            if let Some(m) = a.mode {
                cfg.expansion_mode = m.into();
            }
        }
        Command::Merge(a) => {
            if let Some(t) = a.iou {
                cfg.merge_iou = t;
            }
        }
        Command::Split(a) => {
            if let Some(r) = &a.ratios {
                cfg.split_ratios = [r[0], r[1], r[2]];
            }
        }
        _ => {}
    }
}

fn dispatch(c: &Command, cfg: &PipelineConfig) -> Outcome {
    match c {
        Command::Register(a) => register(a),
        Command::Warp(a) => warp(a, cfg),
        Command::Propagate(a) => propagate(a, cfg),
        Command::Tile(a) => tile(a, cfg),
        Command::Crops(a) => crops(a, cfg),
        Command::Screen(a) => screen(a, cfg),
        Command::Expand(a) => expand(a, cfg),
        Command::Merge(a) => merge(a, cfg),
        Command::Split(a) => split(a, cfg),
        Command::Weights(a) => weights(a, cfg),
        Command::Augment(a) => augment_dir(a, cfg),
        Command::Evaluate(a) => evaluate(a, cfg),
        Command::Report(r) => report(r),
    }
}

fn register(a: &RegisterArgs) -> Outcome {
    let pairs = read_point_pairs(&a.points)?;
    let r = estimate_similarity(&pairs)?;
    ensure_parent(&a.out)?;
    r.transform.save(&a.out)?;
    if r.degenerate {
        warn!("source points are collinear; rotation rests on a single direction");
    }
    println!(
        "scale {:.9} angle {:.6} deg rms {:.3e} over {} points",
        r.transform.scale(),
        r.transform.angle().to_degrees(),
        r.rms_residual,
        r.n_points
    );
    let stats = json!({
        "n_points": r.n_points,
        "rms_residual": r.rms_residual,
        "degenerate": r.degenerate,
        "scale": r.transform.scale(),
        "angle_deg": r.transform.angle().to_degrees(),
        "translation": r.transform.translation(),
    });
    Ok((stats, sibling_summary(&a.out)))
}

fn warp(a: &WarpArgs, cfg: &PipelineConfig) -> Outcome {
    let (w, h) = match (&a.like, a.width, a.height) {
        (Some(p), _, _) => {
            let r = Raster::load_png(p)?;
            (r.width(), r.height())
        }
        (None, Some(w), Some(h)) => (w, h),
        _ => return Err(CliError::Usage("warp needs --like or both --width and --height".into())),
    };
    let src = Raster::load_png(&a.image)?;
    let t = SimilarityTransform::load(&a.transform)?;
    let out = warp_image_budgeted(&src, &t, w, h, cfg.interpolation, cfg.max_pixels)?;
    ensure_parent(&a.out)?;
    out.save_png(&a.out)?;
    let stats = json!({ "width": w, "height": h, "black_fraction": black_fraction(&out) });
    Ok((stats, sibling_summary(&a.out)))
}

fn propagate(a: &PropagateArgs, cfg: &PipelineConfig) -> Outcome {
    let anns = read_labels(&a.labels, source(a.source))?;
    let mut dropped = 0;
    let mapped: Vec<Annotation> = match &a.transform {
        None => anns.clone(),
        Some(tp) => {
            let t = SimilarityTransform::load(tp)?;
            let (sw, sh) = parse_size(a.src_size.as_deref().unwrap_or_default())?;
            let (dw, dh) = parse_size(a.dst_size.as_deref().unwrap_or_default())?;
            let mut out = Vec::with_capacity(anns.len());
            for ann in &anns {
                let m = map_bbox(&t, &ann.bbox.to_pixel(sw, sh))?;
                match m.clip_to(dw as f64, dh as f64) {
                    Some(b) => out.push((*ann).with_box(b.to_normalized(dw, dh))),
                    None => dropped += 1,
                }
            }
            out
        }
    };
    let grown = expand_all(&mapped, cfg)?;
    write_labels(&a.out, &grown)?;
    let stats = json!({
        "annotations_in": anns.len(),
        "annotations_out": grown.len(),
        "dropped_outside_frame": dropped,
        "transformed": a.transform.is_some(),
    });
    Ok((stats, sibling_summary(&a.out)))
}

fn expand_all(anns: &[Annotation], cfg: &PipelineConfig) -> Result<Vec<Annotation>, CliError> {
    anns.iter()
        .map(|a| {
            let b = expand_bbox(&a.bbox, cfg.expansion_factor, (1.0, 1.0), cfg.expansion_mode)?;
            Ok((*a).with_box(b))
        })
        .collect()
}

fn expand(a: &ExpandArgs, cfg: &PipelineConfig) -> Outcome {
    let anns = read_labels(&a.labels, source(a.source))?;
    let grown = expand_all(&anns, cfg)?;
    write_labels(&a.out, &grown)?;
    let clipped = anns
        .iter()
        .zip(&grown)
        .filter(|(o, g)| (g.bbox.area() - o.bbox.area() * cfg.expansion_factor).abs() > 1e-12)
        .count();
    let stats = json!({ "annotations": grown.len(), "clipped_at_border": clipped });
    Ok((stats, sibling_summary(&a.out)))
}

fn tile(a: &TileArgs, cfg: &PipelineConfig) -> Outcome {
    let raster = Raster::load_png(&a.image)?;
    let anns = match &a.labels {
        Some(p) => read_labels(p, source(a.source))?,
        None => Vec::new(),
    };
    let name = a.name.clone().unwrap_or_else(|| stem(&a.image));
    let outcome = tile_raster(&name, &raster, &anns, cfg.tile_size, cfg.keep_fraction)?;
    ensure_dir(&a.out_dir)?;
    outcome.tiles.par_iter().try_for_each(|t| -> Result<(), CliError> {
        let s = t.stem();
        t.raster.save_png(a.out_dir.join(format!("{s}.png")))?;
        write_labels(&a.out_dir.join(format!("{s}.txt")), &t.annotations)
    })?;
    if outcome.damaged > 0 {
        warn!("{name}: {} annotation(s) kept in no tile", outcome.damaged);
    }
    let stats = json!({
        "rows": outcome.rows,
        "cols": outcome.cols,
        "tiles": outcome.tiles.len(),
        "annotations_in": anns.len(),
        "annotations_out": outcome.tiles.iter().map(|t| t.annotations.len()).sum::<usize>(),
        "damaged": outcome.damaged,
    });
    Ok((stats, dir_summary(&a.out_dir)))
}

fn crops(a: &CropsArgs, cfg: &PipelineConfig) -> Outcome {
    let raster = Raster::load_png(&a.image)?;
    let mut record = ImageRecord::new(&a.image, Modality::Optical);
    record.annotations = read_labels(&a.labels, LabelSource::Manual)?;
    if let Some(c) = record.annotations.iter().filter_map(|x| x.class_id).find(|&c| c >= cfg.class_names.len()) {
        return Err(Error::InvalidAnnotation(format!("class {c} outside the configured class list")).into());
    }
    let name = a.name.clone().unwrap_or_else(|| stem(&a.image));
    let outcome = extract_crops(&record, &raster, cfg.crop_size)?;
    ensure_dir(&a.out_dir)?;
    outcome.crops.par_iter().try_for_each(|c| -> Result<(), CliError> {
        let s = c.stem(&name, &cfg.class_names[c.class_id]);
        c.raster.save_png(a.out_dir.join(format!("{s}.png")))?;
        Ok(())
    })?;
    let mut per_class = vec![0usize; cfg.class_names.len()];
    for c in &outcome.crops {
        per_class[c.class_id] += 1;
    }
    let stats = json!({ "crops": outcome.crops.len(), "skipped": outcome.skipped, "per_class": per_class });
    Ok((stats, dir_summary(&a.out_dir)))
}

fn screen(a: &ScreenArgs, cfg: &PipelineConfig) -> Outcome {
    let files = list_files(&a.dir, "png")?;
    let verdicts: Vec<(String, f64, bool)> = files
        .par_iter()
        .map(|p| -> Result<_, CliError> {
            let raster = Raster::load_png(p)?;
            let frac = black_fraction(&raster);
            let t = Tile { parent: stem(p), row: 0, col: 0, origin: (0, 0), raster, annotations: Vec::new() };
            let s = screen_tiles(vec![t], cfg.black_threshold)?;
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, frac, !s.excluded.is_empty()))
        })
        .collect::<Result<_, _>>()?;
    let mut kept = String::new();
    let mut excluded = String::new();
    for (name, frac, ex) in &verdicts {
        let list = if *ex { &mut excluded } else { &mut kept };
        list.push_str(&format!("{name}\t{frac:.6}\n"));
    }
    write_text(&a.out_dir.join("kept.txt"), &kept)?;
    write_text(&a.out_dir.join("excluded.txt"), &excluded)?;
    let n_ex = verdicts.iter().filter(|v| v.2).count();
    info!("screened {} tiles: kept {}, excluded {n_ex}", verdicts.len(), verdicts.len() - n_ex);
    let stats = json!({ "tiles": verdicts.len(), "kept": verdicts.len() - n_ex, "excluded": n_ex });
    Ok((stats, dir_summary(&a.out_dir)))
}

fn merge(a: &MergeArgs, cfg: &PipelineConfig) -> Outcome {
    let manual = read_labels(&a.manual, LabelSource::Manual)?;
    let auto = read_labels(&a.auto, LabelSource::Auto)?;
    let mut merged = merge_labels(&manual, &auto, cfg.merge_iou)?;
    if let Some(tag) = &a.species {
        let mut record = ImageRecord::new(&a.out, Modality::Optical);
        record.species_tag = Some(tag.clone());
        record.annotations = merged;
        merged = assign_classes_from_image(&record, &cfg.class_names)?.annotations;
    }
    write_labels(&a.out, &merged)?;
    let stats = json!({
        "manual": manual.len(),
        "auto_in": auto.len(),
        "auto_kept": merged.len() - manual.len(),
        "unknown": merged.iter().filter(|x| x.class_id.is_none()).count(),
    });
    Ok((stats, sibling_summary(&a.out)))
}

/// Per-class instance histogram of a label file; UNKNOWN or out-of-range
/// classes are rejected.
fn histogram(path: &Path, k: usize) -> Result<BTreeMap<ClassId, usize>, CliError> {
    let mut h = BTreeMap::new();
    for (i, a) in read_labels(path, LabelSource::Manual)?.iter().enumerate() {
        match a.class_id {
            Some(c) if c < k => *h.entry(c).or_default() += 1,
            Some(c) => {
                return Err(Error::InvalidAnnotation(format!(
                    "{}: line {} has class {c} of {k}",
                    path.display(),
                    i + 1
                ))
                .into())
            }
            None => {
                return Err(Error::InvalidAnnotation(format!("{}: line {} is unlabelled", path.display(), i + 1)).into())
            }
        }
    }
    Ok(h)
}

fn split(a: &SplitArgs, cfg: &PipelineConfig) -> Outcome {
    let k = cfg.class_names.len();
    let items = list_files(&a.labels_dir, "txt")?
        .iter()
        .map(|p| Ok(SplitItem::new(stem(p), histogram(p, k)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let outcome = split_dataset(&items, cfg.split_ratios, cfg.seed)?;
    ensure_parent(&a.out)?;
    outcome.assignment.save(&a.out)?;
    for w in &outcome.warnings {
        warn!("{w}");
    }
    let sizes = outcome.assignment.sizes();
    println!("train {} val {} test {}", sizes[0], sizes[1], sizes[2]);
    let per_class: BTreeMap<&str, [usize; 3]> =
        outcome.class_counts.iter().map(|(&c, &n)| (cfg.class_names[c].as_str(), n)).collect();
    let stats = json!({ "items": sizes, "instances": per_class, "warnings": outcome.warnings });
    Ok((stats, sibling_summary(&a.out)))
}

fn weights(a: &WeightsArgs, cfg: &PipelineConfig) -> Outcome {
    let counts = match (&a.counts, &a.labels_dir) {
        (Some(c), _) => c.clone(),
        (None, Some(dir)) => {
            let k = cfg.class_names.len();
            let mut counts = vec![0usize; k];
            for p in list_files(dir, "txt")? {
                for (c, n) in histogram(&p, k)? {
                    counts[c] += n;
                }
            }
            counts
        }
        (None, None) => return Err(CliError::Usage("weights needs --counts or --labels-dir".into())),
    };
    let table = class_weights(&counts)?;
    let names: Vec<String> = if counts.len() == cfg.class_names.len() {
        cfg.class_names.clone()
    } else {
        (0..counts.len()).map(|i| format!("class{i}")).collect()
    };
    let mut text = String::from("class,count,weight\n");
    for ((n, c), w) in names.iter().zip(&counts).zip(&table.weights) {
        text.push_str(&format!("{n},{c},{w:.6}\n"));
    }
    write_text(&a.out, &text)?;
    print!("{text}");
    let stats = json!({ "counts": counts, "weights": table.weights });
    Ok((stats, sibling_summary(&a.out)))
}

fn augment_dir(a: &AugmentArgs, cfg: &PipelineConfig) -> Outcome {
    if a.draws == 0 {
        return Err(CliError::Usage("--draws must be at least 1".into()));
    }
    let policy: &AugmentationPolicy = match a.policy {
        PolicyArg::Detection => &cfg.detection_policy,
        PolicyArg::Classification => &cfg.classification_policy,
    };
    let files = list_files(&a.dir, "png")?;
    let items = files
        .par_iter()
        .map(|p| -> Result<_, CliError> {
            let label = p.with_extension("txt");
            let anns = if label.is_file() { Some(read_labels(&label, LabelSource::Manual)?) } else { None };
            Ok((stem(p), Raster::load_png(p)?, anns))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ensure_dir(&a.out_dir)?;
    let n = items.len();
    let jobs: Vec<(usize, u64)> = (0..n).flat_map(|i| (0..a.draws).map(move |d| (i, d))).collect();
    // (dropped annotations, mixed, mixup skipped)
    let results = jobs
        .par_iter()
        .map(|&(i, d)| -> Result<(usize, bool, bool), CliError> {
            let (name, raster, anns) = &items[i];
            let out = augment(raster, anns.as_deref().unwrap_or_default(), policy, i as u64 * a.draws + d)?;
            let mut img = out.raster;
            let (mut mixed, mut skipped) = (false, false);
            if let Some(lambda) = out.params.mixup_lambda {
                let partner = &items[(i + 1) % n].1;
                match mixup(&img, partner, lambda) {
                    Ok(m) => {
                        img = m;
                        mixed = true;
                    }
                    Err(Error::DimensionMismatch(msg)) => {
                        warn!("{name} draw {d}: mixup skipped, {msg}");
                        skipped = true;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let s = format!("{name}_aug{d}");
            img.save_png(a.out_dir.join(format!("{s}.png")))?;
            if anns.is_some() {
                write_labels(&a.out_dir.join(format!("{s}.txt")), &out.annotations)?;
            }
            Ok((out.dropped, mixed, skipped))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let stats = json!({
        "images": n,
        "draws": a.draws,
        "outputs": results.len(),
        "dropped_annotations": results.iter().map(|r| r.0).sum::<usize>(),
        "mixed": results.iter().filter(|r| r.1).count(),
        "mixup_skipped": results.iter().filter(|r| r.2).count(),
    });
    Ok((stats, dir_summary(&a.out_dir)))
}

fn class_ref(text: &str, names: &[String]) -> Option<ClassId> {
    let t = text.trim();
    names.iter().position(|n| n == t).or_else(|| t.parse().ok())
}

fn evaluate(a: &EvaluateArgs, cfg: &PipelineConfig) -> Outcome {
    let result = match (&a.gt_dir, &a.det_dir, &a.pairs) {
        (Some(gt_dir), Some(det_dir), _) => {
            let mut stems: Vec<String> = list_files(gt_dir, "txt")?.iter().map(|p| stem(p)).collect();
            stems.extend(list_files(det_dir, "txt")?.iter().map(|p| stem(p)));
            stems.sort();
            stems.dedup();
            let (mut dets, mut gts) = (Vec::new(), Vec::new());
            for s in &stems {
                let g = gt_dir.join(format!("{s}.txt"));
                if g.is_file() {
                    gts.extend(ground_truth_from_annotations(s, &read_labels(&g, LabelSource::Manual)?)?);
                }
                let d = det_dir.join(format!("{s}.txt"));
                if d.is_file() {
                    dets.extend(detections_from_annotations(s, &read_labels(&d, LabelSource::Auto)?)?);
                }
            }
            evaluate_detections(&dets, &gts, &cfg.class_names, a.iou, a.ap_method.into())?
        }
        (None, None, Some(pairs)) => {
            let text = read_text(pairs)?;
            let (mut truth, mut pred) = (Vec::new(), Vec::new());
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let parsed = line
                    .split_once(',')
                    .and_then(|(t, p)| Some((class_ref(t, &cfg.class_names)?, class_ref(p, &cfg.class_names)?)));
                match parsed {
                    Some((t, p)) => {
                        truth.push(t);
                        pred.push(p);
                    }
                    None if i == 0 => {}
                    None => {
                        return Err(
                            Error::Parse { path: pairs.clone(), message: format!("line {}: {line:?}", i + 1) }.into()
                        )
                    }
                }
            }
            classification_metrics(&pred, &truth, &cfg.class_names)?
        }
        _ => return Err(CliError::Usage("evaluate needs --gt-dir with --det-dir, or --pairs".into())),
    };
    write_text(&a.out_dir.join("eval.json"), &result.to_json())?;
    write_text(&a.out_dir.join("eval.txt"), &result.to_text())?;
    print!("{}", result.to_text());
    let stats = json!({ "map50": result.map50, "accuracy": result.accuracy });
    Ok((stats, dir_summary(&a.out_dir)))
}

fn score_or_run(text: &str) -> Result<Result<f64, EvalResult>, CliError> {
    if let Ok(v) = text.parse::<f64>() {
        return Ok(Ok(v));
    }
    let path = Path::new(text);
    let json = read_text(path)?;
    serde_json::from_str(&json)
        .map(Err)
        .map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() }.into())
}

fn report(r: &ReportCommand) -> Outcome {
    match r {
        ReportCommand::Factors { pairs, manifest } => {
            let mut counts = Vec::new();
            for p in pairs {
                let parsed =
                    p.split_once(':').and_then(|(b, e)| Some((b.trim().parse().ok()?, e.trim().parse().ok()?)));
                counts.push(parsed.ok_or_else(|| CliError::Usage(format!("pair {p:?} is not BASELINE:EXPANDED")))?);
            }
            if let Some(m) = manifest {
                let c = count_instances(&load_manifest(m)?);
                counts.push((c.source_total(LabelSource::Manual), c.source_total(LabelSource::Auto)));
            }
            if counts.is_empty() {
                return Err(CliError::Usage("report factors needs --pair or --manifest".into()));
            }
            let mut out = Vec::new();
            for (b, e) in counts {
                let f = expansion_factor(b, e)?;
                println!("{f}");
                out.push(f);
            }
            Ok((json!({ "factors": out }), None))
        }
        ReportCommand::Tables { manifest, out_dir } => {
            let m = load_manifest(manifest)?;
            m.validate()?;
            let counts = count_instances(&m);
            let inst = table_instances(&counts);
            write_text(&out_dir.join("instances.txt"), &inst.to_text())?;
            write_text(&out_dir.join("instances.csv"), &inst.to_csv())?;
            print!("{}", inst.to_text());
            let mut stats = json!({ "instances": inst });
            if !m.splits.is_empty() {
                let sp = table_splits(&counts)?;
                write_text(&out_dir.join("splits.txt"), &sp.to_text())?;
                write_text(&out_dir.join("splits.csv"), &sp.to_csv())?;
                println!();
                print!("{}", sp.to_text());
                stats["splits"] = serde_json::to_value(&sp).expect("table serializes");
            }
            if !counts.unassigned.is_empty() {
                warn!("{} annotation(s) still unlabelled", counts.unassigned.values().sum::<usize>());
            }
            Ok((stats, dir_summary(out_dir)))
        }
        ReportCommand::Compare { before, after } => {
            let r = match (score_or_run(before)?, score_or_run(after)?) {
                (Ok(b), Ok(a)) => compare_scores(b, a)?,
                (Err(b), Err(a)) => compare_runs(&b, &a)?,
                _ => return Err(CliError::Usage("compare two scores or two evaluation files".into())),
            };
            println!("{r}");
            Ok((json!({ "comparison": r }), None))
        }
    }
}
