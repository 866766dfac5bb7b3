use holoalign_cli::run;
use holoalign_core::dataset::count_instances;
use holoalign_core::model::{save_manifest, Annotation, BBox, DatasetManifest, ImageRecord, Modality, Split};
use holoalign_core::report::{compare_scores, expansion_factor, table_instances, table_splits};

use crate::Outcome;

pub fn factors() -> Outcome {
    let mut shown = Vec::new();
    for (b, e, want) in [(5590, 77268, 13.82), (4536, 68268, 15.05), (2952, 71639, 24.26), (2437, 63018, 25.85)] {
        let f = expansion_factor(b, e).map_err(|e| e.to_string())?.factor;
        ensure!((f - want).abs() <= 0.01, "{e}/{b} = {f:.4}, expected {want}");
        shown.push(format!("{f:.3}"));
    }
    for (before, after, want) in [(46.2, 91.3, 1.97), (2.49, 8.15, 3.27), (46.2, 2.49, 18.55), (42.0, 97.0, 2.30)] {
        let r = compare_scores(before, after).map_err(|e| e.to_string())?.ratio;
        ensure!((r - want).abs() <= 0.01, "{before} vs {after} = {r:.4}, expected {want}");
        shown.push(format!("{r:.3}"));
    }
    Ok(shown.join(" "))
}

/// Fills a class × split matrix with the given margins (north-west corner
/// rule), so every cell is a plausible count and both margins are exact.
fn cells(rows: &[usize], cols: &[usize; 3]) -> Vec<[usize; 3]> {
    let mut left = *cols;
    rows.iter()
        .map(|&n| {
            let mut need = n;
            let mut row = [0; 3];
            for (k, l) in left.iter_mut().enumerate() {
                let take = need.min(*l);
                row[k] = take;
                *l -= take;
                need -= take;
            }
            assert_eq!(need, 0);
            row
        })
        .collect()
}

struct Fixture {
    name: &'static str,
    modality: Modality,
    manual: [usize; 4],
    auto: [usize; 4],
    manual_splits: [usize; 3],
    auto_splits: [usize; 3],
    instance_csv: &'static str,
    split_csv: &'static str,
}

const FIXTURES: [Fixture; 2] = [
    Fixture {
        name: "optical",
        modality: Modality::Optical,
        manual: [790, 766, 1288, 1692],
        auto: [7364, 7751, 9115, 44038],
        manual_splits: [3174, 680, 682],
        auto_splits: [47785, 10241, 10242],
        instance_csv: "Classes,Manual Labels,Automated Labels\nT1,790,7364\nT2,766,7751\nT5,1288,9115\nT9,1692,44038\nTotal,4536,68268\n",
        split_csv: "Annotation Method,Training,Validation,Testing,Total\nManual Labels,3174,680,682,4536\nAutomated Labels,47785,10241,10242,68268\n",
    },
    Fixture {
        name: "holographic",
        modality: Modality::Holographic,
        manual: [518, 105, 313, 1501],
        auto: [6786, 7547, 8261, 40424],
        manual_splits: [1704, 366, 367],
        auto_splits: [44110, 9453, 9455],
        instance_csv: "Classes,Manual Labels,Automated Labels\nT1,518,6786\nT2,105,7547\nT5,313,8261\nT9,1501,40424\nTotal,2437,63018\n",
        split_csv: "Annotation Method,Training,Validation,Testing,Total\nManual Labels,1704,366,367,2437\nAutomated Labels,44110,9453,9455,63018\n",
    },
];

fn manifest(f: &Fixture) -> DatasetManifest {
    let names: Vec<String> = ["T1", "T2", "T5", "T9"].map(String::from).to_vec();
    let mut m = DatasetManifest::new(names.clone());
    let b = BBox::normalized(0.5, 0.5, 0.02, 0.02).unwrap();
    for (tag, rows, cols) in [("m", &f.manual, &f.manual_splits), ("a", &f.auto, &f.auto_splits)] {
        for (c, per) in cells(rows, cols).iter().enumerate() {
            for (k, &n) in per.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                let mut rec = ImageRecord::new(format!("{}/{tag}_{}_{}.png", f.name, names[c], k), f.modality);
                rec.species_tag = Some(names[c].clone());
                let ann = if tag == "m" { Annotation::manual(b, c) } else { Annotation::auto(b, Some(c), Some(0.9)) };
                rec.annotations = vec![ann; n];
                m.splits.insert(rec.item_id(), Split::ALL[k]);
                m.records.push(rec);
            }
        }
    }
    m
}

pub fn tables() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for f in &FIXTURES {
        let m = manifest(f);
        m.validate().map_err(|e| e.to_string())?;
        let counts = count_instances(&m);
        let inst = table_instances(&counts).to_csv();
        ensure!(inst == f.instance_csv, "{} instance table:\n{inst}", f.name);
        let split = table_splits(&counts).map_err(|e| e.to_string())?.to_csv();
        ensure!(split == f.split_csv, "{} split table:\n{split}", f.name);

        let path = dir.path().join(format!("{}.json", f.name));
        save_manifest(&m, &path).map_err(|e| e.to_string())?;
        let out = dir.path().join(f.name);
        let code = run([
            "holoalign",
            "report",
            "tables",
            "--manifest",
            path.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        ensure!(code == 0, "report tables exited {code}");
        let cli_inst = std::fs::read_to_string(out.join("instances.csv")).map_err(|e| e.to_string())?;
        let cli_split = std::fs::read_to_string(out.join("splits.csv")).map_err(|e| e.to_string())?;
        ensure!(cli_inst == f.instance_csv && cli_split == f.split_csv, "{} CLI tables differ", f.name);
    }
    Ok("all cells of the four count tables match, library and CLI".into())
}
