use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;
use serde_json::json;
use streetlight_core::detectors::{
    Detector, DirMaskStore, FileDetector, PerturbedDetector, REDUCED_CLASSES,
};
use streetlight_core::masks::list_mask_files;
use streetlight_core::metrics::{accumulate, confusion};
use streetlight_core::{
    Category, ConfusionMatrix, MetricsReport, PerturbationParams, RunManifest, SegMask,
};

use crate::output::{csv_sibling, write_json, write_text};
use crate::Common;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of predicted 3-class masks (`<id>.pgm`)
    #[arg(long, value_name = "DIR", required_unless_present = "perturb", conflicts_with = "perturb")]
    pub pred: Option<PathBuf>,
    /// Directory of ground-truth 3-class masks (`<id>.pgm`)
    #[arg(long, value_name = "DIR")]
    pub truth: PathBuf,
    /// Score ground truth degraded by i.i.d. label flips at this rate
    /// instead of reading predictions
    #[arg(long, value_name = "RATE")]
    pub perturb: Option<f64>,
}

#[derive(Serialize)]
struct ImageRow {
    id: String,
    report: MetricsReport,
}

#[derive(Serialize)]
struct EvaluationReport {
    manifest: RunManifest,
    dataset: MetricsReport,
    images: Vec<ImageRow>,
}

fn ids(dir: &Path) -> Result<BTreeSet<String>> {
    Ok(list_mask_files(dir)?
        .iter()
        .map(|p| p.file_stem().unwrap_or_default().to_string_lossy().into_owned())
        .collect())
}

pub fn run(args: &EvaluateArgs, common: &Common) -> Result<()> {
    let truth_ids = ids(&args.truth)?;
    let detector: Box<dyn Detector> = match (&args.pred, args.perturb) {
        (Some(pred), _) => {
            let pred_ids = ids(pred)?;
            let only_pred: Vec<_> = pred_ids.difference(&truth_ids).collect();
            let only_truth: Vec<_> = truth_ids.difference(&pred_ids).collect();
            if !only_pred.is_empty() || !only_truth.is_empty() {
                for id in &only_truth {
                    eprintln!("missing prediction: {}", pred.join(format!("{id}.pgm")).display());
                }
                for id in &only_pred {
                    eprintln!("missing ground truth: {}", args.truth.join(format!("{id}.pgm")).display());
                }
                bail!(
                    "{} unpaired mask(s) between {} and {}",
                    only_pred.len() + only_truth.len(),
                    pred.display(),
                    args.truth.display()
                );
            }
            Box::new(FileDetector::new(pred))
        }
        (None, Some(rate)) => {
            let params = PerturbationParams::new(rate, common.seed.unwrap_or(0))?;
            Box::new(PerturbedDetector::new(DirMaskStore::new(&args.truth), params))
        }
        (None, None) => bail!("give --pred <DIR> or --perturb <RATE>"),
    };
    if truth_ids.is_empty() {
        eprintln!("warning: no .pgm masks in {}", args.truth.display());
    }

    let names: Vec<String> = Category::ALL.iter().map(|c| c.name().to_owned()).collect();
    let mut total = ConfusionMatrix::zeros(REDUCED_CLASSES);
    let mut images = Vec::with_capacity(truth_ids.len());
    for id in &truth_ids {
        let truth_path = args.truth.join(format!("{id}.pgm"));
        let truth = SegMask::read_pgm(&truth_path, REDUCED_CLASSES)?;
        let pred = detector.detect(id)?.mask;
        let cm = confusion(&pred, &truth).map_err(|e| e.in_file(&truth_path))?;
        total = accumulate(&total, &cm)?;
        images.push(ImageRow {
            id: id.clone(),
            report: MetricsReport::from_confusion(&cm, &names, None)?,
        });
    }
    let dataset = MetricsReport::from_confusion(&total, &names, None)?;

    let fmt = |v: Option<f64>| v.map_or_else(|| "undefined".to_owned(), |x| format!("{x:.6}"));
    println!(
        "images {}  mean_iou {}  mean_f1 {}  pixel_accuracy {}",
        images.len(),
        fmt(dataset.mean_iou),
        fmt(dataset.mean_f1),
        fmt(dataset.pixel_accuracy)
    );
    for c in &dataset.per_class {
        println!("  {:<11} iou {}  f1 {}", c.class, fmt(c.iou), fmt(c.f1));
    }

    if let Some(out) = &common.out {
        let mut manifest = RunManifest::new(
            "evaluate",
            json!({
                "pred": args.pred,
                "truth": args.truth,
                "perturb": args.perturb,
                "classes": names,
            }),
            args.perturb.map(|_| common.seed.unwrap_or(0)),
        );
        if let Some(pred) = &args.pred {
            manifest.add_input(pred)?;
        }
        manifest.add_input(&args.truth)?;

        let mut csv = dataset.csv_header("image");
        csv.push('\n');
        for row in &images {
            csv.push_str(&row.report.csv_row(&row.id));
            csv.push('\n');
        }
        csv.push_str(&dataset.csv_row("ALL"));
        csv.push('\n');
        write_text(&csv_sibling(out), &csv)?;
        write_json(out, &EvaluationReport { manifest, dataset, images })?;
    }
    Ok(())
}
