use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::json;
use streetlight_core::imaging::list_frame_files;
use streetlight_core::masks::{category_pixel_counts, decode_palette_mask, reduce_classes};
use streetlight_core::{pnm, ClassMap, Frame, RunManifest};

use crate::config::ToolConfig;
use crate::output::write_json;
use crate::Common;

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Directory of palette label images (`.ppm`)
    #[arg(long, value_name = "DIR")]
    pub labels: PathBuf,
    /// Class-map file; falls back to `class_map` in `--config`
    #[arg(long, value_name = "PATH")]
    pub class_map: Option<PathBuf>,
}

pub fn run(args: &IngestArgs, common: &Common) -> Result<()> {
    let cfg = ToolConfig::load(common.config.as_deref())?;
    let Some(out_dir) = &common.out else {
        bail!("ingest needs --out <DIR> for the converted masks");
    };
    let Some(map_path) = args.class_map.clone().or(cfg.class_map.clone()) else {
        bail!("no class map: pass --class-map or set class_map in --config");
    };
    let cmap = ClassMap::load(&map_path)?;
    let files = list_frame_files(&args.labels)?;
    if files.is_empty() {
        eprintln!("warning: no .ppm label images in {}", args.labels.display());
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let mut manifest = RunManifest::new(
        "ingest",
        json!({
            "labels": args.labels,
            "class_map": map_path,
            "strict": common.strict,
            "classes": cmap.num_classes(),
        }),
        None,
    );
    manifest.add_input(&map_path)?;

    let mut reduced_masks = Vec::with_capacity(files.len());
    let mut unknown_total = 0u64;
    for path in &files {
        let frame = Frame::from_raster(pnm::read(path)?, 0.0).map_err(|e| e.in_file(path))?;
        let decoded = decode_palette_mask(&frame, &cmap, common.strict).map_err(|e| e.in_file(path))?;
        if decoded.unknown_pixels > 0 {
            eprintln!(
                "warning: {}: {} pixel(s) with unknown colors mapped to background",
                path.display(),
                decoded.unknown_pixels
            );
            unknown_total += decoded.unknown_pixels;
        }
        let reduced = reduce_classes(&decoded.mask, &cmap).map_err(|e| e.in_file(path))?;
        let stem = path.file_stem().unwrap_or_default().to_string_lossy();
        let target = out_dir.join(format!("{stem}.pgm"));
        reduced.write_pgm(&target)?;
        manifest.add_input(path)?;
        reduced_masks.push(reduced);
    }

    let counts = category_pixel_counts(&reduced_masks);
    let total: u64 = counts.values().sum();
    println!("converted {} mask(s) into {}", files.len(), out_dir.display());
    println!("{:<12} {:>12} {:>10}", "category", "pixels", "fraction");
    for (cat, n) in &counts {
        let frac = if total > 0 { *n as f64 / total as f64 } else { 0.0 };
        println!("{:<12} {:>12} {:>10.6}", cat.name(), n, frac);
    }

    let stats: serde_json::Map<String, serde_json::Value> = counts
        .iter()
        .map(|(c, n)| (c.name().to_owned(), json!(n)))
        .collect();
    write_json(
        &out_dir.join("manifest.json"),
        &json!({
            "manifest": manifest,
            "converted": files.len(),
            "unknown_pixels": unknown_total,
            "pixels_per_category": stats,
        }),
    )
}
