use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;
use serde_json::json;
use streetlight_core::imaging::{estimate_brightness, load_frame_dir};
use streetlight_core::{HysteresisThresholds, RunManifest};

use crate::config::{ToolConfig, DEFAULT_CALIBRATION_BAND};
use crate::output::write_json;
use crate::Common;

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Folder of daytime frames (`.ppm`)
    #[arg(long, value_name = "DIR")]
    pub day: PathBuf,
    /// Folder of night-time frames (`.ppm`)
    #[arg(long, value_name = "DIR")]
    pub night: PathBuf,
    /// Half-width of the hysteresis band around the fitted threshold
    #[arg(long, value_name = "WIDTH")]
    pub band: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub threshold: f64,
    pub errors: usize,
    pub accuracy: f64,
}

/// Exhaustive search for the threshold `t` minimizing misclassifications
/// under "brightness >= t means day". Candidates are the lowest observed
/// value, midpoints between neighbouring distinct values, and a point above
/// the highest. Ties go to the widest margin, then the lowest threshold.
pub fn fit_threshold(day: &[f64], night: &[f64]) -> Fit {
    let mut labelled: Vec<(f64, bool)> = day
        .iter()
        .map(|&b| (b, true))
        .chain(night.iter().map(|&b| (b, false)))
        .collect();
    labelled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = labelled.len();

    let mut values: Vec<f64> = labelled.iter().map(|l| l.0).collect();
    values.dedup();
    let mut candidates = vec![(values[0], 0.0)];
    for w in values.windows(2) {
        candidates.push(((w[0] + w[1]) / 2.0, (w[1] - w[0]) / 2.0));
    }
    let last = *values.last().expect("non-empty");
    candidates.push(((last + 1.0) / 2.0, (1.0 - last) / 2.0));

    let mut best: Option<(usize, f64, f64)> = None;
    for (t, margin) in candidates {
        // day images below t and night images at or above t
        let errors = labelled
            .iter()
            .filter(|&&(b, is_day)| (b >= t) != is_day)
            .count();
        let better = match best {
            None => true,
            Some((e, m, _)) => errors < e || (errors == e && margin > m),
        };
        if better {
            best = Some((errors, margin, t));
        }
    }
    let (errors, _, threshold) = best.expect("at least one candidate");
    Fit {
        threshold,
        errors,
        accuracy: (n - errors) as f64 / n as f64,
    }
}

pub fn band_around(threshold: f64, band: f64) -> Result<HysteresisThresholds> {
    if !(band > 0.0 && band < 0.5) {
        bail!("band {band} must lie in (0, 0.5)");
    }
    let th = HysteresisThresholds {
        theta_day: (threshold + band).clamp(0.0, 1.0),
        theta_night: (threshold - band).clamp(0.0, 1.0),
    };
    th.validate()?;
    Ok(th)
}

fn brightness_of(dir: &Path, radius: usize) -> Result<Vec<f64>> {
    let frames = load_frame_dir(dir, 1.0)?;
    if frames.is_empty() {
        bail!("no .ppm frames in {}", dir.display());
    }
    frames
        .iter()
        .map(|f| {
            estimate_brightness(&f.frame, radius)
                .map(|b| b.value())
                .map_err(|e| e.in_file(&f.path).into())
        })
        .collect()
}

pub fn run(args: &CalibrateArgs, common: &Common) -> Result<()> {
    let cfg = ToolConfig::load(common.config.as_deref())?;
    let band = args.band.or(cfg.calibration_band).unwrap_or(DEFAULT_CALIBRATION_BAND);
    let radius = cfg.denoise_radius();
    let day = brightness_of(&args.day, radius)?;
    let night = brightness_of(&args.night, radius)?;
    let fit = fit_threshold(&day, &night);
    let thresholds = band_around(fit.threshold, band)?;

    if fit.errors > 0 {
        eprintln!(
            "warning: day and night brightness overlap; the best threshold misclassifies {} of {} frames",
            fit.errors,
            day.len() + night.len()
        );
    }
    println!(
        "threshold={:.6} theta_day={:.6} theta_night={:.6} accuracy={:.6} (day={} night={})",
        fit.threshold,
        thresholds.theta_day,
        thresholds.theta_night,
        fit.accuracy,
        day.len(),
        night.len()
    );

    if let Some(out) = &common.out {
        let mut manifest = RunManifest::new(
            "calibrate",
            json!({ "band": band, "denoise_radius": radius }),
            None,
        );
        manifest.add_input(&args.day)?;
        manifest.add_input(&args.night)?;
        write_json(
            out,
            &json!({
                "manifest": manifest,
                "fit": fit,
                "thresholds": thresholds,
                "frames": { "day": day.len(), "night": night.len() },
            }),
        )?;
    }
    Ok(())
}
