use std::path::PathBuf;

use anyhow::Result;
use chrono::{DateTime, Utc};
use clap::{ArgGroup, Args};
use serde_json::json;
use streetlight_core::daynight::{classify_brightness, fuse, solar_elevation, solar_verdict};
use streetlight_core::imaging::estimate_brightness;
use streetlight_core::{pnm, Frame, GeoLocation, RunManifest};

use crate::config::ToolConfig;
use crate::output::write_json;
use crate::Common;

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["image", "lat"])))]
pub struct DaynightArgs {
    /// RGB frame (`.ppm`) to judge by its brightness
    #[arg(long, value_name = "PATH", conflicts_with_all = ["lat", "lon", "utc"])]
    pub image: Option<PathBuf>,
    /// Latitude in degrees, north positive
    #[arg(long, allow_hyphen_values = true, requires_all = ["lon", "utc"])]
    pub lat: Option<f64>,
    /// Longitude in degrees, east positive
    #[arg(long, allow_hyphen_values = true, requires_all = ["lat", "utc"])]
    pub lon: Option<f64>,
    /// UTC instant, RFC 3339 (e.g. 2024-03-20T12:07:00Z)
    #[arg(long, requires_all = ["lat", "lon"])]
    pub utc: Option<DateTime<Utc>>,
}

pub fn run(args: &DaynightArgs, common: &Common) -> Result<()> {
    let cfg = ToolConfig::load(common.config.as_deref())?;
    let (line, record, input) = match (&args.image, args.lat, args.lon, args.utc) {
        (Some(path), ..) => {
            let frame = Frame::from_raster(pnm::read(path)?, 0.0).map_err(|e| e.in_file(path))?;
            let brightness = estimate_brightness(&frame, cfg.denoise_radius())?;
            let vision = classify_brightness(brightness, &cfg.thresholds(), None);
            let verdict = fuse(vision, None, None);
            (
                format!(
                    "{} brightness={:.6} sources=vision confidence={:.6}",
                    verdict.state,
                    brightness.value(),
                    verdict.confidence
                ),
                json!({
                    "image": path,
                    "brightness": brightness,
                    "thresholds": cfg.thresholds(),
                    "verdict": verdict,
                }),
                Some(path.clone()),
            )
        }
        (None, Some(lat), Some(lon), Some(utc)) => {
            let loc = GeoLocation::new(lat, lon)?;
            let elevation = solar_elevation(&loc, utc)?;
            let verdict = solar_verdict(elevation);
            let state = serde_json::to_value(verdict)?;
            (
                format!(
                    "{} elevation={elevation:.3} sources=solar",
                    state.as_str().unwrap_or_default()
                ),
                json!({
                    "location": loc,
                    "utc": utc,
                    "elevation_deg": elevation,
                    "verdict": verdict,
                }),
                None,
            )
        }
        _ => unreachable!("clap enforces exactly one input mode"),
    };
    println!("{line}");
    if let Some(out) = &common.out {
        let mut manifest = RunManifest::new("daynight", json!({ "denoise_radius": cfg.denoise_radius() }), None);
        if let Some(p) = &input {
            manifest.add_input(p)?;
        }
        write_json(out, &json!({ "manifest": manifest, "result": record }))?;
    }
    Ok(())
}
