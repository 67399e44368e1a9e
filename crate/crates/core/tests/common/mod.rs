#![allow(dead_code)]

use std::collections::BTreeSet;

use chrono::{DateTime, Timelike, Utc};
use streetlight_core::{SegMask, SplitMix64};

pub fn random_mask(width: usize, height: usize, k: usize, rng: &mut SplitMix64) -> SegMask {
    let labels = (0..width * height).map(|_| rng.below(k as u64) as u8).collect();
    SegMask::new(width, height, labels, k).unwrap()
}

/// Per-class metrics by direct set counting over pixel indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetCounts {
    pub iou: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

pub fn brute_force(pred: &SegMask, truth: &SegMask, class: u8) -> SetCounts {
    let a: BTreeSet<usize> = (0..truth.len()).filter(|&i| truth.labels()[i] == class).collect();
    let b: BTreeSet<usize> = (0..pred.len()).filter(|&i| pred.labels()[i] == class).collect();
    let inter = a.intersection(&b).count();
    let union = a.union(&b).count();
    let div = |n: usize, d: usize| (d > 0).then(|| n as f64 / d as f64);
    SetCounts {
        iou: div(inter, union),
        precision: div(inter, b.len()),
        recall: div(inter, a.len()),
        f1: div(2 * inter, a.len() + b.len()),
    }
}

/// Full NOAA spreadsheet solar position (Julian-century series), geometric
/// elevation in degrees. Independent of the crate's fractional-year series.
pub struct Worksheet {
    pub elevation: f64,
    pub declination: f64,
    pub eq_time_min: f64,
}

pub fn worksheet(lat: f64, lon: f64, t: DateTime<Utc>) -> Worksheet {
    let jd = t.timestamp() as f64 / 86400.0 + t.timestamp_subsec_nanos() as f64 / 86400e9 + 2440587.5;
    let jc = (jd - 2451545.0) / 36525.0;
    let l0 = (280.46646 + jc * (36000.76983 + jc * 0.0003032)).rem_euclid(360.0);
    let m = 357.52911 + jc * (35999.05029 - 0.0001537 * jc);
    let e = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
    let r = f64::to_radians;
    let c = r(m).sin() * (1.914602 - jc * (0.004817 + 0.000014 * jc))
        + r(2.0 * m).sin() * (0.019993 - 0.000101 * jc)
        + r(3.0 * m).sin() * 0.000289;
    let true_long = l0 + c;
    let app_long = true_long - 0.00569 - 0.00478 * r(125.04 - 1934.136 * jc).sin();
    let mean_obliq =
        23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
    let obliq = mean_obliq + 0.00256 * r(125.04 - 1934.136 * jc).cos();
    let decl = (r(obliq).sin() * r(app_long).sin()).asin().to_degrees();
    let y = r(obliq / 2.0).tan().powi(2);
    let eqt = 4.0
        * (y * r(2.0 * l0).sin() - 2.0 * e * r(m).sin()
            + 4.0 * e * y * r(m).sin() * r(2.0 * l0).cos()
            - 0.5 * y * y * r(4.0 * l0).sin()
            - 1.25 * e * e * r(2.0 * m).sin())
        .to_degrees();
    let minutes = t.hour() as f64 * 60.0 + t.minute() as f64 + t.second() as f64 / 60.0;
    let tst = (minutes + eqt + 4.0 * lon).rem_euclid(1440.0);
    let ha = if tst / 4.0 < 0.0 { tst / 4.0 + 180.0 } else { tst / 4.0 - 180.0 };
    let cz = r(lat).sin() * r(decl).sin() + r(lat).cos() * r(decl).cos() * r(ha).cos();
    Worksheet {
        elevation: 90.0 - cz.clamp(-1.0, 1.0).acos().to_degrees(),
        declination: decl,
        eq_time_min: eqt,
    }
}

/// Spreadsheet sunrise (minutes after UTC midnight) for the given date,
/// refined by re-evaluating the series at the previous estimate.
pub fn worksheet_sunrise_min(lat: f64, lon: f64, midnight: DateTime<Utc>) -> f64 {
    let r = f64::to_radians;
    let mut at = midnight + chrono::Duration::hours(6);
    let mut sunrise = 0.0;
    for _ in 0..4 {
        let ws = worksheet(lat, lon, at);
        let ha = (r(90.833).cos() / (r(lat).cos() * r(ws.declination).cos())
            - r(lat).tan() * r(ws.declination).tan())
        .acos()
        .to_degrees();
        let noon = 720.0 - 4.0 * lon - ws.eq_time_min;
        sunrise = noon - 4.0 * ha;
        at = midnight + chrono::Duration::milliseconds((sunrise * 60_000.0) as i64);
    }
    sunrise
}
