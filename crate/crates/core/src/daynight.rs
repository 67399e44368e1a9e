//! Day/night decision: hysteresis on vision brightness, solar elevation from
//! geo-location, and a safety-biased fusion of the available sources.

use std::f64::consts::PI;
use std::fmt;

use chrono::{DateTime, Datelike, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::BrightnessEstimate;

/// Elevation band (degrees, either side of the horizon) where the solar
/// verdict abstains.
pub const SOLAR_TWILIGHT_BAND_DEG: f64 = 3.0;

/// Standard sunrise/sunset elevation: refraction plus solar semi-diameter.
pub const SUNRISE_ELEVATION_DEG: f64 = -0.833;

const TROPICAL_YEAR_DAYS: f64 = 365.2422;
const J2000_UNIX_MS: i64 = 946_728_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DayNight {
    Day,
    Night,
}

impl fmt::Display for DayNight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DayNight::Day => "DAY",
            DayNight::Night => "NIGHT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SolarVerdict {
    Day,
    Night,
    Uncertain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Vision,
    Solar,
    Ambient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoLocation {
    pub latitude: f64,
    pub longitude: f64,
}

impl GeoLocation {
    pub fn new(latitude: f64, longitude: f64) -> Result<Self> {
        let loc = Self {
            latitude,
            longitude,
        };
        loc.validate()?;
        Ok(loc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude) {
            return Err(Error::invalid(format!(
                "latitude {} outside [-90, 90]",
                self.latitude
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude) {
            return Err(Error::invalid(format!(
                "longitude {} outside [-180, 180]",
                self.longitude
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HysteresisThresholds {
    pub theta_day: f64,
    pub theta_night: f64,
}

impl Default for HysteresisThresholds {
    fn default() -> Self {
        Self {
            theta_day: 0.45,
            theta_night: 0.35,
        }
    }
}

impl HysteresisThresholds {
    pub fn new(theta_day: f64, theta_night: f64) -> Result<Self> {
        let th = Self {
            theta_day,
            theta_night,
        };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.theta_night && self.theta_night < self.theta_day && self.theta_day <= 1.0)
        {
            return Err(Error::invalid(format!(
                "thresholds need 0 <= theta_night < theta_day <= 1, got night={} day={}",
                self.theta_night, self.theta_day
            )));
        }
        Ok(())
    }
}

/// Two-threshold classification. Inside the band the previous state holds;
/// with no previous state the lamp errs lit.
pub fn classify_brightness(
    b: BrightnessEstimate,
    th: &HysteresisThresholds,
    prev: Option<DayNight>,
) -> DayNight {
    let v = b.value();
    if v >= th.theta_day {
        DayNight::Day
    } else if v <= th.theta_night {
        DayNight::Night
    } else {
        prev.unwrap_or(DayNight::Night)
    }
}

/// Geometric solar elevation in degrees (no refraction term).
///
/// Uses the low-precision fractional-year series for equation of time and
/// declination, then true solar time, hour angle and the zenith cosine.
/// Agrees with the full Julian-century calculation to well under 0.5 degrees
/// for 1900 through 2100.
pub fn solar_elevation(loc: &GeoLocation, utc: DateTime<Utc>) -> Result<f64> {
    loc.validate()?;
    if !(1900..=2100).contains(&utc.year()) {
        return Err(Error::invalid(format!(
            "year {} outside supported range 1900..=2100",
            utc.year()
        )));
    }
    let minutes = f64::from(utc.hour()) * 60.0
        + f64::from(utc.minute())
        + (f64::from(utc.second()) + f64::from(utc.nanosecond()) / 1e9) / 60.0;
    // Fractional year measured in mean tropical years from 2000-01-01 12:00 UTC.
    // A calendar-year fraction drifts by up to a day over the leap cycle,
    // which costs about half a degree of declination near the equinoxes.
    let days = (utc.timestamp_millis() - J2000_UNIX_MS) as f64 / 86_400_000.0;
    let gamma = 2.0 * PI * (days / TROPICAL_YEAR_DAYS).rem_euclid(1.0);

    let eqtime_min = 229.18
        * (0.000075 + 0.001868 * gamma.cos()
            - 0.032077 * gamma.sin()
            - 0.014615 * (2.0 * gamma).cos()
            - 0.040849 * (2.0 * gamma).sin());
    let decl = 0.006918 - 0.399912 * gamma.cos() + 0.070257 * gamma.sin()
        - 0.006758 * (2.0 * gamma).cos()
        + 0.000907 * (2.0 * gamma).sin()
        - 0.002697 * (3.0 * gamma).cos()
        + 0.00148 * (3.0 * gamma).sin();

    let true_solar_min = minutes + eqtime_min + 4.0 * loc.longitude;
    let hour_angle = (true_solar_min / 4.0 - 180.0).to_radians();
    let lat = loc.latitude.to_radians();
    let cos_zenith = (lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos())
        .clamp(-1.0, 1.0);
    Ok(90.0 - cos_zenith.acos().to_degrees())
}

pub fn solar_verdict(elevation_deg: f64) -> SolarVerdict {
    if elevation_deg > SOLAR_TWILIGHT_BAND_DEG {
        SolarVerdict::Day
    } else if elevation_deg < -SOLAR_TWILIGHT_BAND_DEG {
        SolarVerdict::Night
    } else {
        SolarVerdict::Uncertain
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayNightVerdict {
    pub state: DayNight,
    /// Sources that voted (an uncertain solar reading abstains).
    pub sources: Vec<Source>,
    pub confidence: f64,
}

/// DAY only when every voting source says DAY; any NIGHT vote wins.
pub fn fuse(vision: DayNight, solar: Option<SolarVerdict>, ambient: Option<DayNight>) -> DayNightVerdict {
    let mut votes = vec![(Source::Vision, vision)];
    match solar {
        Some(SolarVerdict::Day) => votes.push((Source::Solar, DayNight::Day)),
        Some(SolarVerdict::Night) => votes.push((Source::Solar, DayNight::Night)),
        Some(SolarVerdict::Uncertain) | None => {}
    }
    if let Some(a) = ambient {
        votes.push((Source::Ambient, a));
    }
    let state = if votes.iter().any(|&(_, v)| v == DayNight::Night) {
        DayNight::Night
    } else {
        DayNight::Day
    };
    let agreeing = votes.iter().filter(|&&(_, v)| v == state).count();
    DayNightVerdict {
        state,
        confidence: agreeing as f64 / votes.len() as f64,
        sources: votes.into_iter().map(|(s, _)| s).collect(),
    }
}
