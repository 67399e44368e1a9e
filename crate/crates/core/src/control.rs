//! Per-lamp dimming state machine and energy accounting.
//!
//! Time is integer milliseconds throughout.

use serde::{Deserialize, Serialize};

use crate::daynight::{DayNight, DayNightVerdict, GeoLocation, HysteresisThresholds};
use crate::error::{Error, Result};
use crate::masks::PresenceReport;

pub type Millis = i64;

pub const MS_PER_HOUR: f64 = 3_600_000.0;

/// Upper bound on the vacant-night level.
pub const MAX_DIM_LEVEL: f64 = 0.5;
pub const FULL_LEVEL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

fn default_dim_level() -> f64 {
    0.5
}

fn default_hold_seconds() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LampConfig {
    pub lamp_id: String,
    pub location: GeoLocation,
    pub rated_watts: f64,
    #[serde(default = "default_dim_level")]
    pub dim_level: f64,
    #[serde(default = "default_hold_seconds")]
    pub hold_seconds: f64,
    #[serde(default)]
    pub thresholds: HysteresisThresholds,
    #[serde(default)]
    pub neighbor_radius: f64,
    #[serde(default)]
    pub position: Position,
}

impl LampConfig {
    /// A 100 W lamp at the origin with default dimming and hold.
    pub fn with_id(lamp_id: impl Into<String>) -> Self {
        Self {
            lamp_id: lamp_id.into(),
            location: GeoLocation {
                latitude: 0.0,
                longitude: 0.0,
            },
            rated_watts: 100.0,
            dim_level: default_dim_level(),
            hold_seconds: default_hold_seconds(),
            thresholds: HysteresisThresholds::default(),
            neighbor_radius: 0.0,
            position: Position::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Error::Config(format!("lamp {:?}: {msg}", self.lamp_id));
        if self.lamp_id.is_empty() {
            return Err(Error::Config("lamp_id must not be empty".into()));
        }
        if !(0.0..=MAX_DIM_LEVEL).contains(&self.dim_level) {
            return Err(bad(format!("dim_level {} outside [0, 0.5]", self.dim_level)));
        }
        if !(self.hold_seconds >= 0.0 && self.hold_seconds.is_finite()) {
            return Err(bad(format!("hold_seconds {} must be >= 0", self.hold_seconds)));
        }
        if !(self.rated_watts > 0.0 && self.rated_watts.is_finite()) {
            return Err(bad(format!("rated_watts {} must be > 0", self.rated_watts)));
        }
        if !(self.neighbor_radius >= 0.0 && self.neighbor_radius.is_finite()) {
            return Err(bad(format!("neighbor_radius {} must be >= 0", self.neighbor_radius)));
        }
        if !(self.position.x.is_finite() && self.position.y.is_finite()) {
            return Err(bad("position must be finite".into()));
        }
        self.location.validate().map_err(|e| bad(e.to_string()))?;
        self.thresholds.validate().map_err(|e| bad(e.to_string()))
    }

    pub fn hold_ms(&self) -> Millis {
        (self.hold_seconds * 1000.0).round() as Millis
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LampMode {
    Off,
    Dim,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LampState {
    pub mode: LampMode,
    pub brightness: f64,
    pub last_presence_at: Option<Millis>,
    pub daynight: Option<DayNight>,
    pub last_step_at: Option<Millis>,
}

impl Default for LampState {
    fn default() -> Self {
        Self {
            mode: LampMode::Off,
            brightness: 0.0,
            last_presence_at: None,
            daynight: None,
            last_step_at: None,
        }
    }
}

/// Advances one lamp.
///
/// DAY turns the lamp off regardless of presence. At night, presence (or a
/// presence within the last `hold_seconds`) gives full output; otherwise the
/// lamp dims.
pub fn step(
    state: &LampState,
    cfg: &LampConfig,
    verdict: &DayNightVerdict,
    presence: &PresenceReport,
    now: Millis,
) -> Result<LampState> {
    if let Some(prev) = state.last_step_at {
        if now < prev {
            return Err(Error::invalid(format!(
                "lamp {:?}: time went backwards ({now} ms < {prev} ms)",
                cfg.lamp_id
            )));
        }
    }
    let mut next = LampState {
        daynight: Some(verdict.state),
        last_step_at: Some(now),
        ..*state
    };
    let (mode, brightness) = match verdict.state {
        DayNight::Day => (LampMode::Off, 0.0),
        DayNight::Night if presence.any() => {
            next.last_presence_at = Some(now);
            (LampMode::Full, FULL_LEVEL)
        }
        DayNight::Night => match state.last_presence_at {
            Some(t) if now - t < cfg.hold_ms() => (LampMode::Full, FULL_LEVEL),
            _ => (LampMode::Dim, cfg.dim_level),
        },
    };
    next.mode = mode;
    next.brightness = brightness;
    Ok(next)
}

/// Piecewise-constant brightness: each entry holds until the next one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrightnessTimeline {
    pub lamp_id: String,
    steps: Vec<(Millis, f64)>,
}

impl BrightnessTimeline {
    pub fn new(lamp_id: impl Into<String>) -> Self {
        Self {
            lamp_id: lamp_id.into(),
            steps: Vec::new(),
        }
    }

    /// Builds from explicit step changes, which must be strictly increasing
    /// in time with no repeated level.
    pub fn from_steps(lamp_id: impl Into<String>, steps: Vec<(Millis, f64)>) -> Result<Self> {
        for w in steps.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(format!(
                    "timeline timestamps must strictly increase ({} then {})",
                    w[0].0, w[1].0
                )));
            }
            if w[1].1 == w[0].1 {
                return Err(Error::invalid(format!(
                    "timeline repeats brightness {} at {}",
                    w[1].1, w[1].0
                )));
            }
        }
        Ok(Self {
            lamp_id: lamp_id.into(),
            steps,
        })
    }

    /// Records the level from `t` on. Same-instant updates replace the last
    /// entry; unchanged levels are not stored.
    pub fn record(&mut self, t: Millis, brightness: f64) -> Result<()> {
        if let Some(&(last_t, _)) = self.steps.last() {
            if t < last_t {
                return Err(Error::invalid(format!(
                    "timeline for {:?} cannot go back from {last_t} to {t}",
                    self.lamp_id
                )));
            }
            if t == last_t {
                self.steps.pop();
            }
        }
        if self.steps.last().map(|&(_, b)| b) != Some(brightness) {
            self.steps.push((t, brightness));
        }
        Ok(())
    }

    pub fn steps(&self) -> &[(Millis, f64)] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Level in force at `t` (0 before the first entry).
    pub fn level_at(&self, t: Millis) -> f64 {
        match self.steps.partition_point(|&(s, _)| s <= t) {
            0 => 0.0,
            i => self.steps[i - 1].1,
        }
    }

    /// Integral of brightness over `[start, end)` in brightness-milliseconds.
    fn integral_ms(&self, start: Millis, end: Millis) -> f64 {
        let mut acc = 0.0;
        for (i, &(t, b)) in self.steps.iter().enumerate() {
            let seg_end = self.steps.get(i + 1).map_or(Millis::MAX, |&(n, _)| n);
            let lo = t.max(start);
            let hi = seg_end.min(end);
            if hi > lo {
                acc += b * (hi - lo) as f64;
            }
        }
        acc
    }
}

/// Exact energy of the timeline from its first entry to `horizon_end`.
pub fn energy_wh(timeline: &BrightnessTimeline, rated_watts: f64, horizon_end: Millis) -> Result<f64> {
    let (first, last) = match (timeline.steps.first(), timeline.steps.last()) {
        (Some(f), Some(l)) => (f.0, l.0),
        _ => return Err(Error::invalid("energy of an empty timeline")),
    };
    if timeline.steps.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::invalid("timeline is not sorted"));
    }
    if horizon_end < last {
        return Err(Error::invalid(format!(
            "horizon {horizon_end} ends before the last step at {last}"
        )));
    }
    Ok(timeline.integral_ms(first, horizon_end) * rated_watts / MS_PER_HOUR)
}

/// Half-open interval `[start, end)` in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: Millis,
    pub end: Millis,
}

impl Interval {
    pub fn new(start: Millis, end: Millis) -> Self {
        Self { start, end }
    }

    pub fn duration(&self) -> Millis {
        self.end - self.start
    }
}

pub(crate) fn check_intervals(intervals: &[Interval]) -> Result<()> {
    for iv in intervals {
        if iv.end < iv.start {
            return Err(Error::invalid(format!(
                "interval [{}, {}) ends before it starts",
                iv.start, iv.end
            )));
        }
    }
    for w in intervals.windows(2) {
        if w[1].start < w[0].end {
            return Err(Error::invalid(format!(
                "intervals must be sorted and disjoint; [{}, {}) overlaps [{}, {})",
                w[0].start, w[0].end, w[1].start, w[1].end
            )));
        }
    }
    Ok(())
}

/// Energy of the timeline restricted to `intervals`, in watt-hours.
pub fn energy_within(
    timeline: &BrightnessTimeline,
    rated_watts: f64,
    intervals: &[Interval],
) -> Result<f64> {
    check_intervals(intervals)?;
    let ms: f64 = intervals
        .iter()
        .map(|iv| timeline.integral_ms(iv.start, iv.end))
        .sum();
    Ok(ms * rated_watts / MS_PER_HOUR)
}

/// Energy of the conventional policy: full output through every interval.
pub fn baseline_wh(rated_watts: f64, intervals: &[Interval]) -> Result<f64> {
    check_intervals(intervals)?;
    let ms: Millis = intervals.iter().map(Interval::duration).sum();
    Ok(FULL_LEVEL * rated_watts * ms as f64 / MS_PER_HOUR)
}

/// `1 - controlled / baseline`, both measured over `night_intervals`.
pub fn savings_vs_baseline(
    timeline: &BrightnessTimeline,
    cfg: &LampConfig,
    night_intervals: &[Interval],
) -> Result<f64> {
    let baseline = baseline_wh(cfg.rated_watts, night_intervals)?;
    if baseline == 0.0 {
        return Err(Error::UndefinedSavings);
    }
    let controlled = energy_within(timeline, cfg.rated_watts, night_intervals)?;
    Ok(1.0 - controlled / baseline)
}
