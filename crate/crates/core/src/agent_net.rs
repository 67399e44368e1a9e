//! Discrete-event simulation of a cooperating lamp network.
//!
//! Protocol:
//! - A lamp that detects presence goes full and sends `PRESENCE` to each
//!   direct neighbor. A neighbor treats delivery as local presence
//!   (pre-brightening) and never forwards it.
//! - Every `gossip_period_s` each lamp broadcasts its locally fused
//!   day/night verdict. A lamp acts on the majority of its own verdict and
//!   the last verdict received from each neighbor; ties keep its own.
//! - Each message is dropped with `drop_probability`, decided by one
//!   [`SplitMix64`] draw at send time. Neighbors are visited in lamp-id order.
//!
//! Events run in `(time_ms, lamp_id, sequence)` order. Lamps are indexed in
//! lamp-id order, so the index doubles as the tiebreak.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::control::{
    self, BrightnessTimeline, Interval, LampConfig, LampState, Millis,
};
use crate::daynight::{
    self, classify_brightness, fuse, solar_verdict, DayNight, DayNightVerdict,
};
use crate::error::{Error, Result};
use crate::imaging::{self, BrightnessEstimate, Frame};
use crate::masks::{self, PresenceReport, SegMask, DEFAULT_MIN_AREA_FRACTION};
use crate::pnm;
use crate::rng::SplitMix64;

/// Radius graph over lamps, sorted by lamp id.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    lamps: Vec<LampConfig>,
    /// `(i, j)` with `i < j`.
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Topology {
    pub fn lamps(&self) -> &[LampConfig] {
        &self.lamps
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn index_of(&self, lamp_id: &str) -> Option<usize> {
        self.lamps
            .binary_search_by(|l| l.lamp_id.as_str().cmp(lamp_id))
            .ok()
    }

    pub fn len(&self) -> usize {
        self.lamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lamps.is_empty()
    }
}

/// Connects lamps `i` and `j` when their distance is within the larger of
/// the two neighbor radii.
pub fn build_topology(lamps: &[LampConfig]) -> Result<Topology> {
    let mut lamps = lamps.to_vec();
    for l in &lamps {
        l.validate()?;
    }
    lamps.sort_by(|a, b| a.lamp_id.cmp(&b.lamp_id));
    if let Some(w) = lamps.windows(2).find(|w| w[0].lamp_id == w[1].lamp_id) {
        return Err(Error::Config(format!("duplicate lamp_id {:?}", w[0].lamp_id)));
    }
    let n = lamps.len();
    let mut edges = Vec::new();
    let mut neighbors = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let reach = lamps[i].neighbor_radius.max(lamps[j].neighbor_radius);
            if lamps[i].position.distance(&lamps[j].position) <= reach {
                edges.push((i, j));
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    Ok(Topology {
        lamps,
        edges,
        neighbors,
    })
}

/// One synchronous gossip round: every lamp takes the majority over itself
/// and its neighbors, keeping its own verdict on a tie.
pub fn gossip_round(verdicts: &[DayNight], topo: &Topology) -> Result<Vec<DayNight>> {
    if verdicts.len() != topo.len() {
        return Err(Error::invalid(format!(
            "{} verdicts for {} lamps",
            verdicts.len(),
            topo.len()
        )));
    }
    Ok((0..topo.len())
        .map(|i| majority(verdicts[i], topo.neighbors(i).iter().map(|&j| verdicts[j])))
        .collect())
}

fn majority(own: DayNight, others: impl IntoIterator<Item = DayNight>) -> DayNight {
    let (mut day, mut night) = (0usize, 0usize);
    for v in std::iter::once(own).chain(others) {
        match v {
            DayNight::Day => day += 1,
            DayNight::Night => night += 1,
        }
    }
    match day.cmp(&night) {
        std::cmp::Ordering::Greater => DayNight::Day,
        std::cmp::Ordering::Less => DayNight::Night,
        std::cmp::Ordering::Equal => own,
    }
}

fn default_gossip_period() -> f64 {
    60.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    #[serde(default)]
    pub latency_ms: u64,
    #[serde(default)]
    pub drop_probability: f64,
    /// Zero disables gossip.
    #[serde(default = "default_gossip_period")]
    pub gossip_period_s: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for NetParams {
    fn default() -> Self {
        Self {
            latency_ms: 0,
            drop_probability: 0.0,
            gossip_period_s: default_gossip_period(),
            seed: 0,
        }
    }
}

impl NetParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(Error::Config(format!(
                "drop_probability {} outside [0, 1]",
                self.drop_probability
            )));
        }
        if !(self.gossip_period_s >= 0.0 && self.gossip_period_s.is_finite()) {
            return Err(Error::Config(format!(
                "gossip_period_s {} must be >= 0",
                self.gossip_period_s
            )));
        }
        Ok(())
    }

    fn gossip_period_ms(&self) -> Millis {
        (self.gossip_period_s * 1000.0).round() as Millis
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clock {
    /// Wall-clock instant of simulated time 0.
    pub epoch_utc: DateTime<Utc>,
    pub start_ms: Millis,
    pub end_ms: Millis,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionPayload {
    /// Inline detector verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presence: Option<PresenceReport>,
    /// Inline vision brightness estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brightness: Option<f64>,
    /// RGB frame (`P6`), relative to the scenario file; yields brightness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<PathBuf>,
    /// Reduced class-index mask (`P5`), relative to the scenario file;
    /// yields presence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientPayload {
    pub state: DayNight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
pub enum EventBody {
    Detection(DetectionPayload),
    Ambient(AmbientPayload),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEvent {
    pub time_ms: Millis,
    pub lamp_id: String,
    #[serde(flatten)]
    pub body: EventBody,
}

fn default_true() -> bool {
    true
}

fn default_min_area() -> f64 {
    DEFAULT_MIN_AREA_FRACTION
}

fn default_denoise_radius() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub lamps: Vec<LampConfig>,
    #[serde(default)]
    pub net: NetParams,
    pub clock: Clock,
    /// Whether lamps consult their solar elevation.
    #[serde(default = "default_true")]
    pub use_solar: bool,
    #[serde(default = "default_min_area")]
    pub min_area_fraction: f64,
    #[serde(default = "default_denoise_radius")]
    pub denoise_radius: usize,
    pub events: Vec<ScenarioEvent>,
    /// Directory that relative frame and mask paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Scenario(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let mut scenario = Self::from_json(&text).map_err(|e| e.in_file(path))?;
        scenario.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(scenario)
    }

    /// The same scenario with only one lamp and its own events.
    pub fn isolate(&self, lamp_id: &str) -> Result<Self> {
        let lamp = self
            .lamps
            .iter()
            .find(|l| l.lamp_id == lamp_id)
            .ok_or_else(|| Error::NotFound(format!("lamp {lamp_id:?}")))?;
        Ok(Self {
            lamps: vec![lamp.clone()],
            events: self
                .events
                .iter()
                .filter(|e| e.lamp_id == lamp_id)
                .cloned()
                .collect(),
            ..self.clone()
        })
    }

    fn validate(&self, topo: &Topology) -> Result<()> {
        if self.clock.end_ms < self.clock.start_ms {
            return Err(Error::Scenario(format!(
                "clock ends ({}) before it starts ({})",
                self.clock.end_ms, self.clock.start_ms
            )));
        }
        if !(0.0..=1.0).contains(&self.min_area_fraction) {
            return Err(Error::Scenario(format!(
                "min_area_fraction {} outside [0, 1]",
                self.min_area_fraction
            )));
        }
        let mut prev = self.clock.start_ms;
        for (i, ev) in self.events.iter().enumerate() {
            let ctx = |msg: String| {
                Error::Scenario(format!(
                    "event #{i} (time_ms {}, lamp {:?}): {msg}",
                    ev.time_ms, ev.lamp_id
                ))
            };
            if ev.time_ms < prev {
                return Err(ctx(format!("non-monotone event time; previous event at {prev}")));
            }
            if ev.time_ms > self.clock.end_ms {
                return Err(ctx(format!("after clock end {}", self.clock.end_ms)));
            }
            if topo.index_of(&ev.lamp_id).is_none() {
                return Err(ctx("unknown lamp".into()));
            }
            if let EventBody::Detection(d) = &ev.body {
                if d.presence.is_some() && d.mask.is_some() {
                    return Err(ctx("give either inline presence or a mask, not both".into()));
                }
                if d.brightness.is_some() && d.frame.is_some() {
                    return Err(ctx("give either inline brightness or a frame, not both".into()));
                }
                if let Some(b) = d.brightness {
                    BrightnessEstimate::new(b).map_err(|e| ctx(e.to_string()))?;
                }
            }
            prev = ev.time_ms;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MessageKind {
    Presence,
    DaynightGossip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MessagePayload {
    Presence(PresenceReport),
    DayNight { state: DayNight, sender_time_ms: Millis },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetMessage {
    pub kind: MessageKind,
    pub from: String,
    pub to: String,
    pub payload: MessagePayload,
    pub send_time_ms: Millis,
    pub deliver_time_ms: Millis,
    pub dropped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LampReport {
    pub lamp_id: String,
    /// `(time_ms, brightness)` step changes.
    pub timeline: Vec<(Millis, f64)>,
    /// `(time_ms, verdict)` changes in the verdict the lamp acted on.
    pub verdicts: Vec<(Millis, DayNight)>,
    pub night_intervals: Vec<Interval>,
    pub energy_wh: f64,
    pub baseline_wh: f64,
    /// `null` when the lamp saw no night.
    pub savings: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetSummary {
    pub energy_wh: f64,
    pub baseline_wh: f64,
    pub savings: Option<f64>,
    pub messages_sent: u64,
    pub messages_dropped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub seed: u64,
    pub net: NetParams,
    pub start_ms: Millis,
    pub end_ms: Millis,
    pub lamps: Vec<LampReport>,
    pub fleet: FleetSummary,
    pub messages: Vec<NetMessage>,
}

impl SimReport {
    /// `lamp_id,timestamp,brightness` rows, timestamps in milliseconds.
    pub fn timeline_csv(&self) -> String {
        let mut out = String::from("lamp_id,timestamp,brightness\n");
        for lamp in &self.lamps {
            for (t, b) in &lamp.timeline {
                let _ = writeln!(out, "{},{t},{b}", lamp.lamp_id);
            }
        }
        out
    }

    pub fn lamp(&self, lamp_id: &str) -> Option<&LampReport> {
        self.lamps.iter().find(|l| l.lamp_id == lamp_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum SimEvent {
    Scenario(usize),
    Deliver(usize),
    GossipTick,
    HoldExpiry,
}

struct Agent {
    cfg: LampConfig,
    state: LampState,
    vision: Option<DayNight>,
    ambient: Option<DayNight>,
    heard: BTreeMap<usize, DayNight>,
    timeline: BrightnessTimeline,
    verdicts: Vec<(Millis, DayNight)>,
}

struct Sim<'a> {
    scenario: &'a Scenario,
    params: NetParams,
    topo: Topology,
    agents: Vec<Agent>,
    queue: BinaryHeap<Reverse<(Millis, usize, u64, SimEvent)>>,
    seq: u64,
    rng: SplitMix64,
    messages: Vec<NetMessage>,
}

impl<'a> Sim<'a> {
    fn schedule(&mut self, t: Millis, lamp: usize, ev: SimEvent) {
        self.queue.push(Reverse((t, lamp, self.seq, ev)));
        self.seq += 1;
    }

    fn send(&mut self, from: usize, kind: MessageKind, payload: MessagePayload, now: Millis) {
        let latency = self.params.latency_ms as Millis;
        for k in 0..self.topo.neighbors(from).len() {
            let to = self.topo.neighbors(from)[k];
            let dropped = self.rng.bernoulli(self.params.drop_probability);
            let idx = self.messages.len();
            self.messages.push(NetMessage {
                kind,
                from: self.agents[from].cfg.lamp_id.clone(),
                to: self.agents[to].cfg.lamp_id.clone(),
                payload: payload.clone(),
                send_time_ms: now,
                deliver_time_ms: now + latency,
                dropped,
            });
            if !dropped {
                self.schedule(now + latency, to, SimEvent::Deliver(idx));
            }
        }
    }

    fn local_verdict(&self, i: usize, now: Millis) -> Result<DayNightVerdict> {
        let agent = &self.agents[i];
        let solar = if self.scenario.use_solar {
            let at = self.scenario.clock.epoch_utc + Duration::milliseconds(now);
            Some(solar_verdict(daynight::solar_elevation(&agent.cfg.location, at)?))
        } else {
            None
        };
        Ok(fuse(
            agent.vision.unwrap_or(DayNight::Night),
            solar,
            agent.ambient,
        ))
    }

    fn evaluate(&mut self, i: usize, now: Millis, presence: &PresenceReport) -> Result<()> {
        let mut verdict = self.local_verdict(i, now)?;
        let agent = &mut self.agents[i];
        verdict.state = majority(verdict.state, agent.heard.values().copied());
        let next = control::step(&agent.state, &agent.cfg, &verdict, presence, now)?;
        agent.timeline.record(now, next.brightness)?;
        if agent.verdicts.last().map(|&(_, v)| v) != Some(verdict.state) {
            agent.verdicts.push((now, verdict.state));
        }
        agent.state = next;
        let hold = agent.cfg.hold_ms();
        if verdict.state == DayNight::Night && presence.any() && hold > 0 {
            self.schedule(now + hold, i, SimEvent::HoldExpiry);
        }
        Ok(())
    }

    fn detection(&mut self, i: usize, d: &DetectionPayload) -> Result<PresenceReport> {
        let brightness = match (&d.brightness, &d.frame) {
            (Some(b), _) => Some(BrightnessEstimate::new(*b)?),
            (None, Some(path)) => {
                let path = self.scenario.base_dir.join(path);
                let frame = Frame::from_raster(pnm::read(&path)?, 0.0).map_err(|e| e.in_file(&path))?;
                Some(imaging::estimate_brightness(&frame, self.scenario.denoise_radius)?)
            }
            (None, None) => None,
        };
        if let Some(b) = brightness {
            let agent = &mut self.agents[i];
            agent.vision = Some(classify_brightness(b, &agent.cfg.thresholds, agent.vision));
        }
        match (&d.presence, &d.mask) {
            (Some(p), _) => Ok(*p),
            (None, Some(path)) => {
                let path = self.scenario.base_dir.join(path);
                let mask = SegMask::read_pgm(&path, masks::Category::ALL.len())?;
                masks::presence(&mask, self.scenario.min_area_fraction)
            }
            (None, None) => Ok(PresenceReport::absent()),
        }
    }

    fn handle(&mut self, t: Millis, i: usize, ev: SimEvent) -> Result<()> {
        match ev {
            SimEvent::Scenario(k) => {
                let event = &self.scenario.events[k];
                let context = |e: Error| {
                    Error::Scenario(format!(
                        "event #{k} (time_ms {}, lamp {:?}): {e}",
                        event.time_ms, event.lamp_id
                    ))
                };
                match &event.body {
                    EventBody::Detection(d) => {
                        let presence = self.detection(i, d).map_err(context)?;
                        if presence.any() {
                            self.send(i, MessageKind::Presence, MessagePayload::Presence(presence), t);
                        }
                        self.evaluate(i, t, &presence)
                    }
                    EventBody::Ambient(a) => {
                        self.agents[i].ambient = Some(a.state);
                        self.evaluate(i, t, &PresenceReport::absent())
                    }
                }
            }
            SimEvent::Deliver(idx) => {
                let from = self
                    .topo
                    .index_of(&self.messages[idx].from)
                    .expect("sender is a known lamp");
                match self.messages[idx].payload.clone() {
                    MessagePayload::Presence(p) => self.evaluate(i, t, &p),
                    MessagePayload::DayNight { state, .. } => {
                        self.agents[i].heard.insert(from, state);
                        self.evaluate(i, t, &PresenceReport::absent())
                    }
                }
            }
            SimEvent::GossipTick => {
                let local = self.local_verdict(i, t)?;
                self.send(
                    i,
                    MessageKind::DaynightGossip,
                    MessagePayload::DayNight {
                        state: local.state,
                        sender_time_ms: t,
                    },
                    t,
                );
                self.evaluate(i, t, &PresenceReport::absent())?;
                let period = self.params.gossip_period_ms();
                if t + period < self.scenario.clock.end_ms {
                    self.schedule(t + period, i, SimEvent::GossipTick);
                }
                Ok(())
            }
            SimEvent::HoldExpiry => self.evaluate(i, t, &PresenceReport::absent()),
        }
    }

    fn night_intervals(&self, agent: &Agent) -> Vec<Interval> {
        let end = self.scenario.clock.end_ms;
        let mut out = Vec::new();
        for (k, &(t, v)) in agent.verdicts.iter().enumerate() {
            let until = agent.verdicts.get(k + 1).map_or(end, |&(n, _)| n).min(end);
            if v == DayNight::Night && until > t {
                out.push(Interval::new(t, until));
            }
        }
        out
    }
}

/// Runs `scenario` under `params` (which take precedence over the
/// scenario's own `net` block).
pub fn run_sim(scenario: &Scenario, params: &NetParams) -> Result<SimReport> {
    params.validate()?;
    let topo = build_topology(&scenario.lamps)?;
    scenario.validate(&topo)?;
    let start = scenario.clock.start_ms;
    let end = scenario.clock.end_ms;
    let agents = topo
        .lamps()
        .iter()
        .map(|cfg| Agent {
            cfg: cfg.clone(),
            state: LampState::default(),
            vision: None,
            ambient: None,
            heard: BTreeMap::new(),
            timeline: BrightnessTimeline::new(cfg.lamp_id.clone()),
            verdicts: Vec::new(),
        })
        .collect();
    let mut sim = Sim {
        scenario,
        params: *params,
        topo,
        agents,
        queue: BinaryHeap::new(),
        seq: 0,
        rng: SplitMix64::new(params.seed),
        messages: Vec::new(),
    };

    for i in 0..sim.agents.len() {
        sim.evaluate(i, start, &PresenceReport::absent())?;
    }
    for (k, ev) in scenario.events.iter().enumerate() {
        let i = sim.topo.index_of(&ev.lamp_id).expect("validated");
        sim.schedule(ev.time_ms, i, SimEvent::Scenario(k));
    }
    if params.gossip_period_ms() > 0 && start < end {
        for i in 0..sim.agents.len() {
            sim.schedule(start, i, SimEvent::GossipTick);
        }
    }
    while let Some(Reverse((t, i, _, ev))) = sim.queue.pop() {
        if t > end {
            break;
        }
        sim.handle(t, i, ev)?;
    }

    let mut lamps = Vec::with_capacity(sim.agents.len());
    let (mut fleet_energy, mut fleet_baseline) = (0.0, 0.0);
    for agent in &sim.agents {
        let nights = sim.night_intervals(agent);
        let energy = control::energy_wh(&agent.timeline, agent.cfg.rated_watts, end)?;
        let baseline = control::baseline_wh(agent.cfg.rated_watts, &nights)?;
        let savings = match control::savings_vs_baseline(&agent.timeline, &agent.cfg, &nights) {
            Ok(s) => Some(s),
            Err(Error::UndefinedSavings) => None,
            Err(e) => return Err(e),
        };
        fleet_energy += energy;
        fleet_baseline += baseline;
        lamps.push(LampReport {
            lamp_id: agent.cfg.lamp_id.clone(),
            timeline: agent.timeline.steps().to_vec(),
            verdicts: agent.verdicts.clone(),
            night_intervals: nights,
            energy_wh: energy,
            baseline_wh: baseline,
            savings,
        });
    }
    let dropped = sim.messages.iter().filter(|m| m.dropped).count() as u64;
    Ok(SimReport {
        seed: params.seed,
        net: *params,
        start_ms: start,
        end_ms: end,
        lamps,
        fleet: FleetSummary {
            energy_wh: fleet_energy,
            baseline_wh: fleet_baseline,
            savings: (fleet_baseline > 0.0).then(|| 1.0 - fleet_energy / fleet_baseline),
            messages_sent: sim.messages.len() as u64,
            messages_dropped: dropped,
        },
        messages: sim.messages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Position;

    fn lamp(id: &str, x: f64, radius: f64) -> LampConfig {
        LampConfig {
            neighbor_radius: radius,
            position: Position { x, y: 0.0 },
            ..LampConfig::with_id(id)
        }
    }

    #[test]
    fn topology_examples() {
        let t = build_topology(&[lamp("a", 0.0, 50.0), lamp("b", 30.0, 50.0)]).unwrap();
        assert_eq!(t.edges(), &[(0, 1)]);
        let t = build_topology(&[lamp("a", 0.0, 10.0), lamp("b", 30.0, 10.0)]).unwrap();
        assert!(t.edges().is_empty());
        let t = build_topology(&[lamp("a", 0.0, 10.0)]).unwrap();
        assert!(t.edges().is_empty());
        // asymmetric radii: the larger one decides
        let t = build_topology(&[lamp("a", 0.0, 40.0), lamp("b", 30.0, 5.0)]).unwrap();
        assert_eq!(t.edges().len(), 1);
        assert!(matches!(
            build_topology(&[lamp("a", 0.0, 1.0), lamp("a", 5.0, 1.0)]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn gossip_round_examples() {
        use DayNight::*;
        let chain: Vec<_> = (0..4).map(|i| lamp(&format!("l{i}"), i as f64 * 10.0, 25.0)).collect();
        let t = build_topology(&chain).unwrap();
        assert_eq!(gossip_round(&[Night; 4], &t).unwrap(), vec![Night; 4]);
        // l1 sees l0, l2 and l3 (within 25 m)
        let out = gossip_round(&[Night, Day, Night, Night], &t).unwrap();
        assert_eq!(out[1], Night);

        let pair = build_topology(&[lamp("a", 0.0, 50.0), lamp("b", 30.0, 50.0)]).unwrap();
        assert_eq!(gossip_round(&[Day, Night], &pair).unwrap(), vec![Day, Night]);
        assert!(gossip_round(&[Day], &pair).is_err());
    }

    #[test]
    fn scenario_json_shape() {
        let text = r#"{
            "lamps": [{"lamp_id": "a", "location": {"latitude": 0, "longitude": 0}, "rated_watts": 100}],
            "clock": {"epoch_utc": "2024-01-15T20:00:00Z", "start_ms": 0, "end_ms": 1000},
            "events": [
                {"time_ms": 5, "lamp_id": "a", "kind": "detection",
                 "payload": {"presence": {"vehicle_present": true, "pedestrian_present": false,
                             "vehicle_fraction": 0.2, "pedestrian_fraction": 0.0}}},
                {"time_ms": 6, "lamp_id": "a", "kind": "ambient", "payload": {"state": "NIGHT"}}
            ]
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.events.len(), 2);
        assert!(s.use_solar);
        assert!(matches!(s.events[1].body, EventBody::Ambient(AmbientPayload { state: DayNight::Night })));
    }

    #[test]
    fn malformed_scenario_reports_line() {
        let err = Scenario::from_json("{\n  \"lamps\": [\n  oops\n]}").unwrap_err();
        match err {
            Error::Scenario(msg) => assert!(msg.starts_with("line 3"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
