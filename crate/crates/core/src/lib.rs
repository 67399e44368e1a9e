//! Streetlight control from segmentation output.
//!
//! The crate covers the whole decision path of a camera-equipped streetlight:
//!
//! - [`imaging`]: frame decimation, BT.601 grayscale, median denoise, ambient brightness
//! - [`masks`]: palette label decoding and reduction to background/vehicle/pedestrian
//! - [`metrics`]: confusion-matrix IoU, mean IoU, precision/recall/F1, cross-entropy
//! - [`detectors`]: oracle, file-backed and perturbed detection backends
//! - [`daynight`]: brightness hysteresis, solar elevation, verdict fusion
//! - [`control`]: the per-lamp dimming state machine and energy accounting
//! - [`agent_net`]: a deterministic discrete-event simulation of a lamp network

pub mod agent_net;
pub mod control;
pub mod daynight;
pub mod detectors;
pub mod error;
pub mod imaging;
pub mod manifest;
pub mod masks;
pub mod metrics;
pub mod pnm;
pub mod rng;

pub use agent_net::{build_topology, gossip_round, run_sim, NetParams, Scenario, SimReport, Topology};
pub use control::{BrightnessTimeline, Interval, LampConfig, LampMode, LampState, Millis};
pub use daynight::{DayNight, DayNightVerdict, GeoLocation, HysteresisThresholds, SolarVerdict};
pub use detectors::{Detector, DetectorOutput, PerturbationParams};
pub use error::{Error, Result};
pub use imaging::{BrightnessEstimate, Frame, GrayImage};
pub use manifest::RunManifest;
pub use masks::{Category, ClassMap, PresenceReport, SegMask};
pub use metrics::{ConfusionMatrix, MetricsReport, ProbMap};
pub use rng::SplitMix64;
