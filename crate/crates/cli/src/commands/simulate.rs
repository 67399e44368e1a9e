use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::Serialize;
use serde_json::json;
use streetlight_core::{run_sim, RunManifest, Scenario, SimReport};

use crate::output::{csv_sibling, write_json, write_text};
use crate::Common;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario document (JSON)
    pub scenario: PathBuf,
    /// Override the scenario's message drop probability
    #[arg(long, value_name = "P")]
    pub drop: Option<f64>,
    /// Override the scenario's one-way latency
    #[arg(long, value_name = "MS")]
    pub latency_ms: Option<u64>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    manifest: RunManifest,
    #[serde(flatten)]
    report: &'a SimReport,
}

pub fn run(args: &SimulateArgs, common: &Common) -> Result<()> {
    let scenario = Scenario::load(&args.scenario)?;
    let mut params = scenario.net;
    if let Some(seed) = common.seed {
        params.seed = seed;
    }
    if let Some(p) = args.drop {
        params.drop_probability = p;
    }
    if let Some(ms) = args.latency_ms {
        params.latency_ms = ms;
    }
    let report = run_sim(&scenario, &params)?;

    let fleet = &report.fleet;
    let savings = fleet
        .savings
        .map_or_else(|| "undefined (no night)".to_owned(), |s| format!("{:.6}%", s * 100.0));
    println!(
        "lamps {}  energy {:.6} Wh  baseline {:.6} Wh  savings {}",
        report.lamps.len(),
        fleet.energy_wh,
        fleet.baseline_wh,
        savings
    );
    println!(
        "messages {} sent, {} dropped",
        fleet.messages_sent, fleet.messages_dropped
    );

    if let Some(out) = &common.out {
        let mut manifest = RunManifest::new(
            "simulate",
            json!({ "scenario": args.scenario, "net": params }),
            Some(params.seed),
        );
        manifest.add_input(&args.scenario)?;
        write_text(&csv_sibling(out), &report.timeline_csv())?;
        write_json(out, &Envelope { manifest, report: &report })?;
    }
    Ok(())
}
