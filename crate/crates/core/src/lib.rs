//! Discrete-event simulator of enterprise WLANs in which decentralized
//! Thompson-sampling agents concurrently learn channel assignments (at APs)
//! and AP associations (at stations).
//!
//! The medium is modeled through an airtime abstraction: every downlink flow
//! demands a fraction of channel time derived from 802.11ax frame timing, APs
//! aggregate the airtime of everything they sense on their channel, and a
//! load above one channel-second per second scales every attached flow down
//! proportionally. Channel reward (for channel-allocation agents) and station
//! satisfaction (for AP-selection agents) both derive from that load signal.
//!
//! Module map:
//! - [`phy`]: path loss, MCS selection, frame/transmission timing
//! - [`medium`]: airtime requirement, effective load, reward/satisfaction
//! - [`traffic`]: on/off Markovian downlink traffic
//! - [`bandit`]: Gaussian Thompson sampling, sliding-window rewards, regret
//! - [`agents`]: channel-allocation and AP-selection agent state machines
//! - [`network`]: mutable network state with incremental load bookkeeping
//! - [`engine`]: scenarios, event loop, batches, experiment presets
//! - [`report`]: summary statistics, convergence detection, CSV/JSON output
//! - [`config`]: simulation parameters and their TOML file form

pub mod agents;
pub mod bandit;
pub mod config;
pub mod engine;
pub mod medium;
pub mod network;
pub mod phy;
pub mod report;
pub mod traffic;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("no usable MCS: RSSI {rssi_dbm} dBm is below the weakest table entry")]
    NoLink { rssi_dbm: f64 },
    #[error("load audit failed: {0}")]
    Audit(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("TOML parse error: {0}")]
    TomlParse(#[from] toml::de::Error),
    #[error("TOML serialize error: {0}")]
    TomlWrite(#[from] toml::ser::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use agents::PosteriorMemory;
pub use config::{AgentSelection, ForcedReconfig, SimConfig};
pub use engine::scenario::{generate_scenario, toy_scenario, Scenario};
pub use engine::{run, run_batch, BatchRow, Mode, RunResult};
pub use medium::AirtimeParams;
pub use phy::{McsTable, PathLossParams, PhyConstants};
