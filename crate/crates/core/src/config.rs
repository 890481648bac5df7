//! Simulation parameters and their on-disk TOML form.
//!
//! Top-level keys mirror the canonical parameter names (`t_sim`, `t_dca`,
//! `t_daps`, `t_sw`, `p_th`, `cca_dbm`, ...). The optional `[phy]` and
//! `[path_loss]` tables override the physical-layer defaults, and an
//! optional `[[mcs_table]]` array replaces the built-in MCS ladder.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::PosteriorMemory;
use crate::medium::AirtimeParams;
use crate::phy::{McsEntry, McsTable, PathLossParams, PhyConstants};
use crate::traffic::TrafficParams;
use crate::{Error, Result};

/// Which agent kinds run in adaptive mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentSelection {
    None,
    /// Channel-allocation agents at APs only.
    Dca,
    /// AP-selection agents at stations only.
    Daps,
    Both,
}

impl AgentSelection {
    pub fn dca(self) -> bool {
        matches!(self, Self::Dca | Self::Both)
    }
    pub fn daps(self) -> bool {
        matches!(self, Self::Daps | Self::Both)
    }
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Dca => "dca",
            Self::Daps => "daps",
            Self::Both => "both",
        }
    }
}

impl std::fmt::Display for AgentSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AgentSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "dca" => Ok(Self::Dca),
            "daps" => Ok(Self::Daps),
            "both" => Ok(Self::Both),
            other => Err(Error::Config(format!(
                "unknown agent selection {other:?}; expected none, dca, daps, or both"
            ))),
        }
    }
}

/// Scheduled channel change applied to an AP regardless of its agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcedReconfig {
    pub time_s: f64,
    pub ap: usize,
    pub channel: u16,
}

/// Full parameter set of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Simulated horizon in seconds.
    pub t_sim: f64,
    /// Channel-allocation agent activation period.
    pub t_dca: f64,
    /// AP-selection agent activation period.
    pub t_daps: f64,
    /// Sliding reward window of both agent kinds.
    pub t_sw: f64,
    /// Satisfaction threshold used by convergence detection.
    pub p_th: f64,
    /// Clear-channel assessment threshold.
    pub cca_dbm: f64,
    /// RSSI threshold for AP-selection action sets.
    pub rssi_th_dbm: f64,
    /// AP transmit power.
    pub tx_power_dbm: f64,
    /// Frame error probability.
    pub p_e: f64,
    /// Minimal contention window (expected backoff = (cw_min − 1)/2 slots).
    pub cw_min: u32,
    /// Mean flow duration in seconds.
    pub t_on: f64,
    /// Mean idle duration in seconds.
    pub t_off: f64,
    pub demand_min_mbps: f64,
    pub demand_max_mbps: f64,
    /// Allowed channel numbers (the channel-allocation arm set).
    pub channels: Vec<u16>,
    /// Deployment box in meters.
    pub area_xyz: [f64; 3],
    pub n_aps: usize,
    pub n_stations: usize,
    /// Base seed; every internal stream derives from it.
    pub seed: u64,
    pub agents_enabled: AgentSelection,
    /// Posterior memory discipline of all agents: `window` rebuilds each
    /// arm's posterior from the raw samples inside the sliding window;
    /// `lifetime` accumulates one windowed-mean sample per activation
    /// forever.
    pub posterior_memory: PosteriorMemory,
    /// Instant from which agents run; before it the network is static.
    pub agent_enable_time: f64,
    /// APs whose channel-allocation agent stays off.
    pub dca_disabled_aps: Vec<usize>,
    /// Stations whose AP-selection agent stays off.
    pub daps_disabled_stations: Vec<usize>,
    pub forced_reconfigs: Vec<ForcedReconfig>,
    /// Metrics sampling grid in seconds.
    pub metrics_interval: f64,
    /// Compare incremental loads against a from-scratch recomputation every
    /// N events; None falls back to every 1000 events in debug builds.
    pub audit_every: Option<u64>,
    pub phy: PhyConstants,
    pub path_loss: PathLossParams,
    /// Replacement MCS ladder; None keeps the built-in table.
    pub mcs_table: Option<Vec<McsEntry>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            t_sim: 86_400.0,
            t_dca: 180.0,
            t_daps: 180.0,
            t_sw: 540.0,
            p_th: 0.85,
            cca_dbm: -80.0,
            rssi_th_dbm: -75.0,
            tx_power_dbm: 15.0,
            p_e: 0.1,
            cw_min: 16,
            t_on: 1.0,
            t_off: 3.0,
            demand_min_mbps: 1.0,
            demand_max_mbps: 5.0,
            channels: vec![36, 40, 44],
            area_xyz: [30.0, 30.0, 2.0],
            n_aps: 15,
            n_stations: 225,
            seed: 1,
            agents_enabled: AgentSelection::Both,
            posterior_memory: PosteriorMemory::Window,
            agent_enable_time: 0.0,
            dca_disabled_aps: Vec::new(),
            daps_disabled_stations: Vec::new(),
            forced_reconfigs: Vec::new(),
            metrics_interval: 60.0,
            audit_every: None,
            phy: PhyConstants::default(),
            path_loss: PathLossParams::default(),
            mcs_table: None,
        }
    }
}

impl SimConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = toml::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = toml::to_string(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        }
        positive("t_sim", self.t_sim)?;
        positive("t_dca", self.t_dca)?;
        positive("t_daps", self.t_daps)?;
        positive("t_sw", self.t_sw)?;
        positive("metrics_interval", self.metrics_interval)?;
        if !(0.0 < self.p_th && self.p_th < 1.0) {
            return Err(Error::Config(format!(
                "p_th must be in (0, 1), got {}",
                self.p_th
            )));
        }
        self.traffic_params().validate()?;
        self.airtime_params()?;
        if self.channels.is_empty() {
            return Err(Error::Config("channel list must not be empty".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &c in &self.channels {
            if !seen.insert(c) {
                return Err(Error::Config(format!("duplicate channel {c}")));
            }
        }
        if self.area_xyz.iter().any(|&d| d <= 0.0) {
            return Err(Error::Config(format!(
                "deployment box must have positive extents, got {:?}",
                self.area_xyz
            )));
        }
        if self.n_aps == 0 {
            return Err(Error::Config("at least one AP is required".into()));
        }
        if self.agent_enable_time < 0.0 {
            return Err(Error::Config("agent_enable_time must be >= 0".into()));
        }
        for fr in &self.forced_reconfigs {
            if !self.channels.contains(&fr.channel) {
                return Err(Error::Config(format!(
                    "forced reconfiguration at t={} targets channel {} outside the channel list",
                    fr.time_s, fr.channel
                )));
            }
            if fr.time_s < 0.0 {
                return Err(Error::Config(
                    "forced reconfiguration time must be >= 0".into(),
                ));
            }
        }
        self.mcs()?;
        Ok(())
    }

    pub fn traffic_params(&self) -> TrafficParams {
        TrafficParams {
            mean_on_s: self.t_on,
            mean_off_s: self.t_off,
            demand_min_bps: self.demand_min_mbps * 1e6,
            demand_max_bps: self.demand_max_mbps * 1e6,
        }
    }

    pub fn airtime_params(&self) -> Result<AirtimeParams> {
        AirtimeParams::new(self.cw_min, self.p_e)
    }

    pub fn mcs(&self) -> Result<McsTable> {
        match &self.mcs_table {
            Some(entries) => McsTable::new(entries.clone()),
            None => Ok(McsTable::default_he20()),
        }
    }
}
