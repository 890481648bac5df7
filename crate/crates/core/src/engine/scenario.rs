//! Deployment descriptions: node positions, initial channels, associations.
//!
//! A scenario is everything about a run that is fixed before the first
//! event fires. It serializes to TOML byte-stably (struct field order), so
//! generated deployments can be stored, diffed, and replayed.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::seeds;
use crate::config::SimConfig;
use crate::phy::{channel_center_ghz, distance_m, received_power_dbm};
use crate::{Error, Result};

/// Attempts per station before giving up on covered placement.
const PLACEMENT_RETRY_LIMIT: u32 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApRecord {
    pub id: usize,
    pub pos: [f64; 3],
    /// Initial channel number.
    pub channel: u16,
    pub tx_power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub id: usize,
    pub pos: [f64; 3],
    /// Initially associated AP (strongest signal first).
    pub ap: usize,
}

/// A complete deployment: geometry, initial channels, initial associations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Deployment box in meters.
    pub area: [f64; 3],
    /// Allowed channel numbers.
    pub channels: Vec<u16>,
    /// Base seed the deployment was generated from; also seeds the run.
    pub seed: u64,
    pub aps: Vec<ApRecord>,
    pub stations: Vec<StationRecord>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let sc: Self = toml::from_str(&text)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = toml::to_string(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.is_empty() {
            return Err(Error::Scenario("channel list must not be empty".into()));
        }
        if self.aps.is_empty() {
            return Err(Error::Scenario("at least one AP is required".into()));
        }
        for (i, ap) in self.aps.iter().enumerate() {
            if ap.id != i {
                return Err(Error::Scenario(format!(
                    "AP ids must be sequential; found id {} at position {i}",
                    ap.id
                )));
            }
            if !self.channels.contains(&ap.channel) {
                return Err(Error::Scenario(format!(
                    "AP {} starts on channel {} outside the channel list",
                    ap.id, ap.channel
                )));
            }
            if ap.pos.iter().any(|v| !v.is_finite()) {
                return Err(Error::Scenario(format!(
                    "AP {} has a non-finite position",
                    ap.id
                )));
            }
        }
        for (i, sta) in self.stations.iter().enumerate() {
            if sta.id != i {
                return Err(Error::Scenario(format!(
                    "station ids must be sequential; found id {} at position {i}",
                    sta.id
                )));
            }
            if sta.ap >= self.aps.len() {
                return Err(Error::Scenario(format!(
                    "station {} is associated with unknown AP {}",
                    sta.id, sta.ap
                )));
            }
            if sta.pos.iter().any(|v| !v.is_finite()) {
                return Err(Error::Scenario(format!(
                    "station {} has a non-finite position",
                    sta.id
                )));
            }
        }
        Ok(())
    }
}

fn uniform_pos(rng: &mut impl Rng, area: [f64; 3]) -> [f64; 3] {
    [
        rng.random_range(0.0..area[0]),
        rng.random_range(0.0..area[1]),
        rng.random_range(0.0..area[2]),
    ]
}

/// RSSI a station at `pos` sees from `ap` on the AP's own channel.
fn rssi_from_ap(cfg: &SimConfig, ap: &ApRecord, pos: [f64; 3]) -> f64 {
    let d = distance_m(ap.pos, pos);
    let fc = channel_center_ghz(ap.channel);
    received_power_dbm(ap.tx_power_dbm, &cfg.path_loss, d, fc)
}

/// Strongest-signal AP at the initial channels; ties go to the lowest id.
fn strongest_ap(cfg: &SimConfig, aps: &[ApRecord], pos: [f64; 3]) -> (usize, f64) {
    let mut best = 0;
    let mut best_rssi = f64::NEG_INFINITY;
    for ap in aps {
        let rssi = rssi_from_ap(cfg, ap, pos);
        if rssi > best_rssi {
            best_rssi = rssi;
            best = ap.id;
        }
    }
    (best, best_rssi)
}

/// Generates a random deployment from `cfg`.
///
/// APs land uniformly in the box and draw their initial channel uniformly
/// from the channel list. Stations are resampled until at least one AP is
/// received at or above the clear-channel threshold, then associate with
/// the strongest AP.
pub fn generate_scenario(cfg: &SimConfig) -> Result<Scenario> {
    cfg.validate()?;
    let mut placement = seeds::stream_rng(cfg.seed, seeds::STREAM_PLACEMENT, 0);
    let mut channels = seeds::stream_rng(cfg.seed, seeds::STREAM_CHANNELS, 0);

    let mut aps = Vec::with_capacity(cfg.n_aps);
    for id in 0..cfg.n_aps {
        let pos = uniform_pos(&mut placement, cfg.area_xyz);
        let channel = cfg.channels[channels.random_range(0..cfg.channels.len())];
        aps.push(ApRecord {
            id,
            pos,
            channel,
            tx_power_dbm: cfg.tx_power_dbm,
        });
    }

    let mut stations = Vec::with_capacity(cfg.n_stations);
    for id in 0..cfg.n_stations {
        let mut placed = None;
        for _ in 0..PLACEMENT_RETRY_LIMIT {
            let pos = uniform_pos(&mut placement, cfg.area_xyz);
            let (ap, rssi) = strongest_ap(cfg, &aps, pos);
            if rssi >= cfg.cca_dbm {
                placed = Some(StationRecord { id, pos, ap });
                break;
            }
        }
        let Some(record) = placed else {
            return Err(Error::Scenario(format!(
                "could not place station {id} within coverage after {PLACEMENT_RETRY_LIMIT} attempts; \
                 the deployment box is too large for {} APs at {} dBm",
                cfg.n_aps, cfg.tx_power_dbm
            )));
        };
        stations.push(record);
    }

    let scenario = Scenario {
        area: cfg.area_xyz,
        channels: cfg.channels.clone(),
        seed: cfg.seed,
        aps,
        stations,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Fixed three-AP line deployment used by the component experiments.
///
/// APs sit at x = 5.5, 12.5, 19.5 (y = 12.5, z = 2.0) in a 25 × 25 × 2 m box:
/// adjacent APs are 7 m apart and sense each other at default power and
/// clear-channel settings, while the outer pair (14 m) does not. All APs
/// start on `initial_channel` so contention is maximal until agents act.
/// Station count, channel list, and seed come from `cfg`.
pub fn toy_scenario(cfg: &SimConfig, initial_channel: u16) -> Result<Scenario> {
    if !cfg.channels.contains(&initial_channel) {
        return Err(Error::Scenario(format!(
            "initial channel {initial_channel} is outside the channel list {:?}",
            cfg.channels
        )));
    }
    let area = [25.0, 25.0, 2.0];
    let aps: Vec<ApRecord> = [5.5, 12.5, 19.5]
        .iter()
        .enumerate()
        .map(|(id, &x)| ApRecord {
            id,
            pos: [x, 12.5, 2.0],
            channel: initial_channel,
            tx_power_dbm: cfg.tx_power_dbm,
        })
        .collect();

    let mut placement = seeds::stream_rng(cfg.seed, seeds::STREAM_PLACEMENT, 0);
    let mut stations = Vec::with_capacity(cfg.n_stations);
    for id in 0..cfg.n_stations {
        let mut placed = None;
        for _ in 0..PLACEMENT_RETRY_LIMIT {
            let pos = uniform_pos(&mut placement, area);
            let (ap, rssi) = strongest_ap(cfg, &aps, pos);
            if rssi >= cfg.cca_dbm {
                placed = Some(StationRecord { id, pos, ap });
                break;
            }
        }
        let Some(record) = placed else {
            return Err(Error::Scenario(format!(
                "could not place station {id} within coverage of the three-AP line"
            )));
        };
        stations.push(record);
    }

    let scenario = Scenario {
        area,
        channels: cfg.channels.clone(),
        seed: cfg.seed,
        aps,
        stations,
    };
    scenario.validate()?;
    Ok(scenario)
}
