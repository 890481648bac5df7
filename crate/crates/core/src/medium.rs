//! Airtime abstraction of the CSMA/CA medium.
//!
//! Every downlink flow turns its bit-rate demand into an airtime requirement
//! (channel-seconds per second). An AP's *own load* is the sum over its
//! flows; its *effective load* adds the own loads of every co-channel AP it
//! senses. Effective load may exceed 1: the abstraction then scales every
//! flow of that AP by the same satisfaction factor instead of simulating
//! per-frame contention.

use serde::{Deserialize, Serialize};

use crate::phy::PhyConstants;
use crate::{Error, Result};

/// Parameters of the airtime requirement beyond pure frame timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirtimeParams {
    /// Frame error probability; every frame costs on average 1/(1−p_e) tries.
    pub frame_error_rate: f64,
    /// Expected backoff before a transmission, in slots: (CW_min − 1)/2.
    pub expected_backoff_slots: f64,
}

impl AirtimeParams {
    /// Derives the expected backoff from the minimal contention window.
    pub fn new(cw_min: u32, frame_error_rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&frame_error_rate) {
            return Err(Error::Config(format!(
                "frame error rate must be in [0, 1), got {frame_error_rate}"
            )));
        }
        if cw_min == 0 {
            return Err(Error::Config("cw_min must be at least 1".into()));
        }
        Ok(Self {
            frame_error_rate,
            expected_backoff_slots: (cw_min as f64 - 1.0) / 2.0,
        })
    }
}

impl Default for AirtimeParams {
    fn default() -> Self {
        Self::new(16, 0.1).expect("default airtime parameters are valid")
    }
}

/// Airtime (channel-seconds per second) required to carry `demand_bps` over a
/// link whose successful exchange lasts `success_s`:
/// `u = 1/(1−p_e) · ceil(B/L_d) · (E[backoff]·slot + t_s)`.
///
/// A zero demand requires zero airtime. The value is a *demand*, not an
/// allocation, so it is unbounded above.
pub fn airtime_requirement(
    demand_bps: f64,
    phy: &PhyConstants,
    params: &AirtimeParams,
    success_s: f64,
) -> f64 {
    let frames_per_s = (demand_bps / phy.frame_payload_bits as f64).ceil();
    frames_per_s * (params.expected_backoff_slots * phy.slot_s + success_s)
        / (1.0 - params.frame_error_rate)
}

/// Effective load of an AP: its own airtime plus the own airtime of every
/// co-channel AP within carrier-sense range.
pub fn effective_load(own_load: f64, neighbor_own_loads: impl IntoIterator<Item = f64>) -> f64 {
    own_load + neighbor_own_loads.into_iter().sum::<f64>()
}

/// Reward of a channel under effective load `load`: the airtime still free.
pub fn channel_reward(load: f64) -> f64 {
    (1.0 - load).max(0.0)
}

/// Satisfaction of the flows behind an AP at effective load `load`: the
/// fraction of demanded airtime actually granted. 1 when the channel is not
/// saturated (including the idle case), `1/load` beyond saturation.
pub fn satisfaction(load: f64) -> f64 {
    if load <= 1.0 {
        1.0
    } else {
        1.0 / load
    }
}

/// Airtime actually granted to a flow demanding `airtime` at `satisfaction`.
pub fn allocated_airtime(airtime: f64, satisfaction: f64) -> f64 {
    airtime * satisfaction
}

/// Throughput of a flow demanding `demand_bps` at `satisfaction`.
pub fn station_throughput(demand_bps: f64, satisfaction: f64) -> f64 {
    demand_bps * satisfaction
}
