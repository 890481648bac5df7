//! On/off Markovian downlink traffic.
//!
//! Each station alternates between an active period (one flow, exponential
//! duration) and an idle period (exponential duration). The flow's bit-rate
//! demand is drawn uniformly per activation, so the long-run offered load of
//! a station is `E[B] · T_on / (T_on + T_off)`.

use rand::distr::Uniform;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Traffic model parameters. Durations in seconds, demand in bit/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficParams {
    pub mean_on_s: f64,
    pub mean_off_s: f64,
    pub demand_min_bps: f64,
    pub demand_max_bps: f64,
}

impl TrafficParams {
    pub fn validate(&self) -> Result<()> {
        if self.mean_on_s <= 0.0 || self.mean_off_s <= 0.0 {
            return Err(Error::Config(format!(
                "traffic period means must be positive, got on {} / off {}",
                self.mean_on_s, self.mean_off_s
            )));
        }
        if !(self.demand_min_bps > 0.0 && self.demand_min_bps <= self.demand_max_bps) {
            return Err(Error::Config(format!(
                "demand range must satisfy 0 < min <= max, got [{}, {}]",
                self.demand_min_bps, self.demand_max_bps
            )));
        }
        Ok(())
    }
}

impl Default for TrafficParams {
    fn default() -> Self {
        Self {
            mean_on_s: 1.0,
            mean_off_s: 3.0,
            demand_min_bps: 1e6,
            demand_max_bps: 5e6,
        }
    }
}

/// Per-station traffic sampler with its own RNG stream.
#[derive(Debug, Clone)]
pub struct TrafficSource {
    rng: ChaCha8Rng,
    on: Exp<f64>,
    off: Exp<f64>,
    demand: Uniform<f64>,
}

impl TrafficSource {
    pub fn new(params: &TrafficParams, rng: ChaCha8Rng) -> Result<Self> {
        params.validate()?;
        let on = Exp::new(1.0 / params.mean_on_s)
            .map_err(|e| Error::Config(format!("invalid on-period rate: {e}")))?;
        let off = Exp::new(1.0 / params.mean_off_s)
            .map_err(|e| Error::Config(format!("invalid off-period rate: {e}")))?;
        let demand = Uniform::new_inclusive(params.demand_min_bps, params.demand_max_bps)
            .map_err(|e| Error::Config(format!("invalid demand range: {e}")))?;
        Ok(Self {
            rng,
            on,
            off,
            demand,
        })
    }

    /// Duration of the next active period.
    pub fn next_on_s(&mut self) -> f64 {
        self.on.sample(&mut self.rng)
    }

    /// Duration of the next idle period.
    pub fn next_off_s(&mut self) -> f64 {
        self.off.sample(&mut self.rng)
    }

    /// Demand of the next flow in bit/s.
    pub fn next_demand_bps(&mut self) -> f64 {
        self.rng.sample(self.demand)
    }
}
