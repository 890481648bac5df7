//! Decentralized learning agents.
//!
//! APs run channel-allocation agents (arms = the channel list) fed by
//! channel-reward samples; stations run AP-selection agents (arms = the APs
//! in range) fed by satisfaction samples. Both share one activation cycle:
//!
//! 1. aggregate the current arm's signal over the sliding window,
//! 2. refresh that arm's posterior (skipped, arm retained, when the window
//!    holds no observation),
//! 3. draw one Thompson sample per arm,
//! 4. emit the argmax arm; the caller applies the reconfiguration.
//!
//! Between activations an agent's arm never changes (except by a forced
//! reconfiguration).
//!
//! Step 2 supports two memory disciplines, selected per run. Under
//! [`PosteriorMemory::Window`] (the default) the current arm's posterior is
//! rebuilt each activation from the raw samples inside the sliding window;
//! data older than the window is forgotten, and an arm that receives no new
//! samples keeps the posterior from its last refresh. Under
//! [`PosteriorMemory::Lifetime`] the windowed mean is folded into the
//! posterior as one sample per activation, so the posterior averages over
//! the agent's whole lifetime and its variance decays monotonically.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{argmax_lowest, SlidingWindowHistory, ThompsonSampler};

/// How much history an arm's posterior remembers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosteriorMemory {
    /// Rebuild the current arm's posterior from the raw samples inside the
    /// sliding window at every activation. The posterior tracks the current
    /// regime and can revise its beliefs after the environment changes;
    /// unvisited arms keep their last-known posterior.
    #[default]
    Window,
    /// Fold one windowed-mean sample into the current arm's posterior per
    /// activation and keep it forever. Variance shrinks as 1/(updates+1)
    /// over the agent's lifetime, so late evidence moves beliefs less and
    /// less.
    Lifetime,
}

impl PosteriorMemory {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Window => "window",
            Self::Lifetime => "lifetime",
        }
    }
}

impl std::fmt::Display for PosteriorMemory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PosteriorMemory {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "window" => Ok(Self::Window),
            "lifetime" => Ok(Self::Lifetime),
            other => Err(crate::Error::Config(format!(
                "unknown posterior memory {other:?}; expected window or lifetime"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    /// Dynamic channel allocation, owned by an AP.
    ChannelAllocation,
    /// AP selection, owned by a station.
    ApSelection,
}

/// Outcome of one activation, in arm *values* (channel index or AP id).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Windowed reward fed to the posterior; None means the window held no
    /// observation, so the posterior stayed put and the arm was retained.
    pub reward: Option<f64>,
    pub from_value: usize,
    pub to_value: usize,
}

impl Decision {
    pub fn reconfigured(&self) -> bool {
        self.from_value != self.to_value
    }
}

/// One learning agent. `arms` maps arm indices to domain values: channel
/// indices for channel allocation, AP ids for AP selection.
#[derive(Debug, Clone)]
pub struct Agent {
    pub kind: AgentKind,
    /// Owning node id (AP id or station id in its own index space).
    pub owner: usize,
    pub arms: Vec<usize>,
    current: usize,
    pub sampler: ThompsonSampler,
    pub history: SlidingWindowHistory,
    pub memory: PosteriorMemory,
    pub period_s: f64,
    pub next_activation_s: f64,
    rng: ChaCha8Rng,
}

impl Agent {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: AgentKind,
        owner: usize,
        arms: Vec<usize>,
        initial_value: usize,
        window_s: f64,
        period_s: f64,
        first_activation_s: f64,
        memory: PosteriorMemory,
        rng: ChaCha8Rng,
    ) -> Self {
        let n = arms.len();
        let current = arms
            .iter()
            .position(|&v| v == initial_value)
            .expect("initial arm value must be in the arm set");
        Self {
            kind,
            owner,
            arms,
            current,
            sampler: ThompsonSampler::new(n),
            history: SlidingWindowHistory::new(n, window_s),
            memory,
            period_s,
            next_activation_s: first_activation_s,
            rng,
        }
    }

    /// Arm index currently in effect.
    pub fn current_arm(&self) -> usize {
        self.current
    }

    /// Domain value of the current arm.
    pub fn current_value(&self) -> usize {
        self.arms[self.current]
    }

    /// Records an observation for the *current* arm.
    pub fn observe(&mut self, t: f64, value: f64) {
        self.history.record(self.current, t, value);
    }

    /// Ends the current arm's observation hold (owner went idle).
    pub fn stop_observing(&mut self, t: f64) {
        self.history.close(self.current, t);
    }

    /// Runs one activation cycle at `now` and re-arms the timer. The caller
    /// is responsible for applying the reconfiguration when
    /// `decision.reconfigured()`.
    pub fn on_activation(&mut self, now: f64) -> Decision {
        self.next_activation_s = now + self.period_s;
        self.history.prune(now);
        let from_value = self.arms[self.current];
        let Some(reward) = self.history.windowed_reward(self.current, now) else {
            return Decision {
                reward: None,
                from_value,
                to_value: from_value,
            };
        };
        match self.memory {
            PosteriorMemory::Window => {
                let refreshed = self
                    .history
                    .windowed_posterior(self.current, now)
                    .expect("windowed reward implies in-window samples");
                self.sampler.arms[self.current] = refreshed;
            }
            PosteriorMemory::Lifetime => self.sampler.update(self.current, reward),
        }
        let chosen = self.sampler.select_arm(&mut self.rng);
        if chosen != self.current {
            self.history.close(self.current, now);
            self.current = chosen;
        }
        Decision {
            reward: Some(reward),
            from_value,
            to_value: self.arms[self.current],
        }
    }

    /// Moves the agent onto `value` without consulting the learner (forced
    /// reconfiguration of the owner). Future observations accrue to the new
    /// arm; returns false when the value is outside the arm set.
    pub fn force_value(&mut self, value: usize, now: f64) -> bool {
        match self.arms.iter().position(|&v| v == value) {
            Some(idx) => {
                if idx != self.current {
                    self.history.close(self.current, now);
                    self.current = idx;
                }
                true
            }
            None => false,
        }
    }
}

/// AP-selection action set of one station: every AP whose RSSI meets the
/// selection threshold; if none does, the single strongest AP above the
/// clear-channel threshold. An empty result means the station is out of
/// coverage entirely.
pub fn station_action_set(rssi_dbm: &[f64], rssi_threshold_dbm: f64, cca_dbm: f64) -> Vec<usize> {
    let set: Vec<usize> = (0..rssi_dbm.len())
        .filter(|&a| rssi_dbm[a] >= rssi_threshold_dbm)
        .collect();
    if !set.is_empty() {
        return set;
    }
    let strongest = argmax_lowest(rssi_dbm.iter().copied());
    if rssi_dbm
        .get(strongest)
        .copied()
        .unwrap_or(f64::NEG_INFINITY)
        >= cca_dbm
    {
        vec![strongest]
    } else {
        Vec::new()
    }
}

/// Strongest-signal-first association: the AP with the highest RSSI, lowest
/// id on ties.
pub fn strongest_signal_ap(rssi_dbm: &[f64]) -> usize {
    argmax_lowest(rssi_dbm.iter().copied())
}
